"""Dyadic lattices, stopping-time cubes, sparse families, CZ decomposition.

Cubes are addressed by (depth, index) relative to a root cube aligned with
a grid; all measure bookkeeping (cube measures, witness-set measures,
sparsity checks) is exact rational arithmetic.  Witness sets are stored as
unions of finest-level cells so that set differences and measures are
computed without floating point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import DomainError, GeometryError
from .grid import GridFunction, same_geometry

#: geometric schedule of stopping constants: 1 + 2^-6, 1 + 2^-5, ...
C0_CANDIDATES = [1 + Fraction(1, 64) * 2**j for j in range(40)]


@dataclass(frozen=True)
class DyadicCube:
    """Cube at ``depth`` generations below the root, with per-axis index."""

    depth: int
    index: tuple[int, ...]

    def children(self) -> list["DyadicCube"]:
        out = []
        for corner in itertools.product((0, 1), repeat=len(self.index)):
            idx = tuple(2 * i + c for i, c in zip(self.index, corner))
            out.append(DyadicCube(self.depth + 1, idx))
        return out

    def ancestor(self, depth: int) -> "DyadicCube":
        if depth > self.depth:
            raise DomainError("ancestor depth must not exceed cube depth")
        shift = self.depth - depth
        return DyadicCube(depth, tuple(i >> shift for i in self.index))

    def contains(self, other: "DyadicCube") -> bool:
        return other.depth >= self.depth and other.ancestor(self.depth) == self


class DyadicLattice:
    """Dyadic subdivision of a grid's box, aligned with its cells.

    Requires a cubical box and a cell count divisible by 2^max_depth with
    at least two grid cells per axis inside the finest cube.
    """

    def __init__(self, grid: GridFunction, max_depth: int):
        box = grid.box
        if len(set(box.side)) != 1 or len(set(grid.cells)) != 1:
            raise GeometryError("dyadic lattice requires a cubical grid")
        cells = grid.cells[0]
        if max_depth < 0:
            raise DomainError("max_depth must be non-negative")
        if cells % (1 << max_depth) != 0 or cells // (1 << max_depth) < 2:
            raise GeometryError(
                f"{cells} cells per axis cannot host depth {max_depth} "
                "(need divisibility and >= 2 cells per finest cube)"
            )
        self.ndim = box.ndim
        self.box = box
        self.cells = cells
        self.max_depth = max_depth
        self.root_side = Fraction(box.side[0])

    def root(self) -> DyadicCube:
        return DyadicCube(0, (0,) * self.ndim)

    def side(self, cube: DyadicCube) -> Fraction:
        return self.root_side / (1 << cube.depth)

    def measure(self, cube: DyadicCube) -> Fraction:
        return self.side(cube) ** self.ndim

    def cube_lo(self, cube: DyadicCube) -> tuple[float, ...]:
        s = float(self.side(cube))
        return tuple(l + i * s for l, i in zip(self.box.lo, cube.index))

    def cube_center(self, cube: DyadicCube) -> tuple[float, ...]:
        s = float(self.side(cube))
        return tuple(l + s / 2 for l in self.cube_lo(cube))

    def grid_slices(self, cube: DyadicCube) -> tuple[slice, ...]:
        per = self.cells >> cube.depth
        return tuple(slice(i * per, (i + 1) * per) for i in cube.index)

    def finest_cells(self, cube: DyadicCube) -> frozenset[tuple[int, ...]]:
        """Cells of the max_depth subdivision covering ``cube``."""
        shift = self.max_depth - cube.depth
        if shift < 0:
            raise DomainError("cube is below max_depth")
        per = 1 << shift
        ranges = [range(i * per, (i + 1) * per) for i in cube.index]
        return frozenset(itertools.product(*ranges))

    def finest_cell_measure(self) -> Fraction:
        return (self.root_side / (1 << self.max_depth)) ** self.ndim

    def iter_cubes(self, min_depth: int = 0, max_depth: Optional[int] = None) -> Iterator[DyadicCube]:
        top = self.max_depth if max_depth is None else max_depth
        for d in range(min_depth, top + 1):
            for idx in itertools.product(range(1 << d), repeat=self.ndim):
                yield DyadicCube(d, idx)


def local_average(f: GridFunction, cube: DyadicCube, p: float, lattice: DyadicLattice) -> float:
    """(|Q|^-1 integral over Q of |f|^p)^(1/p) via the grid's midpoint rule."""
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    block = f.values[lattice.grid_slices(cube)]
    return float(np.mean(np.abs(block) ** p)) ** (1.0 / p)


def stopping_cubes(
    f1: GridFunction,
    f2: GridFunction,
    h: GridFunction,
    exponents: tuple[float, float, float],
    lattice: DyadicLattice,
    root: Optional[DyadicCube] = None,
    C0: float = 1.5,
) -> list[DyadicCube]:
    """Maximal proper subcubes of ``root`` where some local average jumps.

    A cube Q is selected when <f_i>_{Q,r_i} > C0 <f_i>_{root,r_i} for some
    i or the same holds for h with exponent t; inequalities are strict, so
    ties are not selected.  Selected cubes' descendants are not examined.
    """
    same_geometry(f1, f2, h)
    root = root or lattice.root()
    r1, r2, t = exponents
    fns = ((f1, r1), (f2, r2), (h, t))
    base = [local_average(g, root, p, lattice) for g, p in fns]
    c0 = float(C0)

    def hits(cube: DyadicCube) -> bool:
        return any(
            local_average(g, cube, p, lattice) > c0 * b for (g, p), b in zip(fns, base)
        )

    selected: list[DyadicCube] = []

    def descend(cube: DyadicCube) -> None:
        if cube.depth >= lattice.max_depth:
            return
        for child in cube.children():
            if hits(child):
                selected.append(child)
            else:
                descend(child)

    descend(root)
    return selected


def choose_C0(
    f1: GridFunction,
    f2: GridFunction,
    h: GridFunction,
    exponents: tuple[float, float, float],
    lattice: DyadicLattice,
    root: Optional[DyadicCube] = None,
) -> tuple[Fraction, list[DyadicCube]]:
    """Smallest stopping constant from the fixed geometric schedule.

    Returns the first candidate whose stopping cubes cover strictly less
    than half of the root, together with those cubes.
    """
    root = root or lattice.root()
    half = lattice.measure(root) / 2
    for c0 in C0_CANDIDATES:
        cubes = stopping_cubes(f1, f2, h, exponents, lattice, root, float(c0))
        covered = sum((lattice.measure(q) for q in cubes), Fraction(0))
        if covered < half:
            return c0, cubes
    raise DomainError("no stopping constant in the schedule controlled the root")


@dataclass
class SparseNode:
    cube: DyadicCube
    C0: Fraction
    witness: frozenset[tuple[int, ...]]  # finest-level cells of the F-set


@dataclass
class SparseFamily:
    """A sparse family with exact witness sets and sparsity parameter."""

    nodes: list[SparseNode]
    eta: Fraction = Fraction(1, 2)

    @property
    def cubes(self) -> list[DyadicCube]:
        return [n.cube for n in self.nodes]


def build_sparse_family(
    f1: GridFunction,
    f2: GridFunction,
    h: GridFunction,
    lattice: DyadicLattice,
    exponents: tuple[float, float, float],
) -> SparseFamily:
    """Stopping-time recursion producing a 1/2-sparse family.

    Each node keeps the complement of its stopping cubes as witness; the
    recursion enters every stopping cube (in lexicographic corner order)
    until max_depth is reached.
    """
    nodes: list[SparseNode] = []

    def visit(root: DyadicCube) -> None:
        c0, cubes = choose_C0(f1, f2, h, exponents, lattice, root)
        cubes = sorted(cubes, key=lambda q: (q.depth, q.index))
        witness = set(lattice.finest_cells(root))
        for q in cubes:
            witness -= lattice.finest_cells(q)
        nodes.append(SparseNode(cube=root, C0=c0, witness=frozenset(witness)))
        for q in cubes:
            if q.depth < lattice.max_depth:
                visit(q)
            else:
                nodes.append(
                    SparseNode(cube=q, C0=c0, witness=lattice.finest_cells(q))
                )

    visit(lattice.root())
    return SparseFamily(nodes=nodes, eta=Fraction(1, 2))


def verify_sparsity(family: SparseFamily, lattice: DyadicLattice) -> bool:
    """Exact check: witnesses pairwise disjoint and |F_S| >= eta |S|."""
    cell_measure = lattice.finest_cell_measure()
    seen: set[tuple[int, ...]] = set()
    for node in family.nodes:
        if node.witness & seen:
            return False
        seen |= node.witness
        if len(node.witness) * cell_measure < family.eta * lattice.measure(node.cube):
            return False
    return True


def sparse_form(
    family: SparseFamily,
    f1: GridFunction,
    f2: GridFunction,
    h: GridFunction,
    exponents: tuple[float, float, float],
    lattice: DyadicLattice,
) -> float:
    """sum over S of |S| <f1>_{S,r1} <f2>_{S,r2} <h>_{S,t}."""
    r1, r2, t = exponents
    total = 0.0
    for node in family.nodes:
        q = node.cube
        total += (
            float(lattice.measure(q))
            * local_average(f1, q, r1, lattice)
            * local_average(f2, q, r2, lattice)
            * local_average(h, q, t, lattice)
        )
    return total


@dataclass
class CZDecomposition:
    """f = good + sum_k bad_k with bad parts grouped by cube depth."""

    good: GridFunction
    bad_by_depth: dict[int, GridFunction]
    cubes: list[DyadicCube]
    threshold: float

    def bad_total(self) -> np.ndarray:
        out = np.zeros_like(self.good.values)
        for part in self.bad_by_depth.values():
            out += part.values
        return out


def cz_decompose(
    f: GridFunction,
    lattice: DyadicLattice,
    r: float,
    C0: float,
    root: Optional[DyadicCube] = None,
) -> CZDecomposition:
    """Calderon-Zygmund splitting at height 2 C0 <f>_{root,r}.

    Selects maximal subcubes P with <f>_{P,r} above the threshold, sets
    b = sum_P (f - <f>_P) chi_P grouped by depth, and g = f - b.
    """
    root = root or lattice.root()
    base = local_average(f, root, r, lattice)
    threshold = 2.0 * float(C0) * base
    selected: list[DyadicCube] = []

    def descend(cube: DyadicCube) -> None:
        if cube.depth >= lattice.max_depth:
            return
        for child in cube.children():
            if local_average(f, child, r, lattice) > threshold:
                selected.append(child)
            else:
                descend(child)

    descend(root)
    good = f.values.copy()
    bad_by_depth: dict[int, np.ndarray] = {}
    for cube in selected:
        sl = lattice.grid_slices(cube)
        mean = float(np.mean(f.values[sl]))
        part = bad_by_depth.setdefault(cube.depth, np.zeros_like(f.values))
        part[sl] = f.values[sl] - mean
        # subtracting the stored bad part keeps f = good + bad exact in
        # floating point, cell by cell
        good[sl] = f.values[sl] - part[sl]
    return CZDecomposition(
        good=f.like(good),
        bad_by_depth={d: f.like(v) for d, v in bad_by_depth.items()},
        cubes=selected,
        threshold=threshold,
    )


def family_to_csv(family: SparseFamily, lattice: DyadicLattice, path: str) -> None:
    """One row per node: depth, corner coords, witness and cube measures."""
    cell = lattice.finest_cell_measure()
    with open(path, "w") as fh:
        corner_cols = [f"corner{d}" for d in range(lattice.ndim)]
        fh.write(",".join(["depth"] + corner_cols + ["C0", "witness_measure", "cube_measure"]) + "\n")
        for node in family.nodes:
            lo = lattice.cube_lo(node.cube)
            row = [str(node.cube.depth)]
            row += [f"{x:.12g}" for x in lo]
            row.append(f"{float(node.C0):.12g}")
            row.append(f"{float(len(node.witness) * cell):.12g}")
            row.append(f"{float(lattice.measure(node.cube)):.12g}")
            fh.write(",".join(row) + "\n")
