"""Spherical averages and maximal operators on grid functions.

Averages over spheres are quadrature sums of multilinearly interpolated
samples; the inner loops run through the kernels package (compiled core or
numpy fallback).  Suprema over radius families are elementwise maxima,
optionally evaluated with worker threads; the reduction is an associative
max, so results are independent of the thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import kernels
from .dyadic import DyadicCube, DyadicLattice
from .errors import DomainError, InvalidDimensionError, ResolutionError
from .grid import Box, GridFunction, same_geometry


@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes on the unit sphere with normalized weights."""

    nodes: np.ndarray  # (K, n)
    weights: np.ndarray  # (K,)


def sphere_quadrature(n: int, resolution: int = 512) -> SphereQuadrature:
    """Equal-angle circle rule (n = 2) or latitude-longitude rule (n = 3).

    ``resolution`` is the approximate node count; weights sum to one.
    """
    if resolution < 4:
        raise DomainError("resolution must be at least 4")
    if n == 2:
        theta = 2.0 * np.pi * np.arange(resolution) / resolution
        nodes = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        weights = np.full(resolution, 1.0 / resolution)
        return SphereQuadrature(nodes, weights)
    if n == 3:
        m = max(2, round(math.sqrt(resolution / 2)))
        lat = (np.arange(m) + 0.5) * np.pi / m
        lon = 2.0 * np.pi * np.arange(2 * m) / (2 * m)
        sin_lat = np.sin(lat)
        nodes = []
        weights = []
        for i in range(m):
            for j in range(2 * m):
                nodes.append(
                    (
                        sin_lat[i] * np.cos(lon[j]),
                        sin_lat[i] * np.sin(lon[j]),
                        np.cos(lat[i]),
                    )
                )
                weights.append(sin_lat[i])
        weights = np.array(weights)
        return SphereQuadrature(np.array(nodes), weights / weights.sum())
    raise InvalidDimensionError("sphere quadrature supports n = 2 or 3")


@dataclass(frozen=True)
class ProductSphereQuadrature:
    """Quadrature on the unit sphere of a product space R^n x R^n.

    Nodes are pairs (y, z) with |y|^2 + |z|^2 = 1, parametrized by a polar
    angle and one angle per factor; weights are normalized.
    """

    y_nodes: np.ndarray  # (K, n)
    z_nodes: np.ndarray  # (K, n)
    weights: np.ndarray  # (K,)


def product_sphere_quadrature(n: int, resolution: int = 16) -> ProductSphereQuadrature:
    """Midpoint rule in the polar angle times equal-angle circle rules."""
    if n != 2:
        raise InvalidDimensionError("the product-sphere rule is implemented for n = 2")
    m_alpha = max(4, resolution // 2)
    k_circ = max(8, resolution)
    alpha = (np.arange(m_alpha) + 0.5) * (np.pi / 2) / m_alpha
    w_alpha = np.cos(alpha) * np.sin(alpha)
    theta = 2.0 * np.pi * np.arange(k_circ) / k_circ
    phi = 2.0 * np.pi * np.arange(k_circ) / k_circ
    circ_t = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    circ_p = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    ys, zs, ws = [], [], []
    for i in range(m_alpha):
        for a in range(k_circ):
            for b in range(k_circ):
                ys.append(np.cos(alpha[i]) * circ_t[a])
                zs.append(np.sin(alpha[i]) * circ_p[b])
                ws.append(w_alpha[i])
    ws = np.array(ws)
    return ProductSphereQuadrature(np.array(ys), np.array(zs), ws / ws.sum())


@dataclass(frozen=True)
class RadiusSet:
    """A finite family of radii: dyadic, geometric, interval, or explicit."""

    kind: str
    params: dict = field(default_factory=dict)

    def radii(self) -> np.ndarray:
        if self.kind == "dyadic":
            j0, j1 = int(self.params["j_min"]), int(self.params["j_max"])
            return np.exp2(np.arange(j0, j1 + 1, dtype=np.float64))
        if self.kind == "geometric":
            j0, j1 = int(self.params["j_min"]), int(self.params["j_max"])
            steps = int(self.params.get("steps_per_octave", 16))
            k = np.arange((j1 - j0) * steps + 1, dtype=np.float64)
            return np.exp2(j0 + k / steps)
        if self.kind == "interval":
            a, b = float(self.params["a"]), float(self.params["b"])
            steps = int(self.params.get("steps", 16))
            if not 0 < a < b:
                raise DomainError("need 0 < a < b")
            k = np.arange(steps + 1, dtype=np.float64)
            return a * (b / a) ** (k / steps)
        if self.kind == "explicit":
            vals = np.asarray(self.params["values"], dtype=np.float64)
            if np.any(vals <= 0):
                raise DomainError("radii must be positive")
            return vals
        raise DomainError(f"unknown radius set kind {self.kind!r}")


def dyadic_radii(j_min: int, j_max: int) -> RadiusSet:
    return RadiusSet("dyadic", {"j_min": j_min, "j_max": j_max})


def geometric_radii(j_min: int, j_max: int, steps_per_octave: int = 16) -> RadiusSet:
    return RadiusSet(
        "geometric", {"j_min": j_min, "j_max": j_max, "steps_per_octave": steps_per_octave}
    )


def interval_radii(a: float, b: float, steps: int = 16) -> RadiusSet:
    return RadiusSet("interval", {"a": a, "b": b, "steps": steps})


def explicit_radii(values: Sequence[float]) -> RadiusSet:
    return RadiusSet("explicit", {"values": tuple(float(v) for v in values)})


def truncate_radii(radii: np.ndarray, f: GridFunction) -> np.ndarray:
    """Keep radii in [4h, diam(box)]: resolvable and not trivially zero."""
    h = max(f.spacing)
    kept = radii[(radii >= 4.0 * h) & (radii <= f.box.diameter)]
    if kept.size == 0:
        raise ResolutionError(
            f"no radius in [{4 * h:.6g}, {f.box.diameter:.6g}] survives truncation"
        )
    return kept


def default_radius_set(kind: str, f: GridFunction, steps_per_octave: int = 16) -> RadiusSet:
    """Dyadic or geometric set spanning [4h, diam(box)]."""
    j0 = math.ceil(math.log2(4.0 * max(f.spacing)))
    j1 = math.floor(math.log2(f.box.diameter))
    if j1 < j0:
        raise ResolutionError("grid too coarse for any dyadic radius")
    if kind == "lacunary":
        return dyadic_radii(j0, j1)
    if kind == "full":
        return geometric_radii(j0, j1, steps_per_octave)
    raise DomainError(f"unknown kind {kind!r}")


def _offsets(f: GridFunction, r: float, nodes: np.ndarray) -> np.ndarray:
    h = np.array(f.spacing)
    return (r * nodes) / h


def spherical_average(f: GridFunction, r: float, quad: SphereQuadrature) -> GridFunction:
    """A_r f: quadrature average of f over the radius-r sphere around x."""
    if r <= 0:
        raise DomainError("radius must be positive")
    out = kernels.shifted_sum(f.values, _offsets(f, r, quad.nodes), quad.weights)
    return f.like(out)


def average_at_points(
    f: GridFunction, points: np.ndarray, r: float, quad: SphereQuadrature
) -> np.ndarray:
    """A_r f evaluated at arbitrary physical points by interpolation."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    total = np.zeros(pts.shape[0])
    for node, w in zip(quad.nodes, quad.weights):
        idx = f.index_coords(pts - r * node)
        total += w * kernels.interp_at_points(f.values, idx)
    return total


def _sup_over_radii(
    per_radius: Callable[[float], np.ndarray], radii: np.ndarray, threads: int = 1
) -> np.ndarray:
    """Elementwise max of per-radius fields, optionally using threads.

    Radii are split into contiguous chunks; each chunk reduces locally and
    the partial maxima are combined in fixed chunk order, so the result is
    identical for any thread count.
    """

    def reduce_chunk(chunk: np.ndarray) -> Optional[np.ndarray]:
        acc = None
        for r in chunk:
            field_r = per_radius(float(r))
            acc = field_r if acc is None else np.maximum(acc, field_r)
        return acc

    threads = max(1, int(threads))
    if threads == 1 or len(radii) <= 1:
        return reduce_chunk(radii)
    chunks = np.array_split(radii, min(threads, len(radii)))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        partials = list(pool.map(reduce_chunk, chunks))
    acc = partials[0]
    for part in partials[1:]:
        if part is not None:
            acc = np.maximum(acc, part)
    return acc


def linear_maximal(
    f: GridFunction,
    quad: SphereQuadrature,
    radii: Optional[RadiusSet] = None,
    kind: str = "full",
    threads: int = 1,
) -> GridFunction:
    """sup over the radius family of A_r |f|."""
    rset = radii or default_radius_set(kind, f)
    rs = truncate_radii(rset.radii(), f)
    absf = np.abs(f.values)

    def per_radius(r: float) -> np.ndarray:
        return kernels.shifted_sum(absf, _offsets(f, r, quad.nodes), quad.weights)

    return f.like(_sup_over_radii(per_radius, rs, threads))


def maximal(
    f1: GridFunction,
    f2: GridFunction,
    quad: SphereQuadrature,
    radii: Optional[RadiusSet] = None,
    kind: str = "lacunary",
    threads: int = 1,
) -> GridFunction:
    """Product-type maximal operator: sup_r A_r|f1| * A_r|f2|.

    ``kind`` picks the default radius family: "lacunary" (dyadic radii),
    "full" (geometric sampling), or "local" (one octave, [1, 2]).
    """
    same_geometry(f1, f2)
    if radii is None:
        radii = interval_radii(1.0, 2.0, 16) if kind == "local" else default_radius_set(kind, f1)
    rs = truncate_radii(radii.radii(), f1)
    a1, a2 = np.abs(f1.values), np.abs(f2.values)

    def per_radius(r: float) -> np.ndarray:
        off = _offsets(f1, r, quad.nodes)
        v1 = kernels.shifted_sum(a1, off, quad.weights)
        v2 = kernels.shifted_sum(a2, off, quad.weights)
        return v1 * v2

    return f1.like(_sup_over_radii(per_radius, rs, threads))


def maximal_at_points(
    f1: GridFunction,
    f2: GridFunction,
    points: np.ndarray,
    quad: SphereQuadrature,
    radii: RadiusSet,
) -> np.ndarray:
    """Pointwise sup_r A_r|f1| * A_r|f2| at arbitrary physical points."""
    same_geometry(f1, f2)
    rs = truncate_radii(radii.radii(), f1)
    g1, g2 = f1.like(np.abs(f1.values)), f2.like(np.abs(f2.values))
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    best = np.zeros(pts.shape[0])
    for r in rs:
        v = average_at_points(g1, pts, float(r), quad) * average_at_points(
            g2, pts, float(r), quad
        )
        best = np.maximum(best, v)
    return best


def geba_maximal(
    f1: GridFunction,
    f2: GridFunction,
    quad: ProductSphereQuadrature,
    radii: RadiusSet,
    threads: int = 1,
) -> GridFunction:
    """sup_r of the product-sphere average of |f1(x - r y) f2(x - r z)|."""
    same_geometry(f1, f2)
    rs = truncate_radii(radii.radii(), f1)
    a1, a2 = np.abs(f1.values), np.abs(f2.values)

    def per_radius(r: float) -> np.ndarray:
        return kernels.shifted_product_sum(
            a1,
            a2,
            _offsets(f1, r, quad.y_nodes),
            _offsets(f2, r, quad.z_nodes),
            quad.weights,
        )

    return f1.like(_sup_over_radii(per_radius, rs, threads))


def _central_third_mask(f: GridFunction, cube: DyadicCube, lattice: DyadicLattice) -> np.ndarray:
    side = float(lattice.side(cube))
    center = lattice.cube_center(cube)
    mesh = f.center_mesh()
    mask = np.ones_like(f.values, dtype=bool)
    for m, c in zip(mesh, center):
        mask &= np.abs(m - c) < side / 6.0
    return mask


def _cube_mask(f: GridFunction, cube: DyadicCube, lattice: DyadicLattice) -> np.ndarray:
    mask = np.zeros_like(f.values, dtype=bool)
    mask[lattice.grid_slices(cube)] = True
    return mask


def localized_average_AQ(
    f: GridFunction, cube: DyadicCube, lattice: DyadicLattice, quad: SphereQuadrature
) -> GridFunction:
    """Average at radius side/4 of f restricted to the central third of Q.

    The output is supported in Q: values outside the cube are zeroed.
    """
    side = float(lattice.side(cube))
    r = side / 4.0
    if r < 4.0 * max(f.spacing):
        raise ResolutionError(f"cube radius {r:.6g} below 4 grid cells")
    restricted = np.where(_central_third_mask(f, cube, lattice), f.values, 0.0)
    out = kernels.shifted_sum(restricted, _offsets(f, r, quad.nodes), quad.weights)
    out[~_cube_mask(f, cube, lattice)] = 0.0
    return f.like(out)


def local_maximal_MQ(
    f1: GridFunction,
    f2: GridFunction,
    cube: DyadicCube,
    lattice: DyadicLattice,
    quad: SphereQuadrature,
    steps: int = 16,
    threads: int = 1,
) -> GridFunction:
    """sup over radii in [side/8, side/4] of the localized product average."""
    same_geometry(f1, f2)
    side = float(lattice.side(cube))
    lo, hi = side / 8.0, side / 4.0
    if lo < 4.0 * max(f1.spacing):
        raise ResolutionError(f"cube radius {lo:.6g} below 4 grid cells")
    third = _central_third_mask(f1, cube, lattice)
    g1 = np.where(third, np.abs(f1.values), 0.0)
    g2 = np.where(third, np.abs(f2.values), 0.0)
    rs = interval_radii(lo, hi, steps).radii()

    def per_radius(r: float) -> np.ndarray:
        off = _offsets(f1, r, quad.nodes)
        return kernels.shifted_sum(g1, off, quad.weights) * kernels.shifted_sum(
            g2, off, quad.weights
        )

    out = _sup_over_radii(per_radius, rs, threads)
    out[~_cube_mask(f1, cube, lattice)] = 0.0
    return f1.like(out)


def _block_means(values: np.ndarray, depth: int) -> np.ndarray:
    """Mean over each cube of the depth-level dyadic partition."""
    nb = 1 << depth
    per = values.shape[0] // nb
    v = values
    for axis in range(values.ndim):
        shape = v.shape[:axis] + (nb, per) + v.shape[axis + 1 :]
        v = v.reshape(shape).mean(axis=axis + 1)
    return v


def _upsample(block: np.ndarray, per: int) -> np.ndarray:
    out = block
    for axis in range(block.ndim):
        out = np.repeat(out, per, axis=axis)
    return out


def hl_maximal(f: GridFunction, lattice: DyadicLattice) -> GridFunction:
    """Dyadic Hardy-Littlewood maximal function over the lattice's cubes."""
    absf = np.abs(f.values)
    out = np.full_like(absf, float(np.mean(absf)))
    for depth in range(1, lattice.max_depth + 1):
        per = lattice.cells >> depth
        out = np.maximum(out, _upsample(_block_means(absf, depth), per))
    return f.like(out)


def bilinear_hl(f1: GridFunction, f2: GridFunction, lattice: DyadicLattice) -> GridFunction:
    """sup over dyadic cubes containing x of <|f1|>_Q <|f2|>_Q."""
    same_geometry(f1, f2)
    a1, a2 = np.abs(f1.values), np.abs(f2.values)
    out = np.full_like(a1, float(np.mean(a1)) * float(np.mean(a2)))
    for depth in range(1, lattice.max_depth + 1):
        per = lattice.cells >> depth
        prod = _block_means(a1, depth) * _block_means(a2, depth)
        out = np.maximum(out, _upsample(prod, per))
    return f1.like(out)
