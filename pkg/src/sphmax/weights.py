"""Weight classes: power-weight membership, numeric characteristics.

Characteristics are suprema over finite cube families of products of cube
averages.  For power weights in the plane, cube integrals of |x|^a use an
exact radial closed form with an inner cutoff (composite Simpson in the
angle); the cutoff and subgrid resolution shrink with the family's
refinement level, so non-integrable exponents reveal themselves as growth
of the scanned characteristic across levels while integrable ones
stabilize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .errors import DomainError, InvalidDimensionError
from .exponents import UNBOUNDED, LmoParameters, conjugate
from .grid import GridFunction


@dataclass(frozen=True)
class Cube:
    """Axis-aligned cube [lo_d, lo_d + side) per axis."""

    lo: tuple[float, ...]
    side: float

    @property
    def ndim(self) -> int:
        return len(self.lo)

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(l + self.side for l in self.lo)

    @property
    def measure(self) -> float:
        return self.side ** self.ndim

    def contains_origin(self) -> bool:
        return all(l < 0 < h for l, h in zip(self.lo, self.hi))

    def origin_distance(self) -> float:
        d2 = 0.0
        for l, h in zip(self.lo, self.hi):
            if l > 0:
                d2 += l * l
            elif h < 0:
                d2 += h * h
        return math.sqrt(d2)

    def corner_distance(self) -> float:
        return math.sqrt(
            sum(max(l * l, h * h) for l, h in zip(self.lo, self.hi))
        )

    @classmethod
    def centered(cls, half_side: float, n: int) -> "Cube":
        return cls(lo=(-half_side,) * n, side=2 * half_side)


def _boundary_radius(cube: Cube, direction: np.ndarray) -> np.ndarray:
    """Distance from the origin to the cube boundary along each direction."""
    t = np.full(direction.shape[0], np.inf)
    lo = np.array(cube.lo)
    hi = np.array(cube.hi)
    for d in range(cube.ndim):
        c = direction[:, d]
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = np.where(c > 0, hi[d] / c, np.where(c < 0, lo[d] / c, np.inf))
        t = np.minimum(t, cand)
    return t


def power_cube_integral(a: float, cube: Cube, level: int) -> float:
    """Integral over the cube of |x|^a with inner cutoff 4^-level.

    Origin-interior cubes use the exact radial closed form against an
    angular quadrature; other cubes use a midpoint subgrid whose
    resolution grows with the level.
    """
    n = cube.ndim
    if a == 0.0:
        return cube.measure
    eps = 4.0 ** (-level)
    if cube.contains_origin():
        if n == 2:
            m = 2048  # composite Simpson panels in the angle
            theta = np.linspace(0.0, 2.0 * np.pi, m + 1)
            direction = np.stack([np.cos(theta), np.sin(theta)], axis=1)
            coeffs = np.ones(m + 1)
            coeffs[1:-1:2] = 4.0
            coeffs[2:-1:2] = 2.0
            radial = _radial_primitive(a + 1, eps, _boundary_radius(cube, direction))
            return float(np.sum(coeffs * radial)) * (2.0 * np.pi / m) / 3.0
        if n == 3:
            from .spherical import sphere_quadrature

            quad = sphere_quadrature(3, 4096)
            radial = _radial_primitive(a + 2, eps, _boundary_radius(cube, quad.nodes))
            return float(np.sum(quad.weights * radial)) * 4.0 * np.pi
        raise InvalidDimensionError("power integrals support n = 2 or 3")
    m = min(16 << level, 2048 if n == 2 else 256)
    axes = [
        cube.lo[d] + cube.side * (np.arange(m) + 0.5) / m for d in range(n)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    r = np.sqrt(sum(x * x for x in mesh))
    vals = np.where(r >= eps, r, eps) ** a
    return float(np.mean(vals)) * cube.measure


def _radial_primitive(c: float, eps: float, upper: np.ndarray) -> np.ndarray:
    """Integral of r^c dr from eps to upper, elementwise."""
    upper = np.maximum(upper, eps)
    if abs(c + 1.0) < 1e-14:
        return np.log(upper / eps)
    return (upper ** (c + 1.0) - eps ** (c + 1.0)) / (c + 1.0)


@dataclass(frozen=True)
class PowerWeight:
    """w(x) = |x|^b."""

    b: float

    def cube_average(self, s: float, cube: Cube, level: int) -> float:
        if s == 0:
            return 1.0
        return power_cube_integral(self.b * s, cube, level) / cube.measure

    def cube_inf(self, cube: Cube) -> float:
        d = cube.origin_distance()
        if self.b >= 0:
            return d ** self.b if (d > 0 or self.b == 0) else 0.0
        return cube.corner_distance() ** self.b

    def pow(self, e: float) -> "PowerWeight":
        return PowerWeight(self.b * e)

    def times(self, other: "PowerWeight") -> "PowerWeight":
        return PowerWeight(self.b + other.b)


@dataclass(frozen=True)
class SampledWeight:
    """A weight given by grid samples; averages use cells inside the cube."""

    grid: GridFunction

    def _mask(self, cube: Cube) -> tuple:
        masks = []
        for d in range(self.grid.ndim):
            c = self.grid.axis_centers(d)
            masks.append((c >= cube.lo[d]) & (c < cube.hi[d]))
        mesh = np.meshgrid(*masks, indexing="ij")
        mask = np.logical_and.reduce(mesh)
        if not mask.any():
            raise DomainError("cube contains no grid cells")
        return mask

    def cube_average(self, s: float, cube: Cube, level: int) -> float:
        vals = self.grid.values[self._mask(cube)]
        return float(np.mean(vals ** s))

    def cube_inf(self, cube: Cube) -> float:
        return float(np.min(self.grid.values[self._mask(cube)]))


Weight = Union[PowerWeight, SampledWeight]


@dataclass(frozen=True)
class CubeFamily:
    """A finite cube family with a refinement level.

    The level controls both which cubes are present (for the nested
    centered family: [-2^k, 2^k]^n for |k| <= level) and the accuracy of
    the cube integrals (inner cutoff 4^-level, subgrid resolution).
    """

    kind: str
    params: dict = field(default_factory=dict)
    level: int = 2

    def refined(self, level: Optional[int] = None) -> "CubeFamily":
        return replace(self, level=self.level + 1 if level is None else level)

    def cubes(self) -> list[Cube]:
        if self.kind == "nested_centered":
            n = int(self.params["n"])
            return [
                Cube.centered(2.0 ** k, n) for k in range(-self.level, self.level + 1)
            ]
        if self.kind == "dyadic_descendants":
            root: Cube = self.params["root"]
            depth = int(self.params.get("depth", 3))
            out = [root]
            current = [root]
            for _ in range(depth):
                nxt = []
                for q in current:
                    half = q.side / 2.0
                    for corner in np.ndindex(*(2,) * q.ndim):
                        lo = tuple(l + c * half for l, c in zip(q.lo, corner))
                        nxt.append(Cube(lo=lo, side=half))
                out.extend(nxt)
                current = nxt
            return out
        if self.kind == "translated":
            side = float(self.params.get("side", 1.0))
            return [Cube(lo=tuple(o), side=side) for o in self.params["offsets"]]
        raise DomainError(f"unknown cube family kind {self.kind!r}")


def nested_centered(n: int, level: int = 2) -> CubeFamily:
    return CubeFamily("nested_centered", {"n": n}, level=level)


def dyadic_descendants(root: Cube, depth: int, level: int = 2) -> CubeFamily:
    return CubeFamily("dyadic_descendants", {"root": root, "depth": depth}, level=level)


def translated(offsets: Sequence[Sequence[float]], side: float = 1.0, level: int = 2) -> CubeFamily:
    return CubeFamily(
        "translated", {"offsets": tuple(map(tuple, offsets)), "side": side}, level=level
    )


def ap_power_membership(b, p, n: int) -> bool:
    """Exact membership of |x|^b in the Muckenhoupt class with exponent p.

    For p > 1 the condition is -n < b < n(p-1); for p = 1 it is
    -n < b <= 0.  p < 1 is rejected.
    """
    b, p = Fraction(b), Fraction(p)
    if not isinstance(n, int) or n < 1:
        raise InvalidDimensionError(f"need integer n >= 1, got {n!r}")
    if p < 1:
        raise DomainError("Muckenhoupt classes need p >= 1")
    if p == 1:
        return -n < b <= 0
    return -n < b < n * (p - 1)


def ap_characteristic_numeric(w: Weight, p: float, family: CubeFamily) -> float:
    """max over the family of <w>_Q <w^(1/(1-p))>_Q^(p-1)."""
    if p <= 1:
        raise DomainError("numeric characteristic requires p > 1")
    pc = p / (p - 1.0)
    best = 0.0
    for cube in family.cubes():
        val = w.cube_average(1.0, cube, family.level) * w.cube_average(
            1.0 - pc, cube, family.level
        ) ** (p - 1.0)
        best = max(best, val)
    return best


def rh_characteristic_numeric(w: Weight, s: float, family: CubeFamily) -> float:
    """max over the family of <w^s>_Q^(1/s) / <w>_Q."""
    if s <= 1:
        raise DomainError("reverse Holder exponent must exceed 1")
    best = 0.0
    for cube in family.cubes():
        num = w.cube_average(s, cube, family.level) ** (1.0 / s)
        den = w.cube_average(1.0, cube, family.level)
        best = max(best, num / den)
    return best


def composite_weight(ws: Sequence[Weight], ps: Sequence[float]) -> Weight:
    """w = prod_j w_j^(p/p_j) with 1/p = sum_j 1/p_j."""
    p = 1.0 / sum(1.0 / float(pj) for pj in ps)
    if all(isinstance(w, PowerWeight) for w in ws):
        return PowerWeight(sum(w.b * p / float(pj) for w, pj in zip(ws, ps)))
    grids = []
    for w, pj in zip(ws, ps):
        if isinstance(w, PowerWeight):
            raise DomainError("cannot mix power and sampled weights")
        grids.append(w.grid.values ** (p / float(pj)))
    base = ws[0].grid
    return SampledWeight(base.like(np.prod(grids, axis=0)))


def lerner_characteristic(ws: Sequence[Weight], ps: Sequence[float], family: CubeFamily) -> float:
    """Vector-class characteristic: sup <w>_Q prod_j <w_j^(1-p_j')>_Q^(p/p_j').

    A component with p_j = 1 contributes (inf_Q w_j)^(-p) instead.
    """
    ps = [float(pj) for pj in ps]
    if any(pj < 1 for pj in ps):
        raise DomainError("need p_j >= 1")
    p = 1.0 / sum(1.0 / pj for pj in ps)
    w = composite_weight(ws, ps)
    best = 0.0
    for cube in family.cubes():
        val = w.cube_average(1.0, cube, family.level)
        for wj, pj in zip(ws, ps):
            if pj == 1.0:
                inf = wj.cube_inf(cube)
                if inf == 0.0:
                    return math.inf
                val *= inf ** (-p)
            else:
                pjc = pj / (pj - 1.0)
                val *= wj.cube_average(1.0 - pjc, cube, family.level) ** (p / pjc)
        best = max(best, val)
    return best


def lmo_characteristic(
    ws: Sequence[Weight], params: LmoParameters, family: CubeFamily
) -> float:
    """Three-exponent characteristic of the weight pair.

    sup over cubes of <w^(r3'/(r3'-p))>^(1/p - 1/r3') times, for i = 1, 2,
    <w_i^(r_i/(r_i-p_i))>^(1/r_i - 1/p_i); the conventions r3 = 1 and
    p_i = r_i replace the respective factor by <w>^(1/p) and
    esssup_Q w_i^(-1/p_i).
    """
    p = float(params.p)
    pis = (float(params.p1), float(params.p2))
    ris = (float(params.r1), float(params.r2))
    w = composite_weight(ws, pis)
    r3 = float(params.r3)
    r3c = conjugate(params.r3)
    best = 0.0
    for cube in family.cubes():
        if r3 == 1.0:
            val = w.cube_average(1.0, cube, family.level) ** (1.0 / p)
        else:
            r3cf = float(r3c)
            val = w.cube_average(r3cf / (r3cf - p), cube, family.level) ** (
                1.0 / p - 1.0 / r3cf
            )
        for wi, pi, ri in zip(ws, pis, ris):
            if pi == ri:
                inf = wi.cube_inf(cube)
                if inf == 0.0:
                    return math.inf
                val *= inf ** (-1.0 / pi)
            else:
                val *= wi.cube_average(ri / (ri - pi), cube, family.level) ** (
                    1.0 / ri - 1.0 / pi
                )
        best = max(best, val)
    return best


def characteristic_scan(fn, family: CubeFamily, levels: Sequence[int]) -> list[float]:
    """Evaluate a characteristic at several refinement levels."""
    return [fn(family.refined(level)) for level in levels]


def scan_is_stable(values: Sequence[float], tol: float = 0.05) -> bool:
    """True when the final refinement changed the value by < tol relatively."""
    if len(values) < 2:
        raise DomainError("need at least two refinement levels")
    a, b = values[-2], values[-1]
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return abs(b - a) <= tol * max(abs(a), abs(b), 1e-300)


@dataclass(frozen=True)
class WeightRelationReport:
    memberships: tuple[bool, bool, bool]
    scan: tuple[float, ...]
    stable: bool

    @property
    def agree(self) -> bool:
        return all(self.memberships) == self.stable


def weightrelation_check(
    exponents_b: tuple[float, float],
    params: LmoParameters,
    n: int,
    levels: Sequence[int] = (2, 3, 4, 5, 6, 7, 8),
) -> WeightRelationReport:
    """Cross-check class membership against the numeric characteristic.

    Membership side: |x|^(b_i theta_i / p_i) lies in the Muckenhoupt class
    with exponent theta_i (1-r)/r for i = 1, 2, and the composite power
    with exponent delta_3 (1-r)/r.  Numeric side: the scanned
    characteristic stabilizes exactly when all memberships hold.
    """
    b1, b2 = Fraction(exponents_b[0]), Fraction(exponents_b[1])
    lam = (1 - params.r) / params.r
    if params.delta3 is UNBOUNDED:
        raise DomainError("delta3 must be finite for the relation check")
    mems = (
        ap_power_membership(b1 * params.theta1 / params.p1, lam * params.theta1, n),
        ap_power_membership(b2 * params.theta2 / params.p2, lam * params.theta2, n),
        ap_power_membership(
            (b1 * params.p / params.p1 + b2 * params.p / params.p2)
            * params.delta3
            / params.p,
            lam * params.delta3,
            n,
        ),
    )
    ws = (PowerWeight(float(b1)), PowerWeight(float(b2)))
    family = nested_centered(n)
    scan = characteristic_scan(
        lambda fam: lmo_characteristic(ws, params, fam), family, levels
    )
    return WeightRelationReport(
        memberships=mems, scan=tuple(scan), stable=scan_is_stable(scan)
    )


def scan_to_csv(levels: Sequence[int], values: Sequence[float], path: str) -> None:
    """CSV rows: refinement level, characteristic value, running max."""
    with open(path, "w") as fh:
        fh.write("level,value,running_max\n")
        running = -math.inf
        for lvl, val in zip(levels, values):
            running = max(running, val)
            fh.write(f"{lvl},{val:.12g},{running:.12g}\n")
