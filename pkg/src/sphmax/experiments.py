"""Numerical experiments: scaling runs, probes, and consistency reports.

The Knapp-type scaling runs use the rotational symmetry of their test
configurations: all three functions are radial indicators (or, in the
box cases, the pairing region is a small box), so the operator is
evaluated analytically on sphere quadrature nodes instead of on a global
grid.  This keeps the thin-feature regime resolvable at small delta
within a fixed budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import exponents as expo
from .dyadic import DyadicLattice, build_sparse_family, sparse_form
from .errors import DomainError, InvalidDimensionError, ResolutionError
from .weights import ap_power_membership
from .grid import Box, GridFunction, annulus, ball, log_weight, pairing, power, sample, weighted_lp_norm
from .spherical import (
    RadiusSet,
    SphereQuadrature,
    dyadic_radii,
    explicit_radii,
    geba_maximal,
    geometric_radii,
    hl_maximal,
    interval_radii,
    linear_maximal,
    maximal,
    maximal_at_points,
    product_sphere_quadrature,
    sphere_quadrature,
)

Membership = Callable[[np.ndarray], np.ndarray]  # (m, n) points -> bool mask


def _ball_member(rho: float, center: Optional[np.ndarray] = None) -> Membership:
    def member(pts: np.ndarray) -> np.ndarray:
        q = pts if center is None else pts - center
        return np.sqrt(np.sum(q * q, axis=1)) < rho

    return member


def _annulus_member(width: float, center_radius: float = 1.0) -> Membership:
    def member(pts: np.ndarray) -> np.ndarray:
        r = np.sqrt(np.sum(pts * pts, axis=1))
        return np.abs(r - center_radius) < width

    return member


def _box_member(bounds: Sequence[tuple]) -> Membership:
    def member(pts: np.ndarray) -> np.ndarray:
        ok = np.ones(pts.shape[0], dtype=bool)
        for d, (lo, hi) in enumerate(bounds):
            ok &= (pts[:, d] >= lo) & (pts[:, d] < hi)
        return ok

    return member


def _analytic_average(member: Membership, x: np.ndarray, t: float, quad: SphereQuadrature) -> float:
    """Exact-membership quadrature of the sphere average of an indicator."""
    pts = x[None, :] - t * quad.nodes
    return float(np.sum(quad.weights * member(pts)))


def _sup_product(
    m1: Membership,
    m2: Membership,
    x: np.ndarray,
    radii: np.ndarray,
    quad: SphereQuadrature,
) -> float:
    best = 0.0
    for t in radii:
        v = _analytic_average(m1, x, float(t), quad) * _analytic_average(m2, x, float(t), quad)
        best = max(best, v)
    return best


@dataclass
class KnappCase:
    """Test configuration of a scaling run at one delta."""

    f1: Membership
    f2: Membership
    h_radial: Optional[tuple[float, float]]  # radial support [a, b) of h
    h_box: Optional[Sequence[tuple]]  # box support of h
    measures: tuple[float, float, float]  # |supp f1|, |supp f2|, |supp h|
    radii: np.ndarray


def _ball_measure(rho: float, n: int) -> float:
    return math.pi * rho**2 if n == 2 else 4.0 / 3.0 * math.pi * rho**3


def _annulus_measure(width: float, center_radius: float, n: int) -> float:
    lo, hi = center_radius - width, center_radius + width
    if n == 2:
        return math.pi * (hi**2 - lo**2)
    return 4.0 / 3.0 * math.pi * (hi**3 - lo**3)


_KNAPP_C = 0.25  # shrink factor of the pairing region


def _knapp_case(case: str, n: int, delta: float) -> KnappCase:
    c = _KNAPP_C
    dyadic = np.exp2(np.arange(-4, 3, dtype=np.float64))
    if case == "lac_annulus_ball":
        return KnappCase(
            f1=_annulus_member(delta),
            f2=_annulus_member(delta),
            h_radial=(0.0, c * delta),
            h_box=None,
            measures=(
                _annulus_measure(delta, 1.0, n),
                _annulus_measure(delta, 1.0, n),
                _ball_measure(c * delta, n),
            ),
            radii=dyadic,
        )
    if case == "lac_ball_annulus":
        return KnappCase(
            f1=_ball_member(delta),
            f2=_ball_member(delta),
            h_radial=(1.0 - c * delta, 1.0 + c * delta),
            h_box=None,
            measures=(
                _ball_measure(delta, n),
                _ball_measure(delta, n),
                _annulus_measure(c * delta, 1.0, n),
            ),
            radii=dyadic,
        )
    if case == "lac_mixed":
        return KnappCase(
            f1=_ball_member(delta),
            f2=_ball_member(2.0),
            h_radial=(1.0 - c * delta, 1.0 + c * delta),
            h_box=None,
            measures=(
                _ball_measure(delta, n),
                _ball_measure(2.0, n),
                _annulus_measure(c * delta, 1.0, n),
            ),
            radii=dyadic,
        )
    if case == "full_boxes":
        s = math.sqrt(delta)
        r1_bounds = [(-s, s)] * (n - 1) + [(-delta, delta)]
        r2_bounds = [(-s, s)] * (n - 1) + [(4.0 / 3.0, 5.0 / 3.0)]
        r1_measure = (2 * s) ** (n - 1) * 2 * delta
        r2_measure = (2 * s) ** (n - 1) / 3.0
        return KnappCase(
            f1=_box_member(r1_bounds),
            f2=_box_member(r1_bounds),
            h_radial=None,
            h_box=r2_bounds,
            measures=(r1_measure, r1_measure, r2_measure),
            radii=np.exp2(np.linspace(0.0, 1.0, 33)),  # t in [1, 2]
        )
    if case == "full_one_box":
        s = math.sqrt(delta)
        r1_bounds = [(-s, s)] * (n - 1) + [(-delta, delta)]
        r2_bounds = [(-s, s)] * (n - 1) + [(4.0 / 3.0, 5.0 / 3.0)]
        center = np.zeros(n)
        center[-1] = 4.0 / 3.0
        return KnappCase(
            f1=_box_member(r1_bounds),
            f2=_ball_member(2.0, center=center),
            h_radial=None,
            h_box=r2_bounds,
            measures=(
                (2 * s) ** (n - 1) * 2 * delta,
                _ball_measure(2.0, n),
                (2 * s) ** (n - 1) / 3.0,
            ),
            radii=np.exp2(np.linspace(0.0, 1.0, 33)),
        )
    raise DomainError(f"unknown scaling case {case!r}")


def _radial_pairing(
    case: KnappCase, n: int, quad: SphereQuadrature, radial_cells: int
) -> float:
    """Pairing of sup_t A_t f1 A_t f2 against a radial indicator h."""
    a, b = case.h_radial
    rho = a + (b - a) * (np.arange(radial_cells) + 0.5) / radial_cells
    drho = (b - a) / radial_cells
    total = 0.0
    for r in rho:
        x = np.zeros(n)
        x[0] = r
        m = _sup_product(case.f1, case.f2, x, case.radii, quad)
        surface = 2.0 * math.pi * r if n == 2 else 4.0 * math.pi * r * r
        total += m * surface * drho
    return total


def _box_pairing(case: KnappCase, n: int, quad: SphereQuadrature, cells: int) -> float:
    """Pairing against a box indicator h via a local midpoint grid."""
    axes = []
    vol = 1.0
    for lo, hi in case.h_box:
        axes.append(lo + (hi - lo) * (np.arange(cells) + 0.5) / cells)
        vol *= (hi - lo) / cells
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    total = 0.0
    for x in pts:
        total += _sup_product(case.f1, case.f2, x, case.radii, quad)
    return total * vol


def _single_cube_bound(
    measures: tuple[float, float, float], exps: tuple[float, float, float], n: int
) -> float:
    """|Q| <f1>_{Q,r1} <f2>_{Q,r2} <h>_{Q,t} for the smallest containing cube.

    All supports sit inside [-4, 4]^n, the root of the default lattice,
    and the averages of indicators are exact measure ratios.
    """
    q_measure = 8.0**n
    r1, r2, t = exps
    return (
        q_measure
        * (measures[0] / q_measure) ** (1.0 / r1)
        * (measures[1] / q_measure) ** (1.0 / r2)
        * (measures[2] / q_measure) ** (1.0 / t)
    )


def _fit_slope(deltas: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of log(value) against log(delta), with R^2."""
    x, y = np.log(deltas), np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


@dataclass
class ScalingRun:
    case: str
    n: int
    exponents: tuple[float, float, float]
    deltas: list[float]
    pairing_values: list[float]
    sparse_values: list[float]
    pairing_slope: float
    pairing_r2: float
    sparse_slope: float
    sparse_r2: float


def knapp_run(
    case: str,
    n: int,
    deltas: Sequence[float],
    exps: tuple[float, float, float],
    resolution: int = 16384,
    radial_cells: int = 64,
) -> ScalingRun:
    """Scaling run: pairing of the maximal product against h, per delta.

    ``exps`` = (r1, r2, t) fixes the single-cube sparse bound; the pairing
    side is exponent-free.  ``resolution`` is the sphere-quadrature node
    count; it must resolve the thinnest angular feature (roughly 16 nodes
    across an arc of width delta), else a ResolutionError is raised.
    """
    if n not in (2, 3):
        raise InvalidDimensionError("scaling runs support n = 2 or 3")
    deltas = [float(d) for d in deltas]
    if min(deltas) * resolution < 16 * 2 * math.pi:
        raise ResolutionError(
            f"{resolution} nodes cannot resolve delta = {min(deltas):.4g}"
        )
    quad = sphere_quadrature(n, resolution)
    pair_vals, sparse_vals = [], []
    for d in deltas:
        kc = _knapp_case(case, n, d)
        if kc.h_radial is not None:
            pair_vals.append(_radial_pairing(kc, n, quad, radial_cells))
        else:
            pair_vals.append(_box_pairing(kc, n, quad, cells=12))
        sparse_vals.append(_single_cube_bound(kc.measures, exps, n))
    d_arr = np.array(deltas)
    p_slope, p_r2 = _fit_slope(d_arr, np.array(pair_vals))
    s_slope, s_r2 = _fit_slope(d_arr, np.array(sparse_vals))
    return ScalingRun(
        case=case,
        n=n,
        exponents=tuple(float(e) for e in exps),
        deltas=deltas,
        pairing_values=pair_vals,
        sparse_values=sparse_vals,
        pairing_slope=p_slope,
        pairing_r2=p_r2,
        sparse_slope=s_slope,
        sparse_r2=s_r2,
    )


def slope_consistency(run: ScalingRun, tol: float = 0.1) -> bool:
    """Domination is scaling-consistent iff pairing decays at least as fast.

    Smaller values have larger slopes in delta -> 0, so consistency means
    pairing_slope >= sparse_slope - tol.
    """
    return run.pairing_slope >= run.sparse_slope - tol


def sparse_domination_ratio(
    f1: GridFunction,
    f2: GridFunction,
    h: GridFunction,
    exps: tuple[float, float, float],
    max_depth: int = 4,
    quad: Optional[SphereQuadrature] = None,
    radii: Optional[RadiusSet] = None,
    threads: int = 1,
) -> dict:
    """Grid-based ratio pairing(M(f1, f2), h) / sparse form."""
    quad = quad or sphere_quadrature(f1.ndim, 256)
    m = maximal(f1, f2, quad, radii=radii, kind="lacunary", threads=threads)
    lattice = DyadicLattice(f1, max_depth)
    family = build_sparse_family(f1, f2, h, lattice, exps)
    lam = sparse_form(family, f1, f2, h, exps, lattice)
    pair = pairing(m, h)
    return {"pairing": pair, "sparse_form": lam, "ratio": pair / lam if lam > 0 else math.inf}


@dataclass
class RadialRun:
    alpha: float
    beta: float
    scales: list[float]
    ratios: list[float]
    trend_slope: float
    in_range: bool


def radial_run(
    n: int,
    alpha: float,
    beta: float,
    scales: Sequence[float],
    cells: int = 256,
    box_factor: float = 4.0,
    threads: int = 1,
    resolution: int = 512,
) -> RadialRun:
    """Dilation-family probe of the weighted bound with power weights.

    For each scale, f1 = f2 = annulus of radius scale and width scale/8,
    sampled on a box proportional to the scale so every member of the
    family is equally resolved; ratio = |M(f1, f2)|_{L1(|x|^((a+b)/2))}
    divided by the product of weighted L2 norms.  The ratio of a correctly
    normalized weighted estimate is dilation-invariant, so the fitted
    log-log trend must be flat; a mis-scaled weight or norm would tilt it.
    """
    if n != 2:
        raise InvalidDimensionError("the radial probe is implemented for n = 2")
    quad = sphere_quadrature(n, resolution)
    ratios = []
    used_scales = []
    for lam in scales:
        lam = float(lam)
        box = Box.cube(box_factor * lam, n)
        w_pair = sample(power((alpha + beta) / 2.0), box, cells)
        w1 = sample(power(alpha), box, cells)
        w2 = sample(power(beta), box, cells)
        f = sample(annulus(lam / 8.0, center_radius=lam), box, cells)
        den = weighted_lp_norm(f, 2.0, w1) * weighted_lp_norm(f, 2.0, w2)
        if den == 0.0:
            raise ResolutionError(f"annulus at scale {lam} not resolved by the grid")
        m = maximal(f, f, quad, kind="lacunary", threads=threads)
        num = weighted_lp_norm(m, 1.0, w_pair)
        ratios.append(num / den)
        used_scales.append(lam)
    slope, _ = _fit_slope(np.array(used_scales), np.array(ratios))
    # L2(|x|^alpha) x L2(|x|^beta): both powers must lie in the p = 2 class
    in_range = bool(
        ap_power_membership(Fraction(alpha).limit_denominator(10**9), 2, n)
        and ap_power_membership(Fraction(beta).limit_denominator(10**9), 2, n)
    )
    return RadialRun(
        alpha=float(alpha),
        beta=float(beta),
        scales=used_scales,
        ratios=ratios,
        trend_slope=slope,
        in_range=in_range,
    )


@dataclass
class UnboundednessProbe:
    resolutions: list[int]
    values: list[float]
    control_values: list[float]
    strictly_increasing: bool
    growth: float
    control_stable: bool


def unboundedness_probe(
    n: int = 2,
    resolutions: Sequence[int] = (128, 256, 512),
    quad_nodes: int = 512,
) -> UnboundednessProbe:
    """Refinement probe of the integrable-singularity counterexample.

    f1 = |x|^(1-n) / log(1/|x|) near the origin, f2 = unit-ball indicator.
    Spheres of small radius around points near the origin average f1 at
    height about 1/(t log(1/t)); the radius truncation at 4h relaxes as the
    grid refines, so the maximal product must keep growing, while a
    bounded control (f1 = ball indicator) stabilizes.
    """
    if n != 2:
        raise InvalidDimensionError("the probe is implemented for n = 2")
    box = Box.cube(2.0, n)
    quad = sphere_quadrature(n, quad_nodes)
    radii = RadiusSet("geometric", {"j_min": -7, "j_max": 0, "steps_per_octave": 8})
    angles = 2.0 * np.pi * (np.arange(4) + 0.5) / 4
    near = 0.01 * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    probes = np.vstack([np.zeros((1, n)), near])
    values, controls = [], []
    for cells in resolutions:
        f1 = sample(log_weight(), box, cells)
        f2 = sample(ball(1.0), box, cells)
        fc = sample(ball(0.75), box, cells)
        values.append(float(np.max(maximal_at_points(f1, f2, probes, quad, radii))))
        controls.append(float(np.max(maximal_at_points(fc, f2, probes, quad, radii))))
    increasing = all(b > a for a, b in zip(values, values[1:]))
    stable = max(controls) <= 1.05 * min(controls)
    return UnboundednessProbe(
        resolutions=list(resolutions),
        values=values,
        control_values=controls,
        strictly_increasing=increasing,
        growth=values[-1] / values[0],
        control_stable=stable,
    )


def domination_ratio_scan(
    pairs: Sequence[tuple[GridFunction, GridFunction]],
    resolution: int = 12,
    threads: int = 1,
    floor: float = 1e-9,
) -> list[float]:
    """Max pointwise ratio of the joint-sphere operator to the product bound.

    For each pair, computes sup_t of the product-sphere average and divides
    by (full spherical maximal of f1) x (dyadic HL maximal of f2), over
    cells where the denominator exceeds ``floor``.
    """
    out = []
    for f1, f2 in pairs:
        quad_s = product_sphere_quadrature(f1.ndim, resolution)
        quad_c = sphere_quadrature(f1.ndim, 16 * resolution)
        radii = geometric_radii(-2, 2, 8)
        msph = geba_maximal(f1, f2, quad_s, radii, threads=threads)
        m1 = linear_maximal(f1, quad_c, radii=radii, threads=threads)
        lattice = DyadicLattice(f2, max_depth=max(1, int(math.log2(f2.cells[0])) - 1))
        m2 = hl_maximal(f2, lattice)
        denom = m1.values * m2.values
        mask = denom > floor
        if not mask.any():
            out.append(0.0)
            continue
        out.append(float(np.max(msph.values[mask] / denom[mask])))
    return out


def section5_report(n: int, delta, eps, alpha_grid: Sequence) -> dict:
    """Summary of power-weight ranges: theorem vs product-type classes.

    Reports the theorem range, the union of product ranges over the alpha
    grid, the sub-interval reachable only through the theorem, and the
    feasibility of the second splitting case for both operator types.
    """
    ranges = [expo.section5_ranges(n, delta, eps, a) for a in alpha_grid]
    theorem = ranges[0].theorem
    product_lo = min(r.product[0] for r in ranges)
    product_hi = max(r.product[1] for r in ranges)
    gain = (theorem[0], product_lo) if product_lo > theorem[0] else None
    return {
        "n": n,
        "delta": str(delta),
        "eps": str(eps),
        "theorem_range": [float(theorem[0]), float(theorem[1])],
        "product_range": [float(product_lo), float(product_hi)],
        "theorem_only_interval": None if gain is None else [float(gain[0]), float(gain[1])],
        "case2": {
            kind: {
                "lower": float(b["lower"]),
                "upper": float(b["upper"]),
                "feasible": b["feasible"],
            }
            for kind, b in (
                (k, expo.section5_case2_bounds(k, n, delta)) for k in ("lacunary", "full")
            )
        },
        "radial_family": {
            "closed_lower": [
                float(v)
                for v in expo.radial_family_interval(
                    "closed_lower", n + float(delta), n
                )[:2]
            ],
        },
    }


def run_to_csv(run: ScalingRun, path: str) -> None:
    with open(path, "w") as fh:
        fh.write("delta,pairing,sparse_bound\n")
        for d, p, s in zip(run.deltas, run.pairing_values, run.sparse_values):
            fh.write(f"{d:.12g},{p:.12g},{s:.12g}\n")


def run_to_json(run: ScalingRun, path: str) -> None:
    payload = {
        "case": run.case,
        "n": run.n,
        "exponents": list(run.exponents),
        "pairing_slope": run.pairing_slope,
        "pairing_r2": run.pairing_r2,
        "sparse_slope": run.sparse_slope,
        "sparse_r2": run.sparse_r2,
        "consistent": slope_consistency(run),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
