"""Exponent arithmetic: admissible regions, derived exponents, sharpness.

Everything here is exact where possible: polygon vertices and derived
exponents are computed with ``fractions.Fraction`` and only converted to
float at the edge.  Quantities that degenerate to infinity are reported
with the explicit :data:`UNBOUNDED` marker rather than a sentinel float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import (
    BoundaryError,
    DomainError,
    ExponentOrderError,
    InvalidDimensionError,
    UndefinedExponentError,
)


class _Unbounded:
    """Marker for exponents that degenerate to infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "unbounded"


UNBOUNDED = _Unbounded()

Extended = Union[Fraction, float, _Unbounded]

_INTERIOR_SLACK = 1e-12


def _check_dimension(n: int) -> None:
    if not isinstance(n, int) or n < 2:
        raise InvalidDimensionError(f"dimension must be an integer >= 2, got {n!r}")


def conjugate(p: Union[Fraction, float]) -> Extended:
    """Conjugate exponent p' = p/(p-1); p = 1 maps to UNBOUNDED."""
    p = Fraction(p)
    if p < 1:
        raise DomainError(f"conjugate requires p >= 1, got {p}")
    if p == 1:
        return UNBOUNDED
    return p / (p - 1)


def region_polygon(kind: str, n: int) -> list[tuple[Fraction, Fraction]]:
    """Vertices of the admissible region in the (1/r1, 1/r2) square.

    ``kind`` is "lacunary" (triangle) or "full" (trapezium, degenerating to
    a triangle for n = 2).  Vertices are exact rationals.
    """
    _check_dimension(n)
    if kind == "lacunary":
        return [
            (Fraction(0), Fraction(1)),
            (Fraction(1), Fraction(0)),
            (Fraction(n, n + 1), Fraction(n, n + 1)),
        ]
    if kind == "full":
        return [
            (Fraction(0), Fraction(1)),
            (Fraction(n - 1, n), Fraction(1, n)),
            (Fraction(n - 1, n), Fraction(n - 1, n)),
            (Fraction(n * n - n, n * n + 1), Fraction(n * n - n + 2, n * n + 1)),
        ]
    raise DomainError(f"unknown region kind {kind!r}")


def is_interior(point: Sequence[float], polygon: Sequence[tuple]) -> bool:
    """Strict interior test for a convex polygon, with 1e-12 slack.

    Duplicate vertices are tolerated (a degenerate trapezium is handled as
    the triangle it collapses to).  The result is independent of vertex
    ordering: vertices are re-sorted around their centroid.
    """
    pts = []
    for v in polygon:
        fv = (float(v[0]), float(v[1]))
        if not any(abs(fv[0] - u[0]) < 1e-15 and abs(fv[1] - u[1]) < 1e-15 for u in pts):
            pts.append(fv)
    if len(pts) < 3:
        return False
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    pts.sort(key=lambda p: math.atan2(p[1] - cy, p[0] - cx))
    x, y = float(point[0]), float(point[1])
    for i in range(len(pts)):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % len(pts)]
        cross = (bx - ax) * (y - ay) - (by - ay) * (x - ax)
        if cross <= _INTERIOR_SLACK:
            return False
    return True


def phi(kind: str, n: int, inv_r: Union[Fraction, float]) -> Fraction:
    """Critical value 1/s as a function of 1/r on the region's lower edge.

    Lacunary: defined on (0, 1), piecewise with breakpoint at n/(n+1).
    Full: defined on (0, (n-1)/n), piecewise linear through the two lower
    vertices of the trapezium.
    """
    _check_dimension(n)
    x = Fraction(inv_r)
    if kind == "lacunary":
        if not 0 < x < 1:
            raise DomainError(f"lacunary phi requires 0 < 1/r < 1, got {x}")
        if x <= Fraction(n, n + 1):
            return 1 - x / n
        return n * (1 - x)
    if kind == "full":
        if not 0 < x < Fraction(n - 1, n):
            raise DomainError(f"full phi requires 0 < 1/r < (n-1)/n, got {x}")
        p0 = (Fraction(0), Fraction(1))
        p4 = (Fraction(n * n - n, n * n + 1), Fraction(n * n - n + 2, n * n + 1))
        p3 = (Fraction(n - 1, n), Fraction(n - 1, n))
        a, b = (p0, p4) if x <= p4[0] else (p4, p3)
        return a[1] + (x - a[0]) * (b[1] - a[1]) / (b[0] - a[0])
    raise DomainError(f"unknown region kind {kind!r}")


def holder_t(s1: Union[Fraction, float], s2: Union[Fraction, float]) -> Fraction:
    """Product-target exponent t with 1/t = 1/s1 + 1/s2 - 1.

    Defined only when 1/s1 + 1/s2 > 1; raises UndefinedExponentError
    otherwise.
    """
    s1, s2 = Fraction(s1), Fraction(s2)
    if s1 <= 0 or s2 <= 0:
        raise DomainError("exponents must be positive")
    inv_t = 1 / s1 + 1 / s2 - 1
    if inv_t <= 0:
        raise UndefinedExponentError(
            f"1/s1 + 1/s2 = {1 / s1 + 1 / s2} must exceed 1 for t to exist"
        )
    return 1 / inv_t


@dataclass(frozen=True)
class ExponentConfig:
    """A bilinear exponent tuple (r1, s1, r2, s2) in dimension n."""

    n: int
    r1: Fraction
    s1: Fraction
    r2: Fraction
    s2: Fraction

    def __post_init__(self):
        _check_dimension(self.n)
        for name in ("r1", "s1", "r2", "s2"):
            v = Fraction(getattr(self, name))
            object.__setattr__(self, name, v)
            if v <= 0:
                raise DomainError(f"{name} must be positive, got {v}")

    @property
    def t(self) -> Fraction:
        return holder_t(self.s1, self.s2)


@dataclass(frozen=True)
class ConditionRecord:
    name: str
    lhs: Fraction
    bound: Fraction
    strict: bool

    @property
    def holds(self) -> bool:
        return self.lhs < self.bound if self.strict else self.lhs <= self.bound


@dataclass(frozen=True)
class NecessaryReport:
    kind: str
    conditions: tuple[ConditionRecord, ...]

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.conditions)


def necessary_report(kind: str, config: ExponentConfig) -> NecessaryReport:
    """Evaluate the necessary conditions for boundedness, one record each.

    ``kind`` selects the lacunary or full set; the full set extends the
    lacunary one.  Each record carries its left-hand side, bound, and
    strictness, all exact.
    """
    n = config.n
    x1, y1 = 1 / config.r1, 1 / config.s1
    x2, y2 = 1 / config.r2, 1 / config.s2
    inv_t = y1 + y2 - 1
    if inv_t <= 0:
        raise UndefinedExponentError("1/s1 + 1/s2 must exceed 1")
    conds = [
        ConditionRecord("sum_r_ns", x1 + n * y1 + x2 + n * y2, Fraction(2 * n), False),
        ConditionRecord("sum_nr_s", n * x1 + y1 + n * x2 + y2, Fraction(2 * n), False),
        ConditionRecord("mixed_t_1", max(n * x1 + inv_t, x1 + n * inv_t), Fraction(n), False),
        ConditionRecord("mixed_t_2", max(n * x2 + inv_t, x2 + n * inv_t), Fraction(n), False),
        ConditionRecord("sum_r_lt_1", x1 + x2, Fraction(1), True),
    ]
    if kind == "full":
        conds += [
            ConditionRecord("r1_subcritical", x1, Fraction(n - 1, n), True),
            ConditionRecord("r2_subcritical", x2, Fraction(n - 1, n), True),
            ConditionRecord(
                "full_sum",
                (n + 1) * x1 + (n - 1) * y1 + (n + 1) * x2 + (n - 1) * y2,
                Fraction(4 * (n - 1)),
                False,
            ),
            ConditionRecord(
                "full_t_1", (n + 1) * x1 + (n - 1) * inv_t, Fraction(2 * (n - 1)), False
            ),
            ConditionRecord(
                "full_t_2", (n + 1) * x2 + (n - 1) * inv_t, Fraction(2 * (n - 1)), False
            ),
        ]
    elif kind != "lacunary":
        raise DomainError(f"unknown kind {kind!r}")
    return NecessaryReport(kind, tuple(conds))


@dataclass(frozen=True)
class LmoParameters:
    """Derived parameters of a three-exponent weight class.

    ``delta1/delta2/delta3`` may be :data:`UNBOUNDED` at the endpoint
    p_i = r_i; all other fields are exact rationals.
    """

    p1: Fraction
    p2: Fraction
    r1: Fraction
    r2: Fraction
    r3: Fraction
    p: Fraction = field(init=False)
    p3: Fraction = field(init=False)
    r: Fraction = field(init=False)
    delta1: Extended = field(init=False)
    delta2: Extended = field(init=False)
    delta3: Extended = field(init=False)
    theta1: Fraction = field(init=False)
    theta2: Fraction = field(init=False)

    def __post_init__(self):
        for name in ("p1", "p2", "r1", "r2", "r3"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
        p1, p2, r1, r2, r3 = self.p1, self.p2, self.r1, self.r2, self.r3
        if not (1 <= r1 <= p1 and 1 <= r2 <= p2):
            raise ExponentOrderError("need 1 <= r_i <= p_i for i = 1, 2")
        if r3 < 1:
            raise ExponentOrderError("need r3 >= 1")
        inv_p = 1 / p1 + 1 / p2
        if inv_p >= 1:
            raise ExponentOrderError("need 1/p1 + 1/p2 < 1 so the dual index exists")
        p = 1 / inv_p
        p3 = conjugate(p)
        r3c = conjugate(r3)
        if r3c is not UNBOUNDED and r3c <= p:
            raise ExponentOrderError(f"need r3' > p, got r3' = {r3c}, p = {p}")
        inv_r = 1 / r1 + 1 / r2 + 1 / r3
        r = 1 / inv_r
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p3", p3)
        object.__setattr__(self, "r", r)
        lam = (1 - r) / r  # common offset 1/r - 1
        pair = ((r1, p1), (r2, p2), (r3, p3))
        deltas = []
        for ri, pi in pair:
            inv_d = 1 / ri - 1 / pi
            deltas.append(UNBOUNDED if inv_d == 0 else 1 / inv_d)
        object.__setattr__(self, "delta1", deltas[0])
        object.__setattr__(self, "delta2", deltas[1])
        object.__setattr__(self, "delta3", deltas[2])
        for i, (ri, pi) in enumerate(pair[:2], start=1):
            inv_d = 1 / ri - 1 / pi
            inv_theta = lam - inv_d
            if inv_theta <= 0:
                raise ExponentOrderError(f"theta{i} degenerates: 1/theta = {inv_theta}")
            object.__setattr__(self, f"theta{i}", 1 / inv_theta)


def lmo_params(p1, p2, r1, r2, r3) -> LmoParameters:
    """Derived weight-class parameters for exponents (p1, p2; r1, r2, r3)."""
    return LmoParameters(p1, p2, r1, r2, r3)


def step2_exponents(n: int, eps: Union[Fraction, float]) -> dict:
    """Closed-form exponents of the epsilon-family of weight classes.

    Returns a dict with exact rationals ``inv_t``, ``inv_r``, ``inv_theta``
    plus the generating tuple (p_i = 2 + 2*eps, r_i = 2 + eps, r3 = t).
    """
    _check_dimension(n)
    eps = Fraction(eps)
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    inv_t = Fraction(2 * (n - 1) + n * eps, n * (2 + eps))
    inv_r = Fraction(4 * n + n * eps - 2, n * (2 + eps))
    inv_theta = Fraction(n * (4 + 3 * eps) - 4 * (1 + eps), 2 * n * (1 + eps) * (2 + eps))
    return {
        "p": 2 + 2 * eps,
        "r": 2 + eps,
        "inv_t": inv_t,
        "inv_r": inv_r,
        "inv_theta": inv_theta,
    }


def sharpness_exponent(r1, r2, t_prime, q1, q2) -> Fraction:
    """Largest of the three endpoint exponents governing sharp constants.

    ``t_prime`` may be :data:`UNBOUNDED` (then 1/t' = 0).  Requires
    q_i > r_i and (when t' is finite) 1/q > 1/t' strictly; equality is a
    boundary degeneracy.
    """
    r1, r2, q1, q2 = Fraction(r1), Fraction(r2), Fraction(q1), Fraction(q2)
    inv_tp = Fraction(0) if t_prime is UNBOUNDED else 1 / Fraction(t_prime)
    inv_q = 1 / q1 + 1 / q2
    terms = []
    for ri, qi in ((r1, q1), (r2, q2)):
        gap = 1 / ri - 1 / qi
        if gap <= 0:
            raise BoundaryError(f"need q_i > r_i, got r = {ri}, q = {qi}")
        terms.append((1 / ri) / gap)
    gap = inv_q - inv_tp
    if gap <= 0:
        raise BoundaryError("need 1/q1 + 1/q2 > 1/t'")
    terms.append((1 - inv_tp) / gap)
    return max(terms)


@dataclass(frozen=True)
class Section5Ranges:
    """Power-weight exponent ranges: theorem-derived vs product-class."""

    theorem: tuple[Fraction, Fraction]
    product: tuple[Fraction, Fraction]

    @property
    def in_theorem_only(self) -> Optional[tuple[Fraction, Fraction]]:
        """Interval (theorem lower, product lower], empty -> None."""
        lo, hi = self.theorem[0], min(self.product[0], self.theorem[1])
        return (lo, hi) if hi > lo else None


def section5_ranges(n: int, delta, eps, alpha) -> Section5Ranges:
    """Admissible power-weight exponent ranges for p_i = n + delta.

    ``theorem`` is the range produced by the weighted theorem with
    r_i = 2 + eps; ``product`` is the (smaller) range reachable through
    product-type classes at splitting parameter alpha.
    """
    _check_dimension(n)
    delta, eps, alpha = Fraction(delta), Fraction(eps), Fraction(alpha)
    if delta <= 1:
        raise DomainError(f"need delta > 1, got {delta}")
    lo_eps = max(Fraction(0), Fraction(delta - n, n))
    if not lo_eps < eps < n - 2 + delta:
        raise DomainError(f"eps = {eps} outside ({lo_eps}, {n - 2 + delta})")
    if not 0 < alpha < Fraction((n - 1) * (n + delta), n):
        raise DomainError(f"alpha = {alpha} outside (0, {(n - 1) * (n + delta)}/{n})")
    theorem = (
        -n - Fraction((n - 2) * (n + delta), 2 + eps),
        Fraction(n * (n + delta - 2 - eps), 2 + eps),
    )
    product = (
        -n + Fraction(n + delta, n + delta - alpha),
        Fraction(n * alpha, n + delta - alpha),
    )
    return Section5Ranges(theorem=theorem, product=product)


def section5_case2_bounds(kind: str, n: int, delta) -> dict:
    """Lower/upper constraints on alpha in the second splitting case.

    The case is infeasible when the lower constraint meets or exceeds the
    upper one; ``feasible`` reports that comparison exactly.
    """
    _check_dimension(n)
    delta = Fraction(delta)
    if kind == "lacunary":
        lower = Fraction(n * n + n * delta - n - 1, n)
        upper = Fraction(
            (n - 1) * (n + delta) * (n + delta - 1), (n - 1) * (n + delta) + 1
        )
    elif kind == "full":
        lower = Fraction((n * n - n) * (n + delta) - (n * n + 1), n * n - n)
        upper = Fraction(
            (n + delta) * ((n + delta) * (n - 1) - 2), (n + delta + 1) * (n - 1)
        )
    else:
        raise DomainError(f"unknown kind {kind!r}")
    return {"lower": lower, "upper": upper, "feasible": lower < upper}


def radial_family_interval(kind: str, p, n: int) -> tuple:
    """Exponent interval of the radial power-weight comparison family.

    ``kind`` = "closed_lower" gives [1-n, (n-1)(p-1)); "open" gives
    (1-n, (n-1)(p-1)-1), which requires n >= 3 and p > n/(n-1).
    """
    _check_dimension(n)
    p = Fraction(p)
    if kind == "closed_lower":
        if p <= 1:
            raise DomainError("need p > 1")
        return (Fraction(1 - n), (n - 1) * (p - 1), "closed_lower")
    if kind == "open":
        if n < 3:
            raise InvalidDimensionError("open family needs n >= 3")
        if p <= Fraction(n, n - 1):
            raise DomainError(f"need p > n/(n-1) = {Fraction(n, n - 1)}")
        return (Fraction(1 - n), (n - 1) * (p - 1) - 1, "open")
    raise DomainError(f"unknown kind {kind!r}")
