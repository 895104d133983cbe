"""Cell-centered grid functions, test-function sampling, norms, pairing.

A :class:`GridFunction` holds samples of a function at the centers of a
uniform cell grid over an axis-aligned box.  Functions are extended by
zero outside the box; integrals are midpoint sums.  For boxes symmetric
about the origin the sample points never include the origin itself, which
matters for singular weights.
"""

from __future__ import annotations

import io
import math
import struct
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, GeometryError, InvalidDimensionError

_RAW_MAGIC = b"SPHMAXG1"


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo_d, lo_d + side_d) per axis."""

    lo: tuple[float, ...]
    side: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in self.lo))
        object.__setattr__(self, "side", tuple(float(v) for v in self.side))
        if len(self.lo) != len(self.side):
            raise GeometryError("lo and side must have equal length")
        if any(s <= 0 for s in self.side):
            raise GeometryError("box sides must be positive")

    @property
    def ndim(self) -> int:
        return len(self.lo)

    @property
    def hi(self) -> tuple[float, ...]:
        return tuple(l + s for l, s in zip(self.lo, self.side))

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum(s * s for s in self.side)))

    @classmethod
    def cube(cls, half_side: float, n: int) -> "Box":
        return cls(lo=(-half_side,) * n, side=(2 * half_side,) * n)


@dataclass
class GridFunction:
    """Samples at cell centers of a uniform grid over ``box``."""

    box: Box
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != self.box.ndim:
            raise GeometryError("values rank must equal box dimension")
        if self.box.ndim not in (1, 2, 3):
            raise InvalidDimensionError("grids support 1 <= n <= 3")

    @property
    def ndim(self) -> int:
        return self.box.ndim

    @property
    def cells(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(s / c for s, c in zip(self.box.side, self.values.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis_centers(self, d: int) -> np.ndarray:
        h = self.spacing[d]
        return self.box.lo[d] + h * (np.arange(self.values.shape[d]) + 0.5)

    def center_mesh(self) -> list[np.ndarray]:
        axes = [self.axis_centers(d) for d in range(self.ndim)]
        return np.meshgrid(*axes, indexing="ij")

    def index_coords(self, points: np.ndarray) -> np.ndarray:
        """Map physical points to fractional index coordinates."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        lo = np.array(self.box.lo)
        h = np.array(self.spacing)
        return (pts - lo) / h - 0.5

    def like(self, values: np.ndarray) -> "GridFunction":
        return GridFunction(box=self.box, values=values)

    def copy(self) -> "GridFunction":
        return GridFunction(box=self.box, values=self.values.copy())


def same_geometry(*fns: GridFunction) -> None:
    ref = fns[0]
    for f in fns[1:]:
        if f.box != ref.box or f.values.shape != ref.values.shape:
            raise GeometryError("grid functions must share box and resolution")


@dataclass(frozen=True)
class TestFunctionSpec:
    """A named test function with parameters, sampled exactly at centers."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _EVALUATORS:
            raise DomainError(
                f"unknown test function kind {self.kind!r}; "
                f"choose one of {sorted(_EVALUATORS)}")

    def __call__(self, mesh: Sequence[np.ndarray]) -> np.ndarray:
        return _EVALUATORS[self.kind](self.params, mesh)


def _radius(mesh) -> np.ndarray:
    return np.sqrt(sum(m * m for m in mesh))


def _eval_ball(params, mesh):
    rho = float(params["rho"])
    center = params.get("center")
    if center is not None:
        mesh = [m - c for m, c in zip(mesh, center)]
    return (_radius(mesh) < rho).astype(np.float64)


def _eval_annulus(params, mesh):
    delta = float(params["delta"])
    center_radius = float(params.get("center_radius", 1.0))
    return (np.abs(_radius(mesh) - center_radius) < delta).astype(np.float64)


def _eval_indicator_box(params, mesh):
    bounds = params["bounds"]  # sequence of (lo, hi) per axis
    out = np.ones_like(mesh[0], dtype=np.float64)
    for m, (lo, hi) in zip(mesh, bounds):
        out *= ((m >= lo) & (m < hi)).astype(np.float64)
    return out


def _eval_knapp_box_r1(params, mesh):
    delta = float(params["delta"])
    c = float(params.get("C", 1.0))
    s = np.sqrt(delta)
    bounds = [(-c * s, c * s)] * (len(mesh) - 1) + [(-c * delta, c * delta)]
    return _eval_indicator_box({"bounds": bounds}, mesh)


def _eval_knapp_box_r2(params, mesh):
    delta = float(params["delta"])
    s = np.sqrt(delta)
    bounds = [(-s, s)] * (len(mesh) - 1) + [(4.0 / 3.0, 5.0 / 3.0)]
    return _eval_indicator_box({"bounds": bounds}, mesh)


def _eval_log_weight(params, mesh):
    n = len(mesh)
    r = _radius(mesh)
    out = np.zeros_like(r)
    inside = (r < 0.75) & (r > 0)
    ri = r[inside]
    out[inside] = ri ** (1 - n) / np.log(1.0 / ri)
    return out


def _eval_power(params, mesh):
    b = float(params["b"])
    r = _radius(mesh)
    with np.errstate(divide="ignore"):
        out = r**b
    out[r == 0] = np.inf if b < 0 else (0.0 if b > 0 else 1.0)
    return out


def _eval_constant(params, mesh):
    return np.full_like(mesh[0], float(params.get("value", 1.0)), dtype=np.float64)


_EVALUATORS: dict[str, Callable] = {
    "ball": _eval_ball,
    "annulus": _eval_annulus,
    "indicator_box": _eval_indicator_box,
    "knapp_box_r1": _eval_knapp_box_r1,
    "knapp_box_r2": _eval_knapp_box_r2,
    "log_weight": _eval_log_weight,
    "power": _eval_power,
    "constant": _eval_constant,
}


def ball(rho: float, center: Optional[Sequence[float]] = None) -> TestFunctionSpec:
    if rho <= 0:
        raise DomainError(f"ball radius must be positive, got {rho}")
    params = {"rho": rho}
    if center is not None:
        params["center"] = tuple(center)
    return TestFunctionSpec("ball", params)


def annulus(delta: float, center_radius: float = 1.0) -> TestFunctionSpec:
    if delta <= 0 or center_radius <= 0:
        raise DomainError(
            f"annulus needs positive half-width and radius, got {delta}, {center_radius}")
    return TestFunctionSpec("annulus", {"delta": delta, "center_radius": center_radius})


def indicator_box(bounds: Sequence[tuple]) -> TestFunctionSpec:
    return TestFunctionSpec("indicator_box", {"bounds": tuple(map(tuple, bounds))})


def knapp_box_r1(delta: float, C: float = 1.0) -> TestFunctionSpec:
    return TestFunctionSpec("knapp_box_r1", {"delta": delta, "C": C})


def knapp_box_r2(delta: float) -> TestFunctionSpec:
    return TestFunctionSpec("knapp_box_r2", {"delta": delta})


def log_weight() -> TestFunctionSpec:
    return TestFunctionSpec("log_weight")


def power(b: float) -> TestFunctionSpec:
    return TestFunctionSpec("power", {"b": b})


def constant(value: float = 1.0) -> TestFunctionSpec:
    return TestFunctionSpec("constant", {"value": value})


def sample(spec: TestFunctionSpec, box: Box, cells: int) -> GridFunction:
    """Sample a test function at the cell centers of a uniform grid."""
    if spec.kind not in _EVALUATORS:
        raise DomainError(f"unknown test function kind {spec.kind!r}")
    gf = GridFunction(box=box, values=np.zeros((cells,) * box.ndim))
    gf.values = spec(gf.center_mesh())
    return gf


def weighted_lp_norm(
    f: GridFunction, p: float, weight: Union[GridFunction, float, None] = None
) -> float:
    """(sum |f|^p w h^n)^(1/p); weight defaults to 1; p = inf gives the sup."""
    if p <= 0:
        raise DomainError(f"p must be positive, got {p}")
    if isinstance(weight, GridFunction):
        same_geometry(f, weight)
        w = weight.values
    elif weight is None:
        w = 1.0
    else:
        w = float(weight)
    if math.isinf(p):
        return float(np.max(np.abs(f.values) * (w if np.ndim(w) else 1.0)))
    total = float(np.sum(np.abs(f.values) ** p * w)) * f.cell_volume
    return total ** (1.0 / p)


def pairing(f: GridFunction, h: GridFunction) -> float:
    """Midpoint approximation of the integral of f*h."""
    same_geometry(f, h)
    return float(np.sum(f.values * h.values)) * f.cell_volume


def translate(f: GridFunction, shift_cells: Sequence[int]) -> GridFunction:
    """Translate by an integer number of cells, zero-filling the gap."""
    from .kernels._fallback import _int_shift

    shift = tuple(int(s) for s in shift_cells)
    if len(shift) != f.ndim:
        raise GeometryError("shift length must match dimension")
    return f.like(_int_shift(f.values, shift))


def to_csv(f: GridFunction, path: str) -> None:
    """Write one row per cell: integer index per axis, center coords, value."""
    with open(path, "w") as fh:
        axes = [f"i{d}" for d in range(f.ndim)]
        coords = [f"x{d}" for d in range(f.ndim)]
        fh.write(",".join(axes + coords + ["value"]) + "\n")
        centers = [f.axis_centers(d) for d in range(f.ndim)]
        for idx in np.ndindex(*f.values.shape):
            pos = [centers[d][idx[d]] for d in range(f.ndim)]
            row = [str(i) for i in idx]
            row += [f"{x:.12g}" for x in pos]
            row.append(f"{f.values[idx]:.12g}")
            fh.write(",".join(row) + "\n")


def to_raw(f: GridFunction, path: str) -> None:
    """Binary dump: magic, ndim, cells per axis, box, then float64 data."""
    with open(path, "wb") as fh:
        fh.write(_RAW_MAGIC)
        fh.write(struct.pack("<i", f.ndim))
        fh.write(struct.pack(f"<{f.ndim}i", *f.values.shape))
        fh.write(struct.pack(f"<{f.ndim}d", *f.box.lo))
        fh.write(struct.pack(f"<{f.ndim}d", *f.box.side))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def from_raw(path: str) -> GridFunction:
    """Inverse of :func:`to_raw`."""
    with open(path, "rb") as fh:
        data = fh.read()
    buf = io.BytesIO(data)
    if buf.read(8) != _RAW_MAGIC:
        raise DomainError("not a grid raw dump")
    (ndim,) = struct.unpack("<i", buf.read(4))
    shape = struct.unpack(f"<{ndim}i", buf.read(4 * ndim))
    lo = struct.unpack(f"<{ndim}d", buf.read(8 * ndim))
    side = struct.unpack(f"<{ndim}d", buf.read(8 * ndim))
    values = np.frombuffer(buf.read(), dtype="<f8").reshape(shape)
    return GridFunction(box=Box(lo=lo, side=side), values=values.copy())
