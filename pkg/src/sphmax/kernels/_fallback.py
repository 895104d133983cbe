"""Pure-numpy implementation of the shifted-sum interpolation kernels.

Each kernel evaluates, for every lattice point i of a cell-centered grid,
a weighted sum over nodes k of multilinearly interpolated samples of the
input at the fractional lattice position i - offset_k, with the input
extended by zero outside its index range.

The corner iteration order and the floating-point accumulation order match
the compiled core exactly, so both backends produce bit-identical output.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def _int_shift(values: np.ndarray, shift: tuple[int, ...]) -> np.ndarray:
    """Array g with g[i] = values[i - shift], zero-filled outside."""
    out = np.zeros_like(values)
    src = []
    dst = []
    for size, s in zip(values.shape, shift):
        if s >= size or s <= -size:
            return out
        if s >= 0:
            dst.append(slice(s, size))
            src.append(slice(0, size - s))
        else:
            dst.append(slice(0, size + s))
            src.append(slice(-s, size))
    out[tuple(dst)] = values[tuple(src)]
    return out


def _corner_terms(values: np.ndarray, offset: np.ndarray):
    """Yield (corner_weight, shifted_array) pairs in fixed corner order."""
    ndim = values.ndim
    base = [int(math.floor(o)) for o in offset]
    frac = [float(o - b) for o, b in zip(offset, base)]
    for corner in itertools.product((0, 1), repeat=ndim):
        w = 1.0
        for d, c in enumerate(corner):
            w = w * (frac[d] if c else 1.0 - frac[d])
        shift = tuple(base[d] + corner[d] for d in range(ndim))
        yield w, shift


def _interp_shift(values: np.ndarray, offset: np.ndarray) -> np.ndarray:
    """Interpolated shift: g[i] = interp(values, i - offset)."""
    acc = None
    for w, shift in _corner_terms(values, offset):
        term = w * _int_shift(values, shift)
        acc = term if acc is None else acc + term
    return acc


def shifted_sum(values: np.ndarray, offsets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """out[i] = sum_k weights[k] * interp(values, i - offsets[k])."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    offsets = np.atleast_2d(np.asarray(offsets, dtype=np.float64))
    out = np.zeros_like(values)
    for k in range(offsets.shape[0]):
        out += weights[k] * _interp_shift(values, offsets[k])
    return out


def shifted_product_sum(
    f1: np.ndarray,
    f2: np.ndarray,
    offsets1: np.ndarray,
    offsets2: np.ndarray,
    weights: np.ndarray,
) -> np.ndarray:
    """out[i] = sum_k w[k] * interp(f1, i - off1[k]) * interp(f2, i - off2[k])."""
    f1 = np.ascontiguousarray(f1, dtype=np.float64)
    f2 = np.ascontiguousarray(f2, dtype=np.float64)
    offsets1 = np.atleast_2d(np.asarray(offsets1, dtype=np.float64))
    offsets2 = np.atleast_2d(np.asarray(offsets2, dtype=np.float64))
    out = np.zeros_like(f1)
    for k in range(offsets1.shape[0]):
        a = _interp_shift(f1, offsets1[k])
        b = _interp_shift(f2, offsets2[k])
        out += weights[k] * (a * b)
    return out


def interp_at_points(values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Multilinear interpolation of ``values`` at fractional index coords.

    ``points`` has shape (m, ndim); out-of-range reads contribute zero.
    """
    values = np.asarray(values, dtype=np.float64)
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    ndim = values.ndim
    base = np.floor(points).astype(np.int64)
    frac = points - base
    out = np.zeros(points.shape[0])
    for corner in itertools.product((0, 1), repeat=ndim):
        idx = base + np.array(corner)
        w = np.ones(points.shape[0])
        valid = np.ones(points.shape[0], dtype=bool)
        for d, c in enumerate(corner):
            w = w * (frac[:, d] if c else 1.0 - frac[:, d])
            valid &= (idx[:, d] >= 0) & (idx[:, d] < values.shape[d])
        safe = np.where(valid[:, None], idx, 0)
        out += np.where(valid, w * values[tuple(safe.T)], 0.0)
    return out
