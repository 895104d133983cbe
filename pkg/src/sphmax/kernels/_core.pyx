# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled shifted-sum interpolation kernels.

Semantics, corner order, and floating-point accumulation order are kept
identical to the pure-numpy fallback so both backends agree exactly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


cdef inline double _get1(const double[::1] v, Py_ssize_t i) noexcept nogil:
    if 0 <= i < v.shape[0]:
        return v[i]
    return 0.0


cdef inline double _get2(const double[:, ::1] v, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    if 0 <= i < v.shape[0] and 0 <= j < v.shape[1]:
        return v[i, j]
    return 0.0


cdef inline double _get3(const double[:, :, ::1] v, Py_ssize_t i, Py_ssize_t j,
                         Py_ssize_t k) noexcept nogil:
    if 0 <= i < v.shape[0] and 0 <= j < v.shape[1] and 0 <= k < v.shape[2]:
        return v[i, j, k]
    return 0.0


cdef void _shifted_sum_1d(const double[::1] v, const double[:, ::1] off,
                          const double[::1] w, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = v.shape[0], nk = off.shape[0], i, k
    cdef Py_ssize_t b0
    cdef double f0, w0, w1, acc
    for k in range(nk):
        b0 = <Py_ssize_t>floor(off[k, 0])
        f0 = off[k, 0] - b0
        w0 = 1.0 * (1.0 - f0)
        w1 = 1.0 * f0
        for i in range(n):
            acc = w0 * _get1(v, i - b0)
            acc += w1 * _get1(v, i - b0 - 1)
            out[i] += w[k] * acc


cdef void _shifted_sum_2d(const double[:, ::1] v, const double[:, ::1] off,
                          const double[::1] w, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n0 = v.shape[0], n1 = v.shape[1], nk = off.shape[0], i, j, k
    cdef Py_ssize_t b0, b1
    cdef double f0, f1, w00, w01, w10, w11, acc
    for k in range(nk):
        b0 = <Py_ssize_t>floor(off[k, 0])
        b1 = <Py_ssize_t>floor(off[k, 1])
        f0 = off[k, 0] - b0
        f1 = off[k, 1] - b1
        w00 = (1.0 * (1.0 - f0)) * (1.0 - f1)
        w01 = (1.0 * (1.0 - f0)) * f1
        w10 = (1.0 * f0) * (1.0 - f1)
        w11 = (1.0 * f0) * f1
        for i in range(n0):
            for j in range(n1):
                acc = w00 * _get2(v, i - b0, j - b1)
                acc += w01 * _get2(v, i - b0, j - b1 - 1)
                acc += w10 * _get2(v, i - b0 - 1, j - b1)
                acc += w11 * _get2(v, i - b0 - 1, j - b1 - 1)
                out[i, j] += w[k] * acc


cdef void _shifted_sum_3d(const double[:, :, ::1] v, const double[:, ::1] off,
                          const double[::1] w, double[:, :, ::1] out) noexcept nogil:
    cdef Py_ssize_t n0 = v.shape[0], n1 = v.shape[1], n2 = v.shape[2]
    cdef Py_ssize_t nk = off.shape[0], i, j, m, k
    cdef Py_ssize_t b0, b1, b2
    cdef double f0, f1, f2, acc
    cdef double cw[8]
    for k in range(nk):
        b0 = <Py_ssize_t>floor(off[k, 0])
        b1 = <Py_ssize_t>floor(off[k, 1])
        b2 = <Py_ssize_t>floor(off[k, 2])
        f0 = off[k, 0] - b0
        f1 = off[k, 1] - b1
        f2 = off[k, 2] - b2
        cw[0] = ((1.0 * (1.0 - f0)) * (1.0 - f1)) * (1.0 - f2)
        cw[1] = ((1.0 * (1.0 - f0)) * (1.0 - f1)) * f2
        cw[2] = ((1.0 * (1.0 - f0)) * f1) * (1.0 - f2)
        cw[3] = ((1.0 * (1.0 - f0)) * f1) * f2
        cw[4] = ((1.0 * f0) * (1.0 - f1)) * (1.0 - f2)
        cw[5] = ((1.0 * f0) * (1.0 - f1)) * f2
        cw[6] = ((1.0 * f0) * f1) * (1.0 - f2)
        cw[7] = ((1.0 * f0) * f1) * f2
        for i in range(n0):
            for j in range(n1):
                for m in range(n2):
                    acc = cw[0] * _get3(v, i - b0, j - b1, m - b2)
                    acc += cw[1] * _get3(v, i - b0, j - b1, m - b2 - 1)
                    acc += cw[2] * _get3(v, i - b0, j - b1 - 1, m - b2)
                    acc += cw[3] * _get3(v, i - b0, j - b1 - 1, m - b2 - 1)
                    acc += cw[4] * _get3(v, i - b0 - 1, j - b1, m - b2)
                    acc += cw[5] * _get3(v, i - b0 - 1, j - b1, m - b2 - 1)
                    acc += cw[6] * _get3(v, i - b0 - 1, j - b1 - 1, m - b2)
                    acc += cw[7] * _get3(v, i - b0 - 1, j - b1 - 1, m - b2 - 1)
                    out[i, j, m] += w[k] * acc


cdef void _shifted_product_sum_2d(const double[:, ::1] va, const double[:, ::1] vb,
                                  const double[:, ::1] offa, const double[:, ::1] offb,
                                  const double[::1] w, double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t n0 = va.shape[0], n1 = va.shape[1], nk = offa.shape[0], i, j, k
    cdef Py_ssize_t a0, a1, c0, c1
    cdef double fa0, fa1, fb0, fb1
    cdef double aw00, aw01, aw10, aw11, bw00, bw01, bw10, bw11, acca, accb
    for k in range(nk):
        a0 = <Py_ssize_t>floor(offa[k, 0])
        a1 = <Py_ssize_t>floor(offa[k, 1])
        fa0 = offa[k, 0] - a0
        fa1 = offa[k, 1] - a1
        c0 = <Py_ssize_t>floor(offb[k, 0])
        c1 = <Py_ssize_t>floor(offb[k, 1])
        fb0 = offb[k, 0] - c0
        fb1 = offb[k, 1] - c1
        aw00 = (1.0 * (1.0 - fa0)) * (1.0 - fa1)
        aw01 = (1.0 * (1.0 - fa0)) * fa1
        aw10 = (1.0 * fa0) * (1.0 - fa1)
        aw11 = (1.0 * fa0) * fa1
        bw00 = (1.0 * (1.0 - fb0)) * (1.0 - fb1)
        bw01 = (1.0 * (1.0 - fb0)) * fb1
        bw10 = (1.0 * fb0) * (1.0 - fb1)
        bw11 = (1.0 * fb0) * fb1
        for i in range(n0):
            for j in range(n1):
                acca = aw00 * _get2(va, i - a0, j - a1)
                acca += aw01 * _get2(va, i - a0, j - a1 - 1)
                acca += aw10 * _get2(va, i - a0 - 1, j - a1)
                acca += aw11 * _get2(va, i - a0 - 1, j - a1 - 1)
                accb = bw00 * _get2(vb, i - c0, j - c1)
                accb += bw01 * _get2(vb, i - c0, j - c1 - 1)
                accb += bw10 * _get2(vb, i - c0 - 1, j - c1)
                accb += bw11 * _get2(vb, i - c0 - 1, j - c1 - 1)
                out[i, j] += w[k] * (acca * accb)


def shifted_sum(values, offsets, weights):
    values = np.ascontiguousarray(values, dtype=np.float64)
    offsets = np.ascontiguousarray(np.atleast_2d(offsets), dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    out = np.zeros_like(values)
    if values.ndim == 1:
        _shifted_sum_1d(values, offsets, weights, out)
    elif values.ndim == 2:
        _shifted_sum_2d(values, offsets, weights, out)
    elif values.ndim == 3:
        _shifted_sum_3d(values, offsets, weights, out)
    else:
        raise ValueError(f"unsupported ndim {values.ndim}")
    return out


def shifted_product_sum(f1, f2, offsets1, offsets2, weights):
    f1 = np.ascontiguousarray(f1, dtype=np.float64)
    f2 = np.ascontiguousarray(f2, dtype=np.float64)
    offsets1 = np.ascontiguousarray(np.atleast_2d(offsets1), dtype=np.float64)
    offsets2 = np.ascontiguousarray(np.atleast_2d(offsets2), dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    if f1.ndim == 2:
        out = np.zeros_like(f1)
        _shifted_product_sum_2d(f1, f2, offsets1, offsets2, weights, out)
        return out
    from . import _fallback
    return _fallback.shifted_product_sum(f1, f2, offsets1, offsets2, weights)
