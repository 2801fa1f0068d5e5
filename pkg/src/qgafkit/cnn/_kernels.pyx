# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled conv / max-pool kernels. Same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

NAME = "native"


def _pad(x, int pad):
    if pad == 0:
        return np.ascontiguousarray(x, dtype=np.float64)
    return np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))


cdef void _axpy(double* y, const double* x, double a, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k
    for k in range(n):
        y[k] += a * x[k]


cdef double _dot(const double* x, const double* y, Py_ssize_t n) noexcept nogil:
    # four partial sums; fixed order keeps results reproducible
    cdef double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef Py_ssize_t k = 0
    while k + 4 <= n:
        s0 += x[k] * y[k]
        s1 += x[k + 1] * y[k + 1]
        s2 += x[k + 2] * y[k + 2]
        s3 += x[k + 3] * y[k + 3]
        k += 4
    while k < n:
        s0 += x[k] * y[k]
        k += 1
    return (s0 + s1) + (s2 + s3)


cdef double _sum(const double* x, Py_ssize_t n) noexcept nogil:
    cdef double s = 0.0
    cdef Py_ssize_t k
    for k in range(n):
        s += x[k]
    return s


def conv2d_forward(x, w, b, int pad):
    cdef double[:, :, :, ::1] xp = _pad(x, pad)
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t B = xp.shape[0], Ci = xp.shape[1]
    cdef Py_ssize_t Co = wv.shape[0], K = wv.shape[2]
    cdef Py_ssize_t Ho = xp.shape[2] - K + 1, Wo = xp.shape[3] - K + 1
    out_arr = np.empty((B, Co, Ho, Wo), dtype=np.float64)
    cdef double[:, :, :, ::1] out = out_arr
    cdef Py_ssize_t n, co, ci, kh, kw, oh, ow
    cdef double bias
    cdef double* orow
    with nogil:
        for n in range(B):
            for co in range(Co):
                bias = bv[co]
                for oh in range(Ho):
                    orow = &out[n, co, oh, 0]
                    for ow in range(Wo):
                        orow[ow] = bias
                    for ci in range(Ci):
                        for kh in range(K):
                            for kw in range(K):
                                _axpy(orow, &xp[n, ci, oh + kh, kw], wv[co, ci, kh, kw], Wo)
    return out_arr


def conv2d_backward(dout, x, w, int pad, bint need_dx=True):
    cdef double[:, :, :, ::1] xp = _pad(x, pad)
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, :, :, ::1] dv = np.ascontiguousarray(dout, dtype=np.float64)
    cdef Py_ssize_t B = xp.shape[0], Ci = xp.shape[1]
    cdef Py_ssize_t Co = wv.shape[0], K = wv.shape[2]
    cdef Py_ssize_t Ho = dv.shape[2], Wo = dv.shape[3]
    cdef Py_ssize_t H = x.shape[2], W = x.shape[3]
    dw_arr = np.zeros((Co, Ci, K, K), dtype=np.float64)
    db_arr = np.zeros(Co, dtype=np.float64)
    dxp_arr = np.zeros((B, Ci, xp.shape[2], xp.shape[3]), dtype=np.float64)
    cdef double[:, :, :, ::1] dw = dw_arr
    cdef double[::1] db = db_arr
    cdef double[:, :, :, ::1] dxp = dxp_arr
    cdef Py_ssize_t n, co, ci, kh, kw, oh
    cdef double acc
    cdef const double* drow
    with nogil:
        for co in range(Co):
            acc = 0.0
            for n in range(B):
                for oh in range(Ho):
                    acc = acc + _sum(&dv[n, co, oh, 0], Wo)
            db[co] = acc
        for n in range(B):
            for co in range(Co):
                for oh in range(Ho):
                    drow = &dv[n, co, oh, 0]
                    for ci in range(Ci):
                        for kh in range(K):
                            for kw in range(K):
                                dw[co, ci, kh, kw] += _dot(drow, &xp[n, ci, oh + kh, kw], Wo)
                                if need_dx:
                                    _axpy(&dxp[n, ci, oh + kh, kw], drow, wv[co, ci, kh, kw], Wo)
    if not need_dx:
        return None, dw_arr, db_arr
    dx = np.ascontiguousarray(dxp_arr[:, :, pad:pad + H, pad:pad + W])
    return dx, dw_arr, db_arr


def maxpool2_forward(x):
    cdef double[:, :, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t B = xv.shape[0], C = xv.shape[1]
    cdef Py_ssize_t Ho = xv.shape[2] // 2, Wo = xv.shape[3] // 2
    out_arr = np.empty((B, C, Ho, Wo), dtype=np.float64)
    idx_arr = np.empty((B, C, Ho, Wo), dtype=np.int8)
    cdef double[:, :, :, ::1] out = out_arr
    cdef signed char[:, :, :, ::1] idx = idx_arr
    cdef Py_ssize_t n, c, oh, ow
    cdef double best, v
    cdef signed char arg
    with nogil:
        for n in range(B):
            for c in range(C):
                for oh in range(Ho):
                    for ow in range(Wo):
                        best = xv[n, c, 2 * oh, 2 * ow]
                        arg = 0
                        v = xv[n, c, 2 * oh, 2 * ow + 1]
                        if v > best:
                            best = v
                            arg = 1
                        v = xv[n, c, 2 * oh + 1, 2 * ow]
                        if v > best:
                            best = v
                            arg = 2
                        v = xv[n, c, 2 * oh + 1, 2 * ow + 1]
                        if v > best:
                            best = v
                            arg = 3
                        out[n, c, oh, ow] = best
                        idx[n, c, oh, ow] = arg
    return out_arr, idx_arr


def maxpool2_backward(dout, idx, in_shape):
    cdef double[:, :, :, ::1] dv = np.ascontiguousarray(dout, dtype=np.float64)
    cdef signed char[:, :, :, ::1] iv = np.ascontiguousarray(idx, dtype=np.int8)
    dx_arr = np.zeros(tuple(in_shape), dtype=np.float64)
    cdef double[:, :, :, ::1] dx = dx_arr
    cdef Py_ssize_t B = dv.shape[0], C = dv.shape[1], Ho = dv.shape[2], Wo = dv.shape[3]
    cdef Py_ssize_t n, c, oh, ow
    cdef signed char a
    with nogil:
        for n in range(B):
            for c in range(C):
                for oh in range(Ho):
                    for ow in range(Wo):
                        a = iv[n, c, oh, ow]
                        dx[n, c, 2 * oh + a // 2, 2 * ow + a % 2] = dv[n, c, oh, ow]
    return dx_arr
