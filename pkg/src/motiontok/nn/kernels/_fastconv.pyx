# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled conv1d / transposed-conv1d kernels.

Same contracts as numpy_backend: x (B, T, C_in) float64 C-contiguous,
w (K, C_in, C_out). Per-tap slices are handed to BLAS dgemm directly
(strided rows via the leading-dimension argument), so there is one GEMM
per (batch, tap) and no temporaries.
"""

import numpy as np

from scipy.linalg.cython_blas cimport dgemm


cdef inline void _gemm_rm(double* a, double* b, double* c,
                          int m, int n, int k,
                          int lda, int ldb, int ldc,
                          bint ta, bint tb, double beta) noexcept nogil:
    # row-major C(m,n) += op(A)(m,k) @ op(B)(k,n); ld* are row strides
    cdef char fa = b'T' if ta else b'N'
    cdef char fb = b'T' if tb else b'N'
    cdef double alpha = 1.0
    dgemm(&fb, &fa, &n, &m, &k, &alpha, b, &ldb, a, &lda, &beta, c, &ldc)


cdef inline double* _ptr(double[:, :, ::1] v, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    return &v[i, j, 0]


def conv1d_fwd(x_arr, w_arr, int stride, int padding):
    cdef double[:, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef double[:, :, ::1] w = np.ascontiguousarray(w_arr, dtype=np.float64)
    cdef int b = x.shape[0], t = x.shape[1], ci = x.shape[2]
    cdef int k = w.shape[0], co = w.shape[2]
    cdef int t_out = (t + 2 * padding - k) // stride + 1
    xp_arr = np.zeros((b, t + 2 * padding, ci)) if padding else np.asarray(x)
    if padding:
        xp_arr[:, padding:padding + t] = x
    cdef double[:, :, ::1] xp = xp_arr
    y_arr = np.zeros((b, t_out, co))
    cdef double[:, :, ::1] y = y_arr
    cdef int ib, kk
    if t_out <= 0:
        raise ValueError("conv1d output length <= 0")
    with nogil:
        for ib in range(b):
            for kk in range(k):
                _gemm_rm(_ptr(xp, ib, kk), _ptr(w, kk, 0), _ptr(y, ib, 0),
                         t_out, co, ci, stride * ci, co, co, False, False, 1.0)
    return y_arr


def conv1d_bwd(x_arr, w_arr, gy_arr, int stride, int padding):
    cdef double[:, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef double[:, :, ::1] w = np.ascontiguousarray(w_arr, dtype=np.float64)
    cdef double[:, :, ::1] gy = np.ascontiguousarray(gy_arr, dtype=np.float64)
    cdef int b = x.shape[0], t = x.shape[1], ci = x.shape[2]
    cdef int k = w.shape[0], co = w.shape[2]
    cdef int t_out = gy.shape[1]
    cdef int tp = t + 2 * padding
    gxp_arr = np.zeros((b, tp, ci))
    xp_arr = np.zeros((b, tp, ci)) if padding else np.asarray(x)
    if padding:
        xp_arr[:, padding:padding + t] = x
    cdef double[:, :, ::1] xp = xp_arr
    cdef double[:, :, ::1] gxp = gxp_arr
    gw_arr = np.zeros((k, ci, co))
    cdef double[:, :, ::1] gw = gw_arr
    cdef int ib, kk
    with nogil:
        for ib in range(b):
            for kk in range(k):
                # gx slice += gy @ w[k]^T
                _gemm_rm(_ptr(gy, ib, 0), _ptr(w, kk, 0), _ptr(gxp, ib, kk),
                         t_out, ci, co, co, co, stride * ci, False, True, 1.0)
                # gw[k] += x_slice^T @ gy
                _gemm_rm(_ptr(xp, ib, kk), _ptr(gy, ib, 0), _ptr(gw, kk, 0),
                         ci, co, t_out, stride * ci, co, co, True, False, 1.0)
    gx_arr = gxp_arr[:, padding:padding + t] if padding else gxp_arr
    return np.ascontiguousarray(gx_arr), gw_arr


def convtr1d_fwd(x_arr, w_arr, int stride, int padding):
    cdef double[:, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef double[:, :, ::1] w = np.ascontiguousarray(w_arr, dtype=np.float64)
    cdef int b = x.shape[0], t = x.shape[1], ci = x.shape[2]
    cdef int k = w.shape[0], co = w.shape[2]
    cdef int t_full = (t - 1) * stride + k
    y_arr = np.zeros((b, t_full, co))
    cdef double[:, :, ::1] y = y_arr
    cdef int ib, kk
    with nogil:
        for ib in range(b):
            for kk in range(k):
                _gemm_rm(_ptr(x, ib, 0), _ptr(w, kk, 0), _ptr(y, ib, kk),
                         t, co, ci, ci, co, stride * co, False, False, 1.0)
    if padding:
        return np.ascontiguousarray(y_arr[:, padding:t_full - padding])
    return y_arr


def convtr1d_bwd(x_arr, w_arr, gy_arr, int stride, int padding):
    cdef double[:, :, ::1] x = np.ascontiguousarray(x_arr, dtype=np.float64)
    cdef double[:, :, ::1] w = np.ascontiguousarray(w_arr, dtype=np.float64)
    cdef int b = x.shape[0], t = x.shape[1], ci = x.shape[2]
    cdef int k = w.shape[0], co = w.shape[2]
    cdef int t_full = (t - 1) * stride + k
    gy_full_arr = np.zeros((b, t_full, co))
    gy_full_arr[:, padding:t_full - padding] = gy_arr
    cdef double[:, :, ::1] gyf = gy_full_arr
    gx_arr = np.zeros((b, t, ci))
    gw_arr = np.zeros((k, ci, co))
    cdef double[:, :, ::1] gx = gx_arr
    cdef double[:, :, ::1] gw = gw_arr
    cdef int ib, kk
    with nogil:
        for ib in range(b):
            for kk in range(k):
                # gx += gy_slice @ w[k]^T
                _gemm_rm(_ptr(gyf, ib, kk), _ptr(w, kk, 0), _ptr(gx, ib, 0),
                         t, ci, co, stride * co, co, ci, False, True, 1.0)
                # gw[k] += x^T @ gy_slice
                _gemm_rm(_ptr(x, ib, 0), _ptr(gyf, ib, kk), _ptr(gw, kk, 0),
                         ci, co, t, ci, stride * co, co, True, False, 1.0)
    return gx_arr, gw_arr
