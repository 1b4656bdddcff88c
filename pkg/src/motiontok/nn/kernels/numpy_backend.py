"""Pure-numpy convolution kernels (fallback when the compiled core is absent).

All arrays are float64 and time-major: inputs ``(B, T, C_in)``, kernels
``(K, C_in, C_out)``. Convolution is cross-correlation (no kernel flip).
"""

import numpy as np


def conv1d_fwd(x, w, stride, padding):
    b, t, ci = x.shape
    k = w.shape[0]
    t_out = (t + 2 * padding - k) // stride + 1
    if padding:
        xp = np.zeros((b, t + 2 * padding, ci))
        xp[:, padding : padding + t] = x
    else:
        xp = x
    y = np.zeros((b, t_out, w.shape[2]))
    for kk in range(k):
        y += xp[:, kk : kk + stride * t_out : stride, :] @ w[kk]
    return y


def conv1d_bwd(x, w, gy, stride, padding):
    b, t, ci = x.shape
    k = w.shape[0]
    t_out = gy.shape[1]
    tp = t + 2 * padding
    xp = np.zeros((b, tp, ci))
    xp[:, padding : padding + t] = x
    gxp = np.zeros((b, tp, ci))
    gw = np.zeros_like(w)
    for kk in range(k):
        sl = slice(kk, kk + stride * t_out, stride)
        gxp[:, sl, :] += gy @ w[kk].T
        gw[kk] = np.tensordot(xp[:, sl, :], gy, axes=([0, 1], [0, 1]))
    gx = gxp[:, padding : padding + t] if padding else gxp
    return np.ascontiguousarray(gx), gw


def convtr1d_fwd(x, w, stride, padding):
    b, t, ci = x.shape
    k, _, co = w.shape
    t_full = (t - 1) * stride + k
    y_full = np.zeros((b, t_full, co))
    for kk in range(k):
        y_full[:, kk : kk + stride * t : stride, :] += x @ w[kk]
    if padding:
        return np.ascontiguousarray(y_full[:, padding : t_full - padding])
    return y_full


def convtr1d_bwd(x, w, gy, stride, padding):
    b, t, ci = x.shape
    k = w.shape[0]
    t_full = (t - 1) * stride + k
    if padding:
        gy_full = np.zeros((b, t_full, w.shape[2]))
        gy_full[:, padding : t_full - padding] = gy
    else:
        gy_full = gy
    gx = np.zeros_like(x)
    gw = np.zeros_like(w)
    for kk in range(k):
        sl = slice(kk, kk + stride * t, stride)
        gx += gy_full[:, sl, :] @ w[kk].T
        gw[kk] = np.tensordot(x, gy_full[:, sl, :], axes=([0, 1], [0, 1]))
    return gx, gw
