"""Neural-net ops built on the Tensor tape.

Shapes are time-major throughout: sequences are (B, T, C), conv kernels
(K, C_in, C_out). Everything differentiable here registers a custom backward
instead of composing primitives, so the hot paths stay flat.
"""

import numpy as np

from . import kernels
from .tensor import Tensor, _accum, _make, as_tensor


def linear(x, w, b=None):
    """x @ w + b with the leading axes flattened into one GEMM."""
    x, w = as_tensor(x), as_tensor(w)
    if b is not None:
        b = as_tensor(b)
    xd = x.data
    shape = xd.shape
    x2 = xd.reshape(-1, shape[-1])
    y = x2 @ w.data
    if b is not None:
        y += b.data
    out_shape = shape[:-1] + (w.data.shape[-1],)

    def grad_fn(g):
        g2 = g.reshape(-1, g.shape[-1])
        if x.requires_grad:
            _accum(x, (g2 @ w.data.T).reshape(shape))
        if w.requires_grad:
            _accum(w, x2.T @ g2)
        if b is not None and b.requires_grad:
            _accum(b, g2.sum(axis=0))

    parents = (x, w) if b is None else (x, w, b)
    return _make(y.reshape(out_shape), parents, grad_fn)


def conv1d(x, w, b=None, stride: int = 1, padding: int = 0):
    """Cross-correlation along axis 1. x (B,T,Ci), w (K,Ci,Co)."""
    x = as_tensor(x)
    w = as_tensor(w)
    if x.ndim != 3 or w.ndim != 3:
        raise ValueError("conv1d expects x (B,T,Ci) and w (K,Ci,Co)")
    if x.shape[2] != w.shape[1]:
        raise ValueError(f"channel mismatch: x has {x.shape[2]}, w expects {w.shape[1]}")
    y = kernels.conv1d_fwd(x.data, w.data, stride, padding)
    xd, wd = x.data, w.data

    def grad_fn(g):
        gx, gw = kernels.conv1d_bwd(xd, wd, g, stride, padding)
        _accum(x, gx)
        _accum(w, gw)

    out = _make(y, (x, w), grad_fn)
    if b is not None:
        out = out + b
    return out


def conv1d_transpose(x, w, b=None, stride: int = 1, padding: int = 0):
    """Transposed conv along axis 1; output length (T-1)*stride + K - 2*padding."""
    x = as_tensor(x)
    w = as_tensor(w)
    if x.ndim != 3 or w.ndim != 3:
        raise ValueError("conv1d_transpose expects x (B,T,Ci) and w (K,Ci,Co)")
    if x.shape[2] != w.shape[1]:
        raise ValueError(f"channel mismatch: x has {x.shape[2]}, w expects {w.shape[1]}")
    y = kernels.convtr1d_fwd(x.data, w.data, stride, padding)
    xd, wd = x.data, w.data

    def grad_fn(g):
        gx, gw = kernels.convtr1d_bwd(xd, wd, g, stride, padding)
        _accum(x, gx)
        _accum(w, gw)

    out = _make(y, (x, w), grad_fn)
    if b is not None:
        out = out + b
    return out


def interp_coords(src_len: int, out_len: int):
    """Align-corners sample positions: (i0, i1, frac) arrays of length out_len."""
    if src_len < 1 or out_len < 1:
        raise ValueError("interp lengths must be >= 1")
    if src_len == 1 or out_len == 1:
        c = np.zeros(out_len)
    else:
        c = np.arange(out_len) * (src_len - 1) / (out_len - 1)
    i0 = np.minimum(np.floor(c).astype(np.int64), max(src_len - 2, 0))
    i1 = np.minimum(i0 + 1, src_len - 1)
    frac = c - i0
    return i0, i1, frac


def interp_linear(x, out_len: int):
    """Linear resample along axis 1 with endpoints pinned (align corners)."""
    x = as_tensor(x)
    if x.ndim != 3:
        raise ValueError("interp_linear expects (B,T,C)")
    src_len = x.shape[1]
    if out_len == src_len:
        return x
    i0, i1, frac = interp_coords(src_len, out_len)
    w1 = frac[None, :, None]
    w0 = 1.0 - w1
    y = x.data[:, i0, :] * w0 + x.data[:, i1, :] * w1

    def grad_fn(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, (slice(None), i0), g * w0)
        np.add.at(gx, (slice(None), i1), g * w1)
        _accum(x, gx)

    return _make(y, (x,), grad_fn)


def interp_linear_np(x: np.ndarray, out_len: int) -> np.ndarray:
    """interp_linear for plain arrays, (..., T, C) with T on axis -2."""
    src_len = x.shape[-2]
    if out_len == src_len:
        return x
    i0, i1, frac = interp_coords(src_len, out_len)
    w1 = frac[:, None]
    return x[..., i0, :] * (1.0 - w1) + x[..., i1, :] * w1


def _softmax_np(x: np.ndarray, axis: int) -> np.ndarray:
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def softmax(x, axis: int = -1):
    x = as_tensor(x)
    y = _softmax_np(x.data, axis)

    def grad_fn(g):
        dot = (g * y).sum(axis=axis, keepdims=True)
        _accum(x, y * (g - dot))

    return _make(y, (x,), grad_fn)


def log_softmax(x, axis: int = -1):
    x = as_tensor(x)
    z = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=axis, keepdims=True))
    y = z - lse

    def grad_fn(g):
        _accum(x, g - np.exp(y) * g.sum(axis=axis, keepdims=True))

    return _make(y, (x,), grad_fn)


def layer_norm(x, gamma, beta, eps: float = 1e-5):
    """Normalize over the last axis, then scale and shift."""
    x = as_tensor(x)
    gamma = as_tensor(gamma)
    beta = as_tensor(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    y = gamma.data * xhat + beta.data

    def grad_fn(g):
        sum_axes = tuple(range(g.ndim - 1))
        _accum(beta, g.sum(axis=sum_axes))
        _accum(gamma, (g * xhat).sum(axis=sum_axes))
        dxhat = g * gamma.data
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        _accum(x, inv * (dxhat - m1 - xhat * m2))

    return _make(y, (x, gamma, beta), grad_fn)


_GELU_C = float(np.sqrt(2.0 / np.pi))


def gelu(x):
    x = as_tensor(x)
    xd = x.data
    x2 = xd * xd
    t = np.tanh(_GELU_C * (xd + 0.044715 * x2 * xd))
    y = 0.5 * xd * (1.0 + t)

    def grad_fn(g):
        dinner = _GELU_C * (1.0 + 3 * 0.044715 * x2)
        dy = 0.5 * (1.0 + t) + 0.5 * xd * (1.0 - t * t) * dinner
        _accum(x, g * dy)

    return _make(y, (x,), grad_fn)


def embedding(table, idx):
    """Row gather: table (V,D) Tensor, idx int array (...,) -> (...,D)."""
    table = as_tensor(table)
    idx = np.asarray(idx)
    if not np.issubdtype(idx.dtype, np.integer):
        raise TypeError("embedding indices must be integers")
    y = table.data[idx]

    def grad_fn(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx.reshape(-1), g.reshape(-1, table.data.shape[1]))
        _accum(table, gt)

    return _make(y, (table,), grad_fn)


def masked_nll(logits, targets, mask):
    """Mean negative log-likelihood over positions where mask is nonzero.

    logits (B,N,V), targets (B,N) ints, mask (B,N) in {0,1}. Positions with
    mask 0 contribute nothing; an all-zero mask yields loss 0.
    """
    logits = as_tensor(logits)
    targets = np.asarray(targets)
    mask = np.asarray(mask, dtype=np.float64)
    if logits.ndim != 3 or targets.shape != logits.shape[:2] or mask.shape != targets.shape:
        raise ValueError("masked_nll shape mismatch")
    count = mask.sum()
    b_idx, n_idx = np.indices(targets.shape)
    z = logits.data - logits.data.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    logp = z - lse
    if count == 0:
        picked = 0.0
    else:
        picked = -(logp[b_idx, n_idx, targets] * mask).sum() / count

    def grad_fn(g):
        if count == 0:
            return
        p = np.exp(logp)
        p[b_idx, n_idx, targets] -= 1.0
        _accum(logits, p * (mask[..., None] * (float(g) / count)))

    return _make(np.float64(picked), (logits,), grad_fn)


def mse(a, b):
    d = as_tensor(a) - as_tensor(b)
    return (d * d).mean()


def stop_gradient(x) -> Tensor:
    return as_tensor(x).detach()
