"""Finite-difference gradient verification."""

import numpy as np

from .tensor import backward


def finite_diff_check(fn, tensors, h: float = 1e-4, rng=None, n_probe: int = 6):
    """Compare tape gradients of scalar fn(*tensors) against central differences.

    Probes up to n_probe random entries of each tensor (all entries when the
    tensor is small). Returns the worst relative error
    |analytic - numeric| / max(1, |analytic|, |numeric|).
    """
    rng = rng or np.random.default_rng(0)
    for t in tensors:
        t.grad = None
    loss = fn(*tensors)
    backward(loss)
    worst = 0.0
    for t in tensors:
        g = t.grad if t.grad is not None else np.zeros_like(t.data)
        flat = t.data.reshape(-1)
        n = flat.size
        idxs = range(n) if n <= n_probe else rng.choice(n, size=n_probe, replace=False)
        for i in idxs:
            keep = flat[i]
            flat[i] = keep + h
            up = float(fn(*tensors).data)
            flat[i] = keep - h
            dn = float(fn(*tensors).data)
            flat[i] = keep
            numeric = (up - dn) / (2 * h)
            analytic = float(g.reshape(-1)[i])
            rel = abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))
            worst = max(worst, rel)
    return worst
