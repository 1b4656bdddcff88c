"""Time the compiled convolution kernels against the numpy fallback.

Shapes mirror the codec's encoder/decoder stacks (hidden width 64,
kernel sizes 3 and 4, strides 1 and 2).  Run:

    python3 benchmarks/bench_kernels.py [--batch 32] [--frames 64] [--reps 50]
"""
import argparse
import time

import numpy as np

from motiontok.nn.kernels import numpy_backend

try:
    from motiontok.nn.kernels import _fastconv as compiled
except ImportError:
    compiled = None

# (name, fn-name, x shape, w shape, stride, padding)
CASES = [
    ("enc stem k4 s2", "conv1d", (None, None, 67), (4, 67, 64), 2, 1),
    ("enc res   k3 s1", "conv1d", (None, None, 64), (3, 64, 64), 1, 1),
    ("dec up    k4 s2", "convtr1d", (None, None, 64), (4, 64, 64), 2, 1),
]


def _time(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def run(batch: int, frames: int, reps: int):
    rng = np.random.default_rng(0)
    print(f"batch={batch} frames={frames} reps={reps} (best-of timing, ms)")
    print(f"{'case':<18} {'dir':<4} {'numpy':>9} {'cython':>9} {'speedup':>8}")
    for name, kind, xs, ws, stride, pad in CASES:
        x = rng.normal(size=(batch, frames, xs[2]))
        w = rng.normal(size=ws)
        fwd_np = getattr(numpy_backend, f"{kind}_fwd")
        bwd_np = getattr(numpy_backend, f"{kind}_bwd")
        y = fwd_np(x, w, stride, pad)
        gy = rng.normal(size=y.shape)
        rows = [("fwd", lambda m: (lambda: getattr(m, f"{kind}_fwd")(x, w, stride, pad))),
                ("bwd", lambda m: (lambda: getattr(m, f"{kind}_bwd")(x, w, gy, stride, pad)))]
        for tag, make in rows:
            t_np = _time(make(numpy_backend), reps)
            if compiled is None:
                print(f"{name:<18} {tag:<4} {t_np * 1e3:>9.3f} {'-':>9} {'-':>8}")
                continue
            t_cy = _time(make(compiled), reps)
            print(f"{name:<18} {tag:<4} {t_np * 1e3:>9.3f} {t_cy * 1e3:>9.3f} "
                  f"{t_np / t_cy:>7.2f}x")
    if compiled is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--batch", type=int, default=32)
    ap.add_argument("--frames", type=int, default=64)
    ap.add_argument("--reps", type=int, default=50)
    a = ap.parse_args()
    run(a.batch, a.frames, a.reps)
