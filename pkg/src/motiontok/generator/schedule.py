"""Cosine mask schedule for iterative masked-token generation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError

__all__ = ["MaskSchedule", "gamma", "mask_tokens", "remask_count"]


def gamma(tau: float) -> float:
    """Masking ratio gamma(tau) = cos(pi*tau/2), defined on [0, 1)."""
    t = float(tau)
    if not (0.0 <= t < 1.0) or not math.isfinite(t):
        raise ConfigError(f"tau must lie in [0, 1), got {tau!r}")
    return math.cos(0.5 * math.pi * t)


def remask_count(k: int, iterations: int, n: int) -> int:
    """Number of lowest-confidence tokens to re-mask after pass k of K.

    ceil(cos(pi*k/2K) * n).  The k == K case is pinned to exactly zero:
    cos(pi/2) evaluates to ~6e-17 in floats and ceil would turn that into
    1, breaking sampler termination.
    """
    k = int(k)
    iterations = int(iterations)
    n = int(n)
    if iterations < 1 or not (1 <= k <= iterations):
        raise ConfigError(f"need 1 <= k <= K, got k={k}, K={iterations}")
    if n < 0:
        raise ConfigError(f"token count must be >= 0, got {n}")
    if k == iterations:
        return 0
    return math.ceil(math.cos(0.5 * math.pi * k / iterations) * n)


def mask_tokens(ids, tau: float, rng: np.random.Generator, mask_id: int):
    """Mask ceil(gamma(tau) * n) uniformly chosen positions.

    Returns (masked copy, sorted masked positions).  Selection is without
    replacement and deterministic given the generator state.
    """
    ids = np.asarray(ids)
    if ids.ndim != 1 or ids.size < 1:
        raise ConfigError("mask_tokens expects a non-empty 1-D id array")
    n = ids.size
    m = math.ceil(gamma(tau) * n)
    positions = np.sort(rng.choice(n, size=m, replace=False))
    out = ids.copy()
    out[positions] = mask_id
    return out, positions


@dataclass(frozen=True)
class MaskSchedule:
    """Schedule family + iteration budget for the sampler."""

    kind: str = "cosine"
    iterations: int = 5

    def __post_init__(self):
        if self.kind != "cosine":
            raise ConfigError(f"unknown schedule kind {self.kind!r}")
        if int(self.iterations) < 1:
            raise ConfigError("iterations must be >= 1")

    def gamma(self, tau: float) -> float:
        return gamma(tau)

    def remask_count(self, k: int, n: int) -> int:
        return remask_count(k, self.iterations, n)
