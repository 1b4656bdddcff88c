"""Finite scalar quantization.

Each latent channel i is squashed by ``bound(z) = floor(L_i/2) * tanh(z)``,
then snapped to one of L_i levels. Integer levels live in
``[-floor(L_i/2), L_i-1-floor(L_i/2)]``; the real-valued grid is the levels
shifted by +0.5 on even-L channels so it stays symmetric around zero.
Rounding is half-up, which makes the grid a fixed point of the quantizer.
A level tuple maps to a single token index via mixed radix, channel 0 most
significant.
"""

import math

import numpy as np

from .nn.tensor import _accum, _make, as_tensor

DEFAULT_LEVELS = (8, 8, 8)


def codebook_size(levels) -> int:
    """Product of level counts. Errors if the index would overflow 32 bits."""
    if isinstance(levels, LevelSpec):
        levels = levels.levels
    size = math.prod(int(l) for l in levels)
    if size > 2**32:
        raise OverflowError(f"codebook size {size} exceeds the 32-bit index width")
    return size


class LevelSpec:
    """Per-channel level counts defining the quantizer grid."""

    __slots__ = ("levels", "half", "offset", "kmin", "kmax")

    def __init__(self, levels):
        levels = tuple(int(l) for l in levels)
        if not levels:
            raise ValueError("LevelSpec needs at least one channel")
        if any(l < 2 for l in levels):
            raise ValueError("every level count must be >= 2")
        codebook_size(levels)
        self.levels = levels
        self.half = np.array([l // 2 for l in levels], dtype=np.float64)
        self.offset = np.array([0.5 if l % 2 == 0 else 0.0 for l in levels])
        self.kmin = np.array([-(l // 2) for l in levels], dtype=np.int64)
        self.kmax = np.array([l - 1 - l // 2 for l in levels], dtype=np.int64)

    @property
    def d(self) -> int:
        return len(self.levels)

    @property
    def size(self) -> int:
        return codebook_size(self.levels)

    def __len__(self):
        return len(self.levels)

    def __eq__(self, other):
        return isinstance(other, LevelSpec) and self.levels == other.levels

    def __hash__(self):
        return hash(self.levels)

    def __repr__(self):
        return f"LevelSpec({self.levels})"


def _check_channels(z, spec: LevelSpec):
    if z.shape[-1] != spec.d:
        raise ValueError(f"last axis {z.shape[-1]} != {spec.d} quantizer channels")


def bound(z, spec: LevelSpec) -> np.ndarray:
    """Squash each channel into (-floor(L/2), floor(L/2))."""
    z = np.asarray(z, dtype=np.float64)
    _check_channels(z, spec)
    return spec.half * np.tanh(z)


def quantize_levels(z, spec: LevelSpec) -> np.ndarray:
    """Integer levels nearest to bound(z), ties rounded up, clipped to range."""
    b = bound(z, spec)
    k = np.floor(b - spec.offset + 0.5).astype(np.int64)
    return np.clip(k, spec.kmin, spec.kmax)


def quantize(z, spec: LevelSpec):
    """Quantize plain arrays: returns (levels, grid values, indices)."""
    k = quantize_levels(z, spec)
    return k, k + spec.offset, index_encode(k, spec)


def quantize_ste(z, spec: LevelSpec, variant: str = "bounded"):
    """Differentiable quantize: forward emits grid values, backward a surrogate.

    variant "bounded": gradient of the bounding function (default).
    variant "literal": identity gradient, ignoring saturation.
    Returns (values Tensor, levels array, indices array).
    """
    if variant not in ("bounded", "literal"):
        raise ValueError(f"unknown STE variant: {variant!r}")
    z = as_tensor(z)
    _check_channels(z.data, spec)
    t = np.tanh(z.data)
    k = np.clip(np.floor(spec.half * t - spec.offset + 0.5).astype(np.int64), spec.kmin, spec.kmax)
    values = k + spec.offset

    if variant == "bounded":
        def grad_fn(g):
            _accum(z, g * spec.half * (1.0 - t * t))
    else:
        def grad_fn(g):
            _accum(z, g)

    return _make(values, (z,), grad_fn), k, index_encode(k, spec)


def _weights(spec: LevelSpec) -> np.ndarray:
    # place value of each channel digit; channel 0 most significant
    w = np.ones(spec.d, dtype=np.int64)
    for i in range(spec.d - 2, -1, -1):
        w[i] = w[i + 1] * spec.levels[i + 1]
    return w


def index_encode(levels, spec: LevelSpec) -> np.ndarray:
    """Level tuples (..., d) -> indices (...,) by mixed-radix positional code."""
    levels = np.asarray(levels, dtype=np.int64)
    _check_channels(levels, spec)
    if np.any(levels < spec.kmin) or np.any(levels > spec.kmax):
        raise ValueError("level out of range for spec")
    digits = levels - spec.kmin
    return (digits * _weights(spec)).sum(axis=-1)


def index_decode(index, spec: LevelSpec) -> np.ndarray:
    """Indices (...,) -> level tuples (..., d). Inverse of index_encode."""
    index = np.asarray(index, dtype=np.int64)
    size = spec.size
    if np.any(index < 0) or np.any(index >= size):
        raise ValueError(f"index out of range [0, {size})")
    digits = np.empty(index.shape + (spec.d,), dtype=np.int64)
    rem = index.copy()
    for i in range(spec.d - 1, -1, -1):
        digits[..., i] = rem % spec.levels[i]
        rem //= spec.levels[i]
    return digits + spec.kmin


def lookup(index, spec: LevelSpec) -> np.ndarray:
    """Indices -> real grid values (dequantization)."""
    return index_decode(index, spec) + spec.offset
