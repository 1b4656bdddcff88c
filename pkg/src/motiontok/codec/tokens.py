"""Token sequences and their on-disk format.

Token file, little-endian: magic "MSQT", u16 version, u16 S, then per scale
u16 n_s and u32 codebook size, then all indices as u32 scale-major.
"""

import struct

import numpy as np

from ..errors import FormatError

MAGIC = b"MSQT"
VERSION = 1
_HEAD = struct.Struct("<4sHH")
_SCALE = struct.Struct("<HI")


class TokenSequence:
    """Per-scale index arrays y_s, concatenated scale 1..S."""

    def __init__(self, indices, sizes):
        indices = tuple(np.asarray(y, dtype=np.int64) for y in indices)
        sizes = tuple(int(c) for c in sizes)
        if len(indices) != len(sizes) or not indices:
            raise ValueError("need one index array and codebook size per scale")
        for s, (y, c) in enumerate(zip(indices, sizes)):
            if y.ndim != 1 or y.size < 1:
                raise ValueError(f"scale {s + 1}: indices must be a non-empty 1-D array")
            if c < 1:
                raise ValueError(f"scale {s + 1}: codebook size must be positive")
            if np.any(y < 0) or np.any(y >= c):
                raise ValueError(f"scale {s + 1}: index out of range [0, {c})")
        self.indices = indices
        self.sizes = sizes

    @property
    def n_scales(self) -> int:
        return len(self.indices)

    @property
    def lengths(self):
        return tuple(y.size for y in self.indices)

    @property
    def total(self) -> int:
        return sum(self.lengths)

    def flat(self) -> np.ndarray:
        return np.concatenate(self.indices)

    def replace(self, scale: int, values) -> "TokenSequence":
        """New sequence with scale (0-based) swapped out."""
        idx = list(self.indices)
        idx[scale] = np.asarray(values, dtype=np.int64)
        return TokenSequence(idx, self.sizes)

    def __eq__(self, other):
        return (isinstance(other, TokenSequence)
                and self.sizes == other.sizes
                and self.lengths == other.lengths
                and all(np.array_equal(a, b) for a, b in zip(self.indices, other.indices)))

    def __repr__(self):
        return f"TokenSequence(S={self.n_scales}, lengths={self.lengths})"


def write_tokens(path, y: TokenSequence) -> None:
    parts = [_HEAD.pack(MAGIC, VERSION, y.n_scales)]
    for n_s, size in zip(y.lengths, y.sizes):
        parts.append(_SCALE.pack(n_s, size))
    parts.append(y.flat().astype("<u4").tobytes())
    with open(path, "wb") as f:
        f.write(b"".join(parts))


def read_tokens(path) -> TokenSequence:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise FormatError("bad_magic", f"not a token file: {path}")
    if len(blob) < _HEAD.size:
        raise FormatError("truncated", "incomplete header")
    _, version, n_scales = _HEAD.unpack_from(blob)
    if version != VERSION:
        raise FormatError("bad_version", f"unsupported version {version}")
    if n_scales < 1:
        raise FormatError("bad_header", "scale count must be >= 1")
    off = _HEAD.size
    lengths, sizes = [], []
    for _ in range(n_scales):
        if off + _SCALE.size > len(blob):
            raise FormatError("truncated", "incomplete scale table")
        n_s, size = _SCALE.unpack_from(blob, off)
        off += _SCALE.size
        if n_s < 1 or size < 1:
            raise FormatError("bad_header", f"invalid scale entry n_s={n_s} size={size}")
        lengths.append(n_s)
        sizes.append(size)
    expect = sum(lengths) * 4
    payload = blob[off:]
    if len(payload) < expect:
        raise FormatError("truncated", f"payload {len(payload)} bytes, expected {expect}")
    if len(payload) > expect:
        raise FormatError("length_mismatch", f"payload {len(payload)} bytes, expected {expect}")
    flat = np.frombuffer(payload, dtype="<u4").astype(np.int64)
    out, pos = [], 0
    for n_s in lengths:
        out.append(flat[pos:pos + n_s])
        pos += n_s
    try:
        return TokenSequence(out, sizes)
    except ValueError as e:
        raise FormatError("bad_values", str(e)) from e
