"""Flat token layout: position <-> (scale, offset) and the id space.

The transformer sees one flat sequence per sample: a single condition
token followed by every scale's tokens in order.  Content ids pack the
per-scale codebooks back to back, the MASK id sits right after them, and
condition-label ids occupy the tail of the embedding table.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..codec.config import ScaleConfig
from ..codec.tokens import TokenSequence
from ..errors import ConfigError

__all__ = ["TokenLayout"]

# additive logit penalty for columns outside a scale's codebook
NEG = -1e30


@dataclass(frozen=True)
class TokenLayout:
    lengths: Tuple[int, ...]
    sizes: Tuple[int, ...]
    n_labels: int
    cond_len: int = 1

    # derived, filled in __post_init__
    total: int = field(init=False)
    n_content: int = field(init=False)
    mask_id: int = field(init=False)
    label_base: int = field(init=False)
    vocab: int = field(init=False)
    head_width: int = field(init=False)

    def __post_init__(self):
        lengths = tuple(int(v) for v in self.lengths)
        sizes = tuple(int(v) for v in self.sizes)
        if len(lengths) != len(sizes) or not lengths:
            raise ConfigError("lengths and sizes must be equal-length, non-empty")
        if any(v < 1 for v in lengths) or any(v < 2 for v in sizes):
            raise ConfigError("scale lengths must be >= 1 and sizes >= 2")
        if int(self.n_labels) < 1 or int(self.cond_len) != 1:
            raise ConfigError("need n_labels >= 1 and cond_len == 1")
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "n_labels", int(self.n_labels))
        object.__setattr__(self, "total", sum(lengths))
        object.__setattr__(self, "n_content", sum(sizes))
        object.__setattr__(self, "mask_id", self.n_content)
        object.__setattr__(self, "label_base", self.n_content + 1)
        object.__setattr__(self, "vocab", self.n_content + 1 + self.n_labels)
        object.__setattr__(self, "head_width", max(sizes))

    @classmethod
    def from_config(cls, config: ScaleConfig, n_labels: int) -> "TokenLayout":
        return cls(config.n_tokens, config.codebook_sizes(), n_labels)

    @property
    def n_scales(self) -> int:
        return len(self.lengths)

    # -- position bijection -------------------------------------------

    def scale_starts(self) -> np.ndarray:
        """Flat start position of each scale (motion positions only)."""
        return np.concatenate([[0], np.cumsum(self.lengths)[:-1]]).astype(np.int64)

    def position_of(self, scale: int, offset: int) -> int:
        if not (0 <= scale < self.n_scales):
            raise ConfigError(f"scale {scale} out of range")
        if not (0 <= offset < self.lengths[scale]):
            raise ConfigError(f"offset {offset} out of range for scale {scale}")
        return int(self.scale_starts()[scale] + offset)

    def scale_offset_of(self, position: int) -> Tuple[int, int]:
        if not (0 <= position < self.total):
            raise ConfigError(f"position {position} out of range")
        starts = self.scale_starts()
        scale = int(np.searchsorted(starts, position, side="right") - 1)
        return scale, int(position - starts[scale])

    def scale_ids(self) -> np.ndarray:
        """Per flat position, the owning scale index (0-based)."""
        return np.repeat(np.arange(self.n_scales, dtype=np.int64), self.lengths)

    # -- id space ------------------------------------------------------

    def vocab_starts(self) -> np.ndarray:
        """Content-id base per scale."""
        return np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(np.int64)

    def label_id(self, label: int) -> int:
        if not (0 <= int(label) < self.n_labels):
            raise ConfigError(f"label {label} out of range (n_labels={self.n_labels})")
        return self.label_base + int(label)

    def flat_ids(self, tokens: TokenSequence) -> np.ndarray:
        """Pack a TokenSequence into flat content ids, shape (total,)."""
        if tokens.sizes != self.sizes or tokens.lengths != self.lengths:
            raise ConfigError("token sequence does not match layout")
        bases = self.vocab_starts()
        return np.concatenate(
            [np.asarray(ix, dtype=np.int64) + bases[s] for s, ix in enumerate(tokens.indices)]
        )

    def to_tokens(self, flat: np.ndarray) -> TokenSequence:
        """Unpack flat content ids back into a TokenSequence."""
        flat = np.asarray(flat, dtype=np.int64)
        if flat.shape != (self.total,):
            raise ConfigError(f"expected {self.total} flat ids, got shape {flat.shape}")
        starts = self.scale_starts()
        bases = self.vocab_starts()
        out = []
        for s in range(self.n_scales):
            seg = flat[starts[s] : starts[s] + self.lengths[s]] - bases[s]
            if seg.min() < 0 or seg.max() >= self.sizes[s]:
                raise ConfigError(f"flat ids out of range for scale {s}")
            out.append(seg)
        return TokenSequence(tuple(out), self.sizes)

    def local_targets(self, tokens: TokenSequence) -> np.ndarray:
        """Per-position codebook-local indices, shape (total,)."""
        if tokens.sizes != self.sizes or tokens.lengths != self.lengths:
            raise ConfigError("token sequence does not match layout")
        return np.concatenate([np.asarray(ix, dtype=np.int64) for ix in tokens.indices])

    def logit_bias(self) -> np.ndarray:
        """(total, head_width) additive mask: 0 on valid columns, NEG outside."""
        bias = np.full((self.total, self.head_width), NEG)
        starts = self.scale_starts()
        for s in range(self.n_scales):
            bias[starts[s] : starts[s] + self.lengths[s], : self.sizes[s]] = 0.0
        return bias

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "lengths": list(self.lengths),
            "sizes": list(self.sizes),
            "n_labels": self.n_labels,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TokenLayout":
        return cls(tuple(d["lengths"]), tuple(d["sizes"]), int(d["n_labels"]))
