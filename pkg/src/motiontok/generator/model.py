"""Bidirectional masked-token transformer over flattened token sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .. import checkpoint as ckpt_io
from ..errors import ConfigError, FormatError
from ..nn import functional as F
from ..nn.params import ParamSet
from ..nn.tensor import Tensor, matmul, relu, reshape, take_slice, transpose
from .layout import TokenLayout

__all__ = ["GeneratorConfig", "GeneratorCheckpoint", "init_generator", "forward_ids", "nll_loss"]


@dataclass(frozen=True)
class GeneratorConfig:
    n_blocks: int = 4
    n_heads: int = 4
    width: int = 128
    mlp_ratio: int = 2
    # label id used for condition dropout / unconditioned sampling; None
    # when the model has no unconditioned mode (edit generators)
    null_label: Optional[int] = None

    def __post_init__(self):
        if self.n_blocks < 1 or self.n_heads < 1 or self.width < self.n_heads:
            raise ConfigError("bad transformer dimensions")
        if self.width % self.n_heads != 0:
            raise ConfigError("width must be divisible by n_heads")
        if self.mlp_ratio < 1:
            raise ConfigError("mlp_ratio must be >= 1")

    def to_dict(self) -> dict:
        return {
            "n_blocks": self.n_blocks,
            "n_heads": self.n_heads,
            "width": self.width,
            "mlp_ratio": self.mlp_ratio,
            "null_label": self.null_label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        return cls(
            n_blocks=int(d["n_blocks"]),
            n_heads=int(d["n_heads"]),
            width=int(d["width"]),
            mlp_ratio=int(d["mlp_ratio"]),
            null_label=None if d.get("null_label") is None else int(d["null_label"]),
        )


def init_generator(layout: TokenLayout, config: GeneratorConfig, seed: int = 0) -> ParamSet:
    rng = np.random.default_rng([4021, seed])
    w = config.width
    ps = ParamSet()

    def lin(name, fan_in, fan_out):
        std = math.sqrt(1.0 / fan_in)
        ps.add(f"{name}_w", rng.normal(0.0, std, size=(fan_in, fan_out)))
        ps.add(f"{name}_b", np.zeros(fan_out))

    ps.add("tok_emb", rng.normal(0.0, 0.02, size=(layout.vocab, w)))
    ps.add("pos_emb", rng.normal(0.0, 0.02, size=(layout.cond_len + layout.total, w)))
    # row 0 marks the condition slot, rows 1..S the scales
    ps.add("scale_emb", rng.normal(0.0, 0.02, size=(layout.n_scales + 1, w)))
    for i in range(config.n_blocks):
        ps.add(f"b{i}_ln1_g", np.ones(w))
        ps.add(f"b{i}_ln1_b", np.zeros(w))
        lin(f"b{i}_qkv", w, 3 * w)
        lin(f"b{i}_o", w, w)
        ps.add(f"b{i}_ln2_g", np.ones(w))
        ps.add(f"b{i}_ln2_b", np.zeros(w))
        lin(f"b{i}_m1", w, w * config.mlp_ratio)
        lin(f"b{i}_m2", w * config.mlp_ratio, w)
    ps.add("ln_f_g", np.ones(w))
    ps.add("ln_f_b", np.zeros(w))
    lin("head", w, layout.head_width)
    return ps


@dataclass
class GeneratorCheckpoint:
    config: GeneratorConfig
    layout: TokenLayout
    params: ParamSet
    meta: dict = field(default_factory=dict)
    forward_calls: int = field(default=0, compare=False)

    def __post_init__(self):
        # cached input-prep arrays, recomputed on load
        full_scale = np.concatenate(
            [np.zeros(self.layout.cond_len, dtype=np.int64), self.layout.scale_ids() + 1]
        )
        self._scale_ids_full = full_scale
        self._logit_bias = self.layout.logit_bias()

    def save(self, path) -> None:
        meta = dict(self.meta)
        meta.update(
            kind="generator",
            config=self.config.to_dict(),
            layout=self.layout.to_dict(),
        )
        ckpt_io.save_checkpoint(path, {"params": self.params}, {}, meta)

    @classmethod
    def load(cls, path) -> "GeneratorCheckpoint":
        states, _, meta = ckpt_io.load_checkpoint(path)
        if meta.get("kind") != "generator":
            raise FormatError("bad_checkpoint", f"expected a generator checkpoint, got {meta.get('kind')!r}")
        config = GeneratorConfig.from_dict(meta.pop("config"))
        layout = TokenLayout.from_dict(meta.pop("layout"))
        meta.pop("kind")
        params = init_generator(layout, config)
        params.load_state_dict(states["params"])
        return cls(config=config, layout=layout, params=params, meta=meta)


def _attention(h, ps: ParamSet, i: int, n_heads: int, collect=None):
    b, L, w = h.shape
    dh = w // n_heads
    x = F.layer_norm(h, ps[f"b{i}_ln1_g"], ps[f"b{i}_ln1_b"])
    qkv = F.linear(x, ps[f"b{i}_qkv_w"], ps[f"b{i}_qkv_b"])
    # (B, L, 3W) -> (3, B, H, L, dh)
    qkv = transpose(reshape(qkv, (b, L, 3, n_heads, dh)), (2, 0, 3, 1, 4))
    q, k, v = take_slice(qkv, 0), take_slice(qkv, 1), take_slice(qkv, 2)
    scores = matmul(q, transpose(k, (0, 1, 3, 2))) * (1.0 / math.sqrt(dh))
    probs = F.softmax(scores, axis=-1)
    if collect is not None:
        collect.append(probs.data)
    out = matmul(probs, v)  # (B, H, L, dh)
    out = reshape(transpose(out, (0, 2, 1, 3)), (b, L, w))
    return F.linear(out, ps[f"b{i}_o_w"], ps[f"b{i}_o_b"])


def _mlp(h, ps: ParamSet, i: int):
    x = F.layer_norm(h, ps[f"b{i}_ln2_g"], ps[f"b{i}_ln2_b"])
    x = relu(F.linear(x, ps[f"b{i}_m1_w"], ps[f"b{i}_m1_b"]))
    return F.linear(x, ps[f"b{i}_m2_w"], ps[f"b{i}_m2_b"])


def forward_ids(gen: GeneratorCheckpoint, ids: np.ndarray, return_attention: bool = False):
    """Logits over [condition; motion] positions.

    ids: (B, cond_len + total) int array in the layout's id space.
    Returns a Tensor of shape (B, L, head_width); motion rows carry an
    additive bias pinning out-of-codebook columns to -1e30.  With
    return_attention=True also returns the per-block attention arrays.
    """
    layout = gen.layout
    ids = np.asarray(ids, dtype=np.int64)
    L = layout.cond_len + layout.total
    if ids.ndim != 2 or ids.shape[1] != L:
        raise ConfigError(f"ids must be (B, {L}), got {ids.shape}")
    if ids.min() < 0 or ids.max() >= layout.vocab:
        raise ConfigError("token id out of vocabulary range")
    gen.forward_calls += 1
    ps = gen.params
    cfg = gen.config

    h = F.embedding(ps["tok_emb"], ids)
    h = h + F.embedding(ps["pos_emb"], np.arange(L))
    h = h + F.embedding(ps["scale_emb"], gen._scale_ids_full)
    attn = [] if return_attention else None
    for i in range(cfg.n_blocks):
        h = h + _attention(h, ps, i, cfg.n_heads, collect=attn)
        h = h + _mlp(h, ps, i)
    h = F.layer_norm(h, ps["ln_f_g"], ps["ln_f_b"])
    logits = F.linear(h, ps["head_w"], ps["head_b"])
    # restrict motion rows to the owning scale's codebook
    bias = np.zeros((L, layout.head_width))
    bias[layout.cond_len :] = gen._logit_bias
    logits = logits + Tensor(bias)
    if return_attention:
        return logits, attn
    return logits


def nll_loss(logits, targets, mask):
    """Mean NLL of targets at masked motion positions.

    logits (B, n, V) for motion positions only, targets (B, n) local
    codebook indices, mask (B, n) with 1 at supervised positions.
    Raises when the mask is empty: a masked-token loss with nothing
    masked is a caller bug.
    """
    mask = np.asarray(mask)
    if mask.sum() == 0:
        raise ConfigError("nll_loss needs at least one masked position")
    return F.masked_nll(logits, targets, mask)
