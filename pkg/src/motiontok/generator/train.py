"""Masked-token training and single-pass translation training."""
from __future__ import annotations

import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..codec.tokens import TokenSequence
from ..errors import ConfigError, InvariantError
from ..nn.optim import Adam, WarmupCosine
from ..nn.tensor import Tensor, backward, take_slice
from .layout import TokenLayout
from .model import GeneratorCheckpoint, GeneratorConfig, forward_ids, init_generator, nll_loss

__all__ = ["train_generator", "train_edit_generator", "masked_accuracy"]


def _pack(layout: TokenLayout, seqs: Sequence[TokenSequence]) -> Tuple[np.ndarray, np.ndarray]:
    """Stack sequences into (flat ids, local targets) matrices."""
    ids = np.stack([layout.flat_ids(y) for y in seqs])
    tgt = np.stack([layout.local_targets(y) for y in seqs])
    return ids, tgt


def _random_masks(rng: np.random.Generator, rows: int, total: int) -> np.ndarray:
    """Per-row uniform masks of ceil(gamma(tau) * total) positions, tau ~ U[0,1)."""
    tau = rng.random(rows)
    m = np.ceil(np.cos(0.5 * np.pi * tau) * total).astype(np.int64)
    ranks = np.argsort(np.argsort(rng.random((rows, total)), axis=1), axis=1)
    return ranks < m[:, None]


def _fit(
    gen: GeneratorCheckpoint,
    n_items: int,
    make_loss: Callable[[np.random.Generator, np.ndarray], Tensor],
    seed: int,
    epochs: int,
    batch_size: int,
    lr_max: float,
    lr_min: float,
    warmup_frac: float,
    log: Optional[Callable[[str], None]],
) -> list:
    steps_per_epoch = math.ceil(n_items / batch_size)
    total_steps = steps_per_epoch * epochs
    opt = Adam(gen.params.tensors(), lr=lr_max)
    sched = WarmupCosine(opt, lr_max, lr_min, total_steps,
                         warmup_steps=max(1, int(warmup_frac * total_steps)))
    rng = np.random.default_rng([3301, seed])
    curve = []
    for epoch in range(epochs):
        perm = rng.permutation(n_items)
        losses = []
        for i in range(0, n_items, batch_size):
            loss = make_loss(rng, perm[i : i + batch_size])
            value = loss.item()
            if not math.isfinite(value):
                raise InvariantError(
                    f"non-finite loss at epoch {epoch} step {i // batch_size} (lr={opt.lr:.3e})"
                )
            gen.params.zero_grad()
            backward(loss)
            opt.step()
            sched.step()
            losses.append(value)
        curve.append(float(np.mean(losses)))
        if log:
            log(f"epoch {epoch + 1}/{epochs} loss {curve[-1]:.4f}")
    return curve


def train_generator(
    dataset: Sequence[Tuple[TokenSequence, int]],
    n_classes: int,
    seed: int = 0,
    epochs: int = 40,
    batch_size: int = 32,
    lr_max: float = 1e-4,
    lr_min: float = 1e-5,
    warmup_frac: float = 0.05,
    label_dropout: float = 0.1,
    config: Optional[GeneratorConfig] = None,
    log: Optional[Callable[[str], None]] = None,
) -> GeneratorCheckpoint:
    """Masked-token training over labeled token sequences.

    Each step draws tau per sequence, masks ceil(gamma(tau) * n) positions,
    and minimizes mean NLL at the masked positions.  A slice of labels is
    dropped to the null label so the checkpoint can sample unconditioned.
    """
    if not dataset:
        raise ConfigError("empty training dataset")
    if n_classes < 1:
        raise ConfigError("n_classes must be >= 1")
    seqs = [y for y, _ in dataset]
    labels = np.asarray([int(c) for _, c in dataset], dtype=np.int64)
    if labels.min() < 0 or labels.max() >= n_classes:
        raise ConfigError("class label out of range")

    null_label = n_classes
    layout = TokenLayout(seqs[0].lengths, seqs[0].sizes, n_labels=n_classes + 1)
    if config is None:
        config = GeneratorConfig(null_label=null_label)
    elif config.null_label != null_label:
        raise ConfigError(f"config.null_label must be {null_label}")
    gen = GeneratorCheckpoint(config=config, layout=layout,
                              params=init_generator(layout, config, seed))
    ids_all, tgt_all = _pack(layout, seqs)

    def make_loss(rng, rows):
        mask = _random_masks(rng, rows.size, layout.total)
        ids_in = ids_all[rows].copy()
        ids_in[mask] = layout.mask_id
        lab = labels[rows].copy()
        if label_dropout > 0.0:
            lab[rng.random(rows.size) < label_dropout] = null_label
        full = np.concatenate([layout.label_base + lab[:, None], ids_in], axis=1)
        logits = forward_ids(gen, full)
        motion = take_slice(logits, (slice(None), slice(layout.cond_len, None)))
        return nll_loss(motion, tgt_all[rows], mask)

    curve = _fit(gen, len(dataset), make_loss, seed, epochs, batch_size,
                 lr_max, lr_min, warmup_frac, log)
    gen.meta = {
        "task": "generate",
        "epochs": epochs,
        "batch_size": batch_size,
        "seed": seed,
        "n_classes": n_classes,
        "label_dropout": label_dropout,
        "loss_curve": curve,
    }
    return gen


def train_edit_generator(
    dataset: Sequence[Tuple[TokenSequence, TokenSequence, int]],
    n_labels: int,
    seed: int = 0,
    epochs: int = 40,
    batch_size: int = 32,
    lr_max: float = 1e-4,
    lr_min: float = 1e-5,
    warmup_frac: float = 0.05,
    config: Optional[GeneratorConfig] = None,
    log: Optional[Callable[[str], None]] = None,
) -> GeneratorCheckpoint:
    """Single-pass translation training: source tokens + label -> target tokens.

    The source stays fully visible; every motion position is supervised
    with the paired target token.  Identity pairs belong in the dataset
    (the benchmark builder adds them) so the identity label learns to copy.
    """
    if not dataset:
        raise ConfigError("empty training dataset")
    if n_labels < 1:
        raise ConfigError("n_labels must be >= 1")
    src = [a for a, _, _ in dataset]
    tgt = [b for _, b, _ in dataset]
    labels = np.asarray([int(c) for _, _, c in dataset], dtype=np.int64)
    if labels.min() < 0 or labels.max() >= n_labels:
        raise ConfigError("edit label out of range")

    layout = TokenLayout(src[0].lengths, src[0].sizes, n_labels=n_labels)
    if config is None:
        config = GeneratorConfig(null_label=None)
    gen = GeneratorCheckpoint(config=config, layout=layout,
                              params=init_generator(layout, config, seed))
    src_ids, _ = _pack(layout, src)
    _, tgt_local = _pack(layout, tgt)
    full_mask = np.ones((1, layout.total), dtype=np.int64)

    def make_loss(rng, rows):
        full = np.concatenate([layout.label_base + labels[rows, None], src_ids[rows]], axis=1)
        logits = forward_ids(gen, full)
        motion = take_slice(logits, (slice(None), slice(layout.cond_len, None)))
        return nll_loss(motion, tgt_local[rows], np.broadcast_to(full_mask, (rows.size, layout.total)))

    curve = _fit(gen, len(dataset), make_loss, seed, epochs, batch_size,
                 lr_max, lr_min, warmup_frac, log)
    gen.meta = {
        "task": "edit",
        "epochs": epochs,
        "batch_size": batch_size,
        "seed": seed,
        "n_labels": n_labels,
        "loss_curve": curve,
    }
    return gen


def masked_accuracy(
    gen: GeneratorCheckpoint,
    dataset: Sequence[Tuple[TokenSequence, int]],
    tau: float = 0.5,
    seed: int = 0,
) -> float:
    """Fraction of masked positions whose argmax prediction hits the target."""
    from ..nn.tensor import no_grad

    layout = gen.layout
    seqs = [y for y, _ in dataset]
    labels = np.asarray([int(c) for _, c in dataset], dtype=np.int64)
    ids_all, tgt_all = _pack(layout, seqs)
    rng = np.random.default_rng([5417, seed])
    m = math.ceil(math.cos(0.5 * math.pi * tau) * layout.total)
    hits = 0
    totals = 0
    for start in range(0, len(seqs), 64):
        rows = np.arange(start, min(start + 64, len(seqs)))
        mask = np.zeros((rows.size, layout.total), dtype=bool)
        for r in range(rows.size):
            mask[r, rng.choice(layout.total, size=m, replace=False)] = True
        ids_in = ids_all[rows].copy()
        ids_in[mask] = layout.mask_id
        full = np.concatenate([layout.label_base + labels[rows, None], ids_in], axis=1)
        with no_grad():
            logits = forward_ids(gen, full)
        pred = logits.data[:, layout.cond_len :, :].argmax(axis=-1)
        hits += int((pred[mask] == tgt_all[rows][mask]).sum())
        totals += int(mask.sum())
    return hits / max(totals, 1)
