"""Iterative confidence-based sampling and single-pass prediction."""
from __future__ import annotations

from typing import Optional

import numpy as np

from ..codec.tokens import TokenSequence
from ..errors import ConfigError, InvariantError
from ..nn.functional import _softmax_np
from ..nn.tensor import no_grad
from .model import GeneratorCheckpoint, forward_ids
from .schedule import remask_count

__all__ = ["sample", "predict_tokens"]


def _motion_logits(gen: GeneratorCheckpoint, label_id: int, ids: np.ndarray) -> np.ndarray:
    full = np.concatenate([[label_id], ids])[None, :]
    with no_grad():
        out = forward_ids(gen, full)
    return out.data[0, gen.layout.cond_len :, :]


def _draw(probs: np.ndarray, sizes: np.ndarray, rng: Optional[np.random.Generator], greedy: bool):
    """Categorical draw per row; returns (choice, confidence)."""
    if greedy:
        choice = probs.argmax(axis=1)
    else:
        c = np.cumsum(probs, axis=1)
        u = rng.random((probs.shape[0], 1))
        hit = c > u
        choice = hit.argmax(axis=1)
        # cumsum can fall a few ulp short of 1; land on the last valid column
        none = ~hit.any(axis=1)
        choice[none] = sizes[none] - 1
    conf = probs[np.arange(probs.shape[0]), choice]
    return choice, conf


def sample(
    gen: GeneratorCheckpoint,
    label: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    iterations: int = 5,
    initial: Optional[TokenSequence] = None,
    fixed: Optional[np.ndarray] = None,
    greedy: bool = False,
) -> TokenSequence:
    """Fill every non-fixed position over `iterations` confidence passes.

    Pass k predicts all currently masked positions, samples each from its
    categorical, then re-masks the remask_count(k, K, n0) lowest-confidence
    draws of this pass, where n0 counts the initially masked positions.
    Positions marked in `fixed` (or all of `initial` when fixed is omitted)
    are never masked or resampled.
    """
    layout = gen.layout
    if label is None:
        label = gen.config.null_label
    if label is None:
        raise ConfigError("label required: this checkpoint has no unconditioned mode")
    label_id = layout.label_id(label)
    if int(iterations) < 1:
        raise ConfigError("iterations must be >= 1")
    iterations = int(iterations)

    if initial is None:
        ids = np.full(layout.total, layout.mask_id, dtype=np.int64)
        if fixed is not None and np.asarray(fixed).any():
            raise ConfigError("fixed positions require initial tokens")
    else:
        ids = layout.flat_ids(initial)
        if fixed is None:
            fixed = np.ones(layout.total, dtype=bool)
        else:
            fixed = np.asarray(fixed, dtype=bool)
            if fixed.shape != (layout.total,):
                raise ConfigError(f"fixed mask must have shape ({layout.total},)")
        ids[~fixed] = layout.mask_id

    n0 = int((ids == layout.mask_id).sum())
    if n0 == 0:
        return layout.to_tokens(ids)
    if not greedy and rng is None:
        raise ConfigError("categorical sampling needs an rng; pass greedy=True for none")

    bases = np.repeat(layout.vocab_starts(), layout.lengths)
    sizes = np.repeat(np.asarray(layout.sizes, dtype=np.int64), layout.lengths)

    for k in range(1, iterations + 1):
        cur = np.flatnonzero(ids == layout.mask_id)
        logits = _motion_logits(gen, label_id, ids)
        probs = _softmax_np(logits[cur], axis=-1)
        choice, conf = _draw(probs, sizes[cur], rng, greedy)
        ids[cur] = bases[cur] + choice
        r = min(remask_count(k, iterations, n0), cur.size)  # non-increasing; guard only
        if r > 0:
            order = np.argsort(conf, kind="stable")
            ids[cur[order[:r]]] = layout.mask_id

    if (ids == layout.mask_id).any():
        raise InvariantError("sampler left MASK tokens after the final pass")
    return layout.to_tokens(ids)


def predict_tokens(
    gen: GeneratorCheckpoint,
    label: int,
    source: TokenSequence,
    source_mask: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None,
    greedy: bool = True,
) -> TokenSequence:
    """Single forward pass: predict a full token sequence from a source.

    The source tokens stay visible in the input (optionally hidden where
    source_mask is True) and every position is predicted fresh; this is
    the one-iteration translation mode, distinct from iterative filling.
    """
    layout = gen.layout
    label_id = layout.label_id(label)
    ids = layout.flat_ids(source)
    if source_mask is not None:
        source_mask = np.asarray(source_mask, dtype=bool)
        if source_mask.shape != (layout.total,):
            raise ConfigError(f"source_mask must have shape ({layout.total},)")
        ids = ids.copy()
        ids[source_mask] = layout.mask_id
    if not greedy and rng is None:
        raise ConfigError("categorical prediction needs an rng")

    logits = _motion_logits(gen, label_id, ids)
    probs = _softmax_np(logits, axis=-1)
    sizes = np.repeat(np.asarray(layout.sizes, dtype=np.int64), layout.lengths)
    choice, _ = _draw(probs, sizes, rng, greedy)
    return layout.to_tokens(np.repeat(layout.vocab_starts(), layout.lengths) + choice)
