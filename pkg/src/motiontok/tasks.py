"""Task adaptations over frozen codec + generator checkpoints.

Composition is pure token surgery; control, editing, and inpainting pair
the codec's encode/decode with the generator's samplers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .codec.model import CodecCheckpoint, decode, encode, reconstruct
from .codec.tokens import TokenSequence
from .errors import ConfigError
from .generator.model import GeneratorCheckpoint
from .generator.sampling import predict_tokens, sample
from .motion.types import MotionSequence

__all__ = [
    "CompositionRequest",
    "ControlRequest",
    "EditRequest",
    "InpaintSpec",
    "BODY_REGIONS",
    "compose_temporal",
    "compose_spatial",
    "control_generate",
    "edit",
    "inpaint",
]

# feature groups zeroed (and re-generated) per spatial inpainting region;
# pelvis stays kept in both so the global trajectory survives
BODY_REGIONS = {
    "upper": ("torso", "arms", "head"),
    "lower": ("legs",),
}


@dataclass(frozen=True)
class CompositionRequest:
    first: TokenSequence
    second: TokenSequence
    mode: str  # "temporal" | "spatial"
    fraction: Optional[float] = None
    s_split: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("temporal", "spatial"):
            raise ConfigError(f"unknown composition mode {self.mode!r}")
        if self.mode == "temporal" and self.fraction is None:
            raise ConfigError("temporal composition needs a fraction")
        if self.mode == "spatial" and self.s_split is None:
            raise ConfigError("spatial composition needs a scale split")

    def run(self) -> TokenSequence:
        if self.mode == "temporal":
            return compose_temporal(self.first, self.second, self.fraction)
        return compose_spatial(self.first, self.second, self.s_split)


@dataclass(frozen=True)
class ControlRequest:
    trajectory: np.ndarray  # (N, 4): pelvis translation + heading
    label: Optional[int] = None

    def __post_init__(self):
        t = np.asarray(self.trajectory, dtype=np.float64)
        if t.ndim != 2 or t.shape[1] != 4 or t.shape[0] < 1:
            raise ConfigError(f"trajectory must be (N, 4), got {t.shape}")
        if not np.isfinite(t).all():
            raise ConfigError("trajectory must be finite")
        object.__setattr__(self, "trajectory", t)


@dataclass(frozen=True)
class EditRequest:
    source: TokenSequence
    label: int
    source_mask: Optional[np.ndarray] = None


@dataclass(frozen=True)
class InpaintSpec:
    kind: str  # "temporal" | "spatial"
    mode: str  # temporal: "prefix" | "suffix" | "between"; spatial: "upper" | "lower"
    fraction: float = 0.7

    def __post_init__(self):
        if self.kind == "temporal":
            if self.mode not in ("prefix", "suffix", "between"):
                raise ConfigError(f"unknown temporal mode {self.mode!r}")
            if not (0.0 < self.fraction < 1.0):
                raise ConfigError(f"fraction must lie in (0, 1), got {self.fraction}")
        elif self.kind == "spatial":
            if self.mode not in BODY_REGIONS:
                raise ConfigError(f"unknown body region {self.mode!r}")
        else:
            raise ConfigError(f"unknown inpaint kind {self.kind!r}")


def _check_pair(y1: TokenSequence, y2: TokenSequence):
    if y1.sizes != y2.sizes or y1.lengths != y2.lengths:
        raise ConfigError("token sequences come from different configurations")


def compose_temporal(y1: TokenSequence, y2: TokenSequence, fraction: float) -> TokenSequence:
    """Per scale, first floor(fraction * n_s) tokens from y1, rest from y2.

    Cutting every scale at the same time fraction keeps the blend point
    aligned across scales.  Boundary convention: as fraction -> 0 the
    output becomes exactly y2; as fraction -> 1 the flooring leaves the
    final token of each scale owned by y2 (fraction = 1 itself is out of
    range, as is 0).
    """
    _check_pair(y1, y2)
    f = float(fraction)
    if not (0.0 < f < 1.0):
        raise ConfigError(f"fraction must lie in (0, 1), got {fraction}")
    out = []
    for a, b in zip(y1.indices, y2.indices):
        i = int(math.floor(f * a.size))
        out.append(np.concatenate([a[:i], b[i:]]))
    return TokenSequence(tuple(out), y1.sizes)


def compose_spatial(y1: TokenSequence, y2: TokenSequence, s_split: int) -> TokenSequence:
    """Scales 1..s_split (1-based) from y1, scales s_split+1..S from y2."""
    _check_pair(y1, y2)
    s = int(s_split)
    n = len(y1.indices)
    if not (1 <= s < n):
        raise ConfigError(f"scale split must lie in [1, {n - 1}], got {s_split}")
    idx = tuple(y1.indices[:s]) + tuple(y2.indices[s:])
    return TokenSequence(idx, y1.sizes)


def _check_trained(codec: CodecCheckpoint, gen: GeneratorCheckpoint):
    if not codec.meta or not gen.meta:
        raise ConfigError("control and inpainting need trained checkpoints")
    lay = gen.layout
    if lay.lengths != codec.config.n_tokens or lay.sizes != codec.config.codebook_sizes():
        raise ConfigError("generator layout does not match the codec configuration")


def control_generate(
    req: ControlRequest,
    codec: CodecCheckpoint,
    gen: GeneratorCheckpoint,
    rng: np.random.Generator,
    iterations: int = 5,
) -> MotionSequence:
    """Trajectory-conditioned generation.

    A pseudo-motion of [pelvis trajectory; zeros] is encoded; its first
    scale (the pelvis-only one) becomes fixed context and every other
    scale is sampled around it.
    """
    _check_trained(codec, gen)
    d = codec.skeleton.feature_dim
    frames = np.zeros((req.trajectory.shape[0], d))
    frames[:, :4] = req.trajectory
    pseudo = MotionSequence(frames, fps=codec.fps, joint_count=codec.skeleton.joint_count)
    y_ctl = encode(pseudo, codec)

    lay = gen.layout
    fixed = np.zeros(lay.total, dtype=bool)
    fixed[: lay.lengths[0]] = True
    y = sample(gen, label=req.label, rng=rng, iterations=iterations,
               initial=y_ctl, fixed=fixed)
    return decode(y, codec)


def edit(req: EditRequest, gen: GeneratorCheckpoint) -> TokenSequence:
    """One-pass token translation under an edit label (K = 1)."""
    lay = gen.layout
    lay.label_id(req.label)  # unknown label -> error
    return predict_tokens(gen, req.label, req.source, source_mask=req.source_mask, greedy=True)


# -- inpainting ------------------------------------------------------------

def _temporal_span(mode: str, fraction: float, n_frames: int):
    n_zero = int(round(fraction * n_frames))
    n_zero = min(max(n_zero, 1), n_frames - 1)
    if mode == "prefix":
        return 0, n_zero - 1
    if mode == "suffix":
        return n_frames - n_zero, n_frames - 1
    lo = (n_frames - n_zero) // 2
    return lo, lo + n_zero - 1


def _temporal_token_mask(lay, n_frames: int, lo: int, hi: int) -> np.ndarray:
    """True where a token's nominal frame window sits entirely in [lo, hi].

    Token i of an n_s-token scale covers one token spacing either side of
    its align-corners center; partially covered tokens stay fixed.
    """
    masked = np.zeros(lay.total, dtype=bool)
    starts = lay.scale_starts()
    for s, n_s in enumerate(lay.lengths):
        if n_s == 1:
            continue  # covers the whole clip, never fully inside a proper span
        spacing = (n_frames - 1) / (n_s - 1)
        centers = np.arange(n_s) * spacing
        inside = (centers - spacing >= lo) & (centers + spacing <= hi)
        masked[starts[s] : starts[s] + n_s] = inside
    return masked


def _introduced_groups(part_sets):
    """Feature groups each scale adds on top of the previous one."""
    out = []
    prev = ()
    for ps in part_sets:
        out.append(tuple(g for g in ps if g not in prev))
        prev = ps
    return out


def _spatial_token_mask(lay, part_sets, zeroed) -> np.ndarray:
    """True for scales whose newly introduced groups are all zeroed.

    Part sets are nested, so containment of the full set never triggers;
    the columns a scale introduces are the ones its tokens are
    responsible for.
    """
    masked = np.zeros(lay.total, dtype=bool)
    starts = lay.scale_starts()
    zeroed = set(zeroed)
    for s, intro in enumerate(_introduced_groups(part_sets)):
        if intro and set(intro) <= zeroed:
            masked[starts[s] : starts[s] + lay.lengths[s]] = True
    return masked


def inpaint(
    x: MotionSequence,
    spec: InpaintSpec,
    codec: CodecCheckpoint,
    gen: GeneratorCheckpoint,
    rng: np.random.Generator,
    iterations: int = 5,
) -> MotionSequence:
    """Zero a region, encode, regenerate the fully covered tokens, decode."""
    _check_trained(codec, gen)
    frames = x.frames.copy()
    lay = gen.layout
    if spec.kind == "temporal":
        lo, hi = _temporal_span(spec.mode, spec.fraction, x.n_frames)
        frames[lo : hi + 1, :] = 0.0
        masked = _temporal_token_mask(lay, x.n_frames, lo, hi)
    else:
        cols = codec.skeleton.columns_for(BODY_REGIONS[spec.mode])
        frames[:, cols] = 0.0
        masked = _spatial_token_mask(lay, codec.config.part_sets, BODY_REGIONS[spec.mode])

    corrupted = MotionSequence(frames, fps=x.fps, joint_count=x.joint_count)
    y = encode(corrupted, codec)
    out = sample(gen, label=None, rng=rng, iterations=iterations,
                 initial=y, fixed=~masked)
    return decode(out, codec)
