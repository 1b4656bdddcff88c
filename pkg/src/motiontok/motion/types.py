"""Motion sequence containers and the part-wise decomposition."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import ConfigError
from .skeleton import Skeleton


class MotionSequence:
    """N frames of D pose features. Immutable once built."""

    def __init__(self, frames, fps: float = 20.0, joint_count: Optional[int] = None):
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise ValueError("frames must be (N, D) with N >= 1")
        n, d = frames.shape
        if joint_count is None:
            if (d - 4) % 3 != 0 or d < 4:
                raise ValueError(f"feature dim {d} does not match 4 + 3*(J-1)")
            joint_count = (d - 4) // 3 + 1
        elif d != 4 + 3 * (joint_count - 1):
            raise ValueError(f"feature dim {d} does not match J={joint_count}")
        if not np.all(np.isfinite(frames)):
            raise ValueError("frames contain non-finite values")
        frames.setflags(write=False)
        self.frames = frames
        self.fps = float(fps)
        self.joint_count = int(joint_count)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.frames.shape[1]

    def __eq__(self, other):
        return (isinstance(other, MotionSequence)
                and self.fps == other.fps
                and np.array_equal(self.frames, other.frames))

    def __repr__(self):
        return f"MotionSequence(N={self.n_frames}, D={self.feature_dim}, fps={self.fps})"


@dataclass(frozen=True)
class PartFeature:
    """Features of one nesting scale: the columns of its part set."""

    scale: int
    frames: np.ndarray

    @property
    def feature_dim(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class EditPair:
    source: MotionSequence
    target: MotionSequence
    edit_label: int

    def __post_init__(self):
        if self.source.frames.shape != self.target.frames.shape:
            raise ValueError("edit pair sequences must share N and D")


@dataclass(frozen=True)
class LabeledMotion:
    motion: MotionSequence
    label: int
    edit: Optional[EditPair] = None


def check_nested(part_sets) -> None:
    """Each scale's part set must contain the previous scale's."""
    prev: set = set()
    for s, names in enumerate(part_sets):
        cur = set(names)
        if not prev.issubset(cur):
            raise ConfigError(f"scale {s + 1} part set does not contain scale {s}")
        prev = cur


def decompose(x: MotionSequence, part_sets, skeleton: Skeleton):
    """Split x into one PartFeature per scale (columns of that scale's parts)."""
    check_nested(part_sets)
    last = set(part_sets[-1])
    if last != set(skeleton.groups):
        raise ConfigError("final scale must cover every part group")
    out = []
    for s, names in enumerate(part_sets):
        cols = skeleton.columns_for(names)
        out.append(PartFeature(scale=s, frames=x.frames[:, cols]))
    return out


def reassemble(parts, part_sets, skeleton: Skeleton) -> np.ndarray:
    """Overlay each scale's features at its columns, highest scale last."""
    check_nested(part_sets)
    n = parts[0].frames.shape[0]
    out = np.zeros((n, skeleton.feature_dim))
    for part, names in zip(parts, part_sets):
        cols = skeleton.columns_for(names)
        out[:, cols] = part.frames
    return out
