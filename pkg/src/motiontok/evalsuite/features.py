"""Hand-crafted per-sequence motion descriptors.

A fixed 17-dimensional vector per sequence: velocity statistics per body
part (5 x mean/std), pelvis displacement, total heading change, and
oscillation energy per part.  Serves as the embedding space for the
Frechet and retrieval metrics.
"""
from __future__ import annotations

import numpy as np

from ..motion.skeleton import PART_ORDER, Skeleton, default_skeleton
from ..motion.types import MotionSequence

__all__ = ["FEATURE_DIM", "feature_vector", "feature_matrix"]

FEATURE_DIM = 2 * len(PART_ORDER) + 2 + len(PART_ORDER)  # 17


def feature_vector(m: MotionSequence, skeleton: Skeleton = None) -> np.ndarray:
    skeleton = skeleton or default_skeleton()
    f = getattr(m, "motion", m).frames
    out = np.empty(FEATURE_DIM)
    i = 0
    part_cols = [skeleton.columns_for((p,)) for p in PART_ORDER]
    for cols in part_cols:
        v = np.linalg.norm(np.diff(f[:, cols], axis=0), axis=1)
        out[i] = v.mean() if v.size else 0.0
        out[i + 1] = v.std() if v.size else 0.0
        i += 2
    out[i] = np.linalg.norm(f[-1, :3] - f[0, :3])  # pelvis displacement
    out[i + 1] = f[-1, 3] - f[0, 3]  # heading change
    i += 2
    for cols in part_cols:
        if f.shape[0] >= 3:
            acc = f[2:, cols] - 2.0 * f[1:-1, cols] + f[:-2, cols]
            out[i] = np.mean(acc * acc)
        else:
            out[i] = 0.0
        i += 1
    return out


def feature_matrix(seqs, skeleton: Skeleton = None) -> np.ndarray:
    skeleton = skeleton or default_skeleton()
    return np.stack([feature_vector(getattr(m, "motion", m), skeleton) for m in seqs])
