"""Evaluation metrics: MPJPE, feature-space Frechet distance, retrieval."""
from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg

from ..errors import ConfigError
from ..motion.skeleton import Skeleton, default_skeleton
from ..motion.types import MotionSequence

__all__ = ["joint_positions", "mpjpe", "feature_frechet", "retrieval"]

FRECHET_EPS = 1e-9  # ridge added to near-singular covariances


def _as_motion(m) -> MotionSequence:
    return getattr(m, "motion", m)


def joint_positions(m: MotionSequence, skeleton: Skeleton = None) -> np.ndarray:
    """Global joint positions (N, J, 3): root translation applied.

    Joint features are stored relative to the pelvis; heading is a scalar
    state channel and is not applied as a rotation here.
    """
    skeleton = skeleton or default_skeleton()
    m = _as_motion(m)
    f = m.frames
    pos = np.empty((m.n_frames, skeleton.joint_count, 3))
    root = f[:, :3]
    pos[:, 0] = root
    for j in range(1, skeleton.joint_count):
        cols = skeleton.joint_columns(j)
        pos[:, j] = root + f[:, cols]
    return pos


def mpjpe(a: MotionSequence, b: MotionSequence, skeleton: Skeleton = None) -> float:
    """Mean per-joint position error in millimeter-equivalents."""
    a, b = _as_motion(a), _as_motion(b)
    if a.frames.shape != b.frames.shape:
        raise ConfigError(f"shape mismatch: {a.frames.shape} vs {b.frames.shape}")
    skeleton = skeleton or default_skeleton()
    pa = joint_positions(a, skeleton)
    pb = joint_positions(b, skeleton)
    return float(np.linalg.norm(pa - pb, axis=-1).mean() * 1000.0)


def _gaussian_fit(x: np.ndarray):
    mu = x.mean(axis=0)
    cov = np.cov(x, rowvar=False)
    return mu, np.atleast_2d(cov)


def feature_frechet(features_a: np.ndarray, features_b: np.ndarray) -> float:
    """Frechet distance between Gaussian fits of two feature sets.

    ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2)).  Near-singular
    covariances get a ridge of FRECHET_EPS with a warning.
    """
    a = np.asarray(features_a, dtype=np.float64)
    b = np.asarray(features_b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ConfigError("feature sets must be 2-D with equal dimensionality")
    dim = a.shape[1]
    if a.shape[0] < dim + 1 or b.shape[0] < dim + 1:
        raise ConfigError(f"need at least dim+1 = {dim + 1} samples per set")
    mu_a, cov_a = _gaussian_fit(a)
    mu_b, cov_b = _gaussian_fit(b)

    lo = min(np.linalg.eigvalsh(cov_a)[0], np.linalg.eigvalsh(cov_b)[0])
    if lo < FRECHET_EPS:
        warnings.warn(f"singular covariance; adding ridge {FRECHET_EPS:g}")
        eye = np.eye(dim) * FRECHET_EPS
        cov_a = cov_a + eye
        cov_b = cov_b + eye
    prod, _ = scipy.linalg.sqrtm(cov_a @ cov_b, disp=False)
    if np.iscomplexobj(prod):
        prod = prod.real
    d2 = float(((mu_a - mu_b) ** 2).sum() + np.trace(cov_a + cov_b - 2.0 * prod))
    return max(d2, 0.0)  # clamp tiny negative round-off


def retrieval(queries: np.ndarray, gallery: np.ndarray, k_list=(1, 2, 3)) -> dict:
    """R@k and mean rank for index-paired query/gallery feature sets.

    Query i's true match is gallery row i.  Ranking is by Euclidean
    distance with ties broken by gallery index (stable sort).
    """
    q = np.asarray(queries, dtype=np.float64)
    g = np.asarray(gallery, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] == 0:
        raise ConfigError("gallery must be non-empty")
    if q.ndim != 2 or q.shape[1] != g.shape[1] or q.shape[0] > g.shape[0]:
        raise ConfigError("queries must pair with gallery rows")
    d = np.linalg.norm(q[:, None, :] - g[None, :, :], axis=-1)
    order = np.argsort(d, axis=1, kind="stable")
    # rank (1-based) of the true match per query
    ranks = np.empty(q.shape[0], dtype=np.int64)
    for i in range(q.shape[0]):
        ranks[i] = int(np.nonzero(order[i] == i)[0][0]) + 1
    out = {f"R@{k}": float((ranks <= k).mean()) for k in k_list}
    out["AvgR"] = float(ranks.mean())
    return out
