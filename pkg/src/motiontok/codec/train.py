"""Codec training: reconstruction + residual commitment loss."""

import math

import numpy as np

from ..errors import InvariantError
from ..motion.skeleton import Skeleton
from ..nn import Adam, Tensor, WarmupCosine, backward, functional as F
from .config import ScaleConfig, make_scale_config
from .model import CodecCheckpoint, forward_codec, init_codec


def codec_loss(x, xhat, zs, fs, alpha: float = 0.1):
    """MSE(x, xhat) + alpha * sum_s (MSE(z_s, sg(f_s)) + MSE(sg(z_s), f_s))."""
    total = F.mse(xhat, x)
    for z_s, f_s in zip(zs, fs):
        commit = F.mse(z_s, f_s.detach()) + F.mse(z_s.detach(), f_s)
        total = total + alpha * commit
    return total


def _stack_frames(dataset) -> np.ndarray:
    frames = []
    for item in dataset:
        m = getattr(item, "motion", item)
        frames.append(np.asarray(m.frames, dtype=np.float64))
    if not frames:
        raise ValueError("dataset is empty")
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise ValueError(f"all sequences must share one shape, got {sorted(shapes)}")
    return np.stack(frames)


def train_codec(dataset, config: ScaleConfig = None, seed: int = 0, epochs: int = 60,
                batch_size: int = 32, lr_max: float = 1e-4, lr_min: float = 1e-5,
                alpha: float = 0.1, warmup_frac: float = 0.05,
                skeleton: Skeleton = None, log=None) -> CodecCheckpoint:
    """Deterministic given (dataset, config, seed). Aborts on divergence."""
    frames = _stack_frames(dataset)
    m, n_frames, _ = frames.shape
    if config is None:
        config = make_scale_config(n_frames=n_frames)
    ckpt = init_codec(config, skeleton=skeleton, seed=seed)

    mean = frames.mean(axis=(0, 1))
    std = np.maximum(frames.std(axis=(0, 1)), 1e-2)
    ckpt.norm_mean, ckpt.norm_std = mean, std
    xn = ckpt.normalize(frames)

    params = [t for ps in ckpt.encoders for t in ps.tensors()] + ckpt.decoder.tensors()
    opt = Adam(params, lr=lr_max)
    steps_per_epoch = math.ceil(m / batch_size)
    total_steps = epochs * steps_per_epoch
    sched = WarmupCosine(opt, lr_max, lr_min, total_steps,
                         warmup_steps=max(1, int(warmup_frac * total_steps)))

    rng = np.random.default_rng([2017, seed])
    curve = []
    for epoch in range(epochs):
        perm = rng.permutation(m)
        losses = []
        for i in range(steps_per_epoch):
            idx = perm[i * batch_size:(i + 1) * batch_size]
            out = forward_codec(ckpt, xn[idx])
            loss = codec_loss(Tensor(xn[idx]), out["xhat"], out["z"], out["f"], alpha)
            val = float(loss.data)
            if not np.isfinite(val):
                raise InvariantError(
                    f"codec loss diverged: epoch {epoch} step {i} loss {val} lr {opt.lr:.3g}")
            opt.zero_grad()
            backward(loss)
            opt.step()
            sched.step()
            losses.append(val)
        curve.append(float(np.mean(losses)))
        if log:
            log(f"epoch {epoch + 1}/{epochs} loss {curve[-1]:.6f} lr {opt.lr:.3g}")

    ckpt.meta.update({
        "epochs": epochs,
        "loss_curve": curve,
        "seed": seed,
        "alpha": alpha,
        "batch_size": batch_size,
        "n_sequences": m,
        "fps": float(getattr(getattr(dataset[0], "motion", dataset[0]), "fps", 20.0)),
    })
    return ckpt
