"""Multi-scale residual FSQ codec.

Encoding (per scale s): z_s = Enc_s(xbar_s); the residual z_s - f_{s-1} is
interpolated down to n_s, quantized, interpolated back to n, and added to the
running aggregate f_s. Decoding dequantizes every scale, interpolates each to
n, sums, and runs the single decoder.
"""

from dataclasses import dataclass, field

import numpy as np

from .. import fsq
from ..checkpoint import load_checkpoint, save_checkpoint
from ..errors import ConfigError
from ..motion.skeleton import Skeleton, default_skeleton
from ..motion.types import MotionSequence
from ..nn import ParamSet, Tensor, functional as F, no_grad
from .config import ScaleConfig
from .tokens import TokenSequence


@dataclass
class ResidualState:
    """Running aggregate f_s = sum of dequantized scale contributions."""

    f: Tensor
    scale: int = 0

    def add(self, zhat) -> "ResidualState":
        return ResidualState(self.f + zhat, self.scale + 1)


def _init_conv(ps, rng, name, k, ci, co):
    ps.add(f"{name}_w", rng.normal(0.0, np.sqrt(1.0 / (k * ci)), size=(k, ci, co)))
    ps.add(f"{name}_b", np.zeros(co))


def _init_linear(ps, rng, name, ci, co):
    ps.add(f"{name}_w", rng.normal(0.0, np.sqrt(1.0 / ci), size=(ci, co)))
    ps.add(f"{name}_b", np.zeros(co))


def init_encoder(d_in: int, config: ScaleConfig, spec: fsq.LevelSpec, rng) -> ParamSet:
    h, d = config.hidden, config.latent_dim
    ps = ParamSet()
    _init_conv(ps, rng, "c0", 4, d_in, h)
    _init_conv(ps, rng, "r0a", 3, h, h)
    _init_conv(ps, rng, "r0b", 3, h, h)
    _init_conv(ps, rng, "c1", 4, h, h)
    _init_conv(ps, rng, "r1a", 3, h, h)
    _init_conv(ps, rng, "r1b", 3, h, h)
    _init_linear(ps, rng, "proj", h, d)
    _init_linear(ps, rng, "qin", d, spec.d)
    # near-zero qout: scale contributions start tiny so every scale's residual
    # input is the clean encoder signal, not accumulated quantizer noise from
    # earlier scales (large aggregates saturate the bounding tanh and starve
    # later scales of gradient)
    _init_linear(ps, rng, "qout", spec.d, d)
    ps["qout_w"].data *= 0.05
    return ps


def init_decoder(d_out: int, config: ScaleConfig, rng) -> ParamSet:
    h, d = config.hidden, config.latent_dim
    ps = ParamSet()
    _init_linear(ps, rng, "in", d, h)
    _init_conv(ps, rng, "r0a", 3, h, h)
    _init_conv(ps, rng, "r0b", 3, h, h)
    _init_conv(ps, rng, "t0", 4, h, h)
    _init_conv(ps, rng, "r1a", 3, h, h)
    _init_conv(ps, rng, "r1b", 3, h, h)
    _init_conv(ps, rng, "t1", 4, h, h)
    _init_linear(ps, rng, "out", h, d_out)
    return ps


def _res_block(ps, h, tag):
    r = F.conv1d(F.gelu(F.conv1d(h, ps[f"{tag}a_w"], ps[f"{tag}a_b"], padding=1)),
                 ps[f"{tag}b_w"], ps[f"{tag}b_b"], padding=1)
    return h + r


def encoder_forward(ps: ParamSet, x) -> Tensor:
    """(B, N, D_s) -> (B, N/4, d)."""
    h = F.gelu(F.conv1d(x, ps["c0_w"], ps["c0_b"], stride=2, padding=1))
    h = _res_block(ps, h, "r0")
    h = F.gelu(F.conv1d(h, ps["c1_w"], ps["c1_b"], stride=2, padding=1))
    h = _res_block(ps, h, "r1")
    return F.linear(h, ps["proj_w"], ps["proj_b"])


def decoder_forward(ps: ParamSet, f) -> Tensor:
    """(B, n, d) -> (B, 4n, D)."""
    h = F.linear(f, ps["in_w"], ps["in_b"])
    h = _res_block(ps, h, "r0")
    h = F.gelu(F.conv1d_transpose(h, ps["t0_w"], ps["t0_b"], stride=2, padding=1))
    h = _res_block(ps, h, "r1")
    h = F.gelu(F.conv1d_transpose(h, ps["t1_w"], ps["t1_b"], stride=2, padding=1))
    return F.linear(h, ps["out_w"], ps["out_b"])


@dataclass
class CodecCheckpoint:
    """Everything needed to encode and decode: weights, config, normalization."""

    config: ScaleConfig
    encoders: list
    decoder: ParamSet
    norm_mean: np.ndarray
    norm_std: np.ndarray
    meta: dict = field(default_factory=dict)
    skeleton: Skeleton = None

    def __post_init__(self):
        if self.skeleton is None:
            self.skeleton = default_skeleton()
        if len(self.encoders) != self.config.n_scales:
            raise ConfigError("need one encoder ParamSet per scale")
        self.columns = [self.skeleton.columns_for(p) for p in self.config.part_sets]
        d = self.skeleton.feature_dim
        if self.norm_mean.shape != (d,) or self.norm_std.shape != (d,):
            raise ConfigError("normalization stats must be (D,)")

    @property
    def fps(self) -> float:
        return float(self.meta.get("fps", 20.0))

    def normalize(self, frames: np.ndarray) -> np.ndarray:
        return (frames - self.norm_mean) / self.norm_std

    def denormalize(self, frames: np.ndarray) -> np.ndarray:
        return frames * self.norm_std + self.norm_mean

    def save(self, path) -> None:
        sets = {f"enc{s}": ps for s, ps in enumerate(self.encoders)}
        sets["dec"] = self.decoder
        meta = dict(self.meta)
        meta["kind"] = "codec"
        meta["config"] = self.config.to_dict()
        meta["joint_count"] = self.skeleton.joint_count
        arrays = {"norm_mean": self.norm_mean, "norm_std": self.norm_std}
        save_checkpoint(path, sets, arrays, meta)

    @classmethod
    def load(cls, path) -> "CodecCheckpoint":
        states, arrays, meta = load_checkpoint(path)
        if meta.get("kind") != "codec":
            raise ConfigError(f"{path} is not a codec checkpoint")
        config = ScaleConfig.from_dict(meta.pop("config"))
        skeleton = default_skeleton()
        if meta.get("joint_count") != skeleton.joint_count:
            raise ConfigError("checkpoint skeleton does not match the default skeleton")
        ckpt = init_codec(config, skeleton=skeleton, seed=0)
        for s, ps in enumerate(ckpt.encoders):
            ps.load_state_dict(states[f"enc{s}"])
        ckpt.decoder.load_state_dict(states["dec"])
        ckpt.norm_mean = arrays["norm_mean"]
        ckpt.norm_std = arrays["norm_std"]
        ckpt.meta = meta
        return ckpt


def init_codec(config: ScaleConfig, skeleton: Skeleton = None, seed: int = 0) -> CodecCheckpoint:
    skeleton = skeleton or default_skeleton()
    if config.downsample != 4:
        raise ConfigError("encoder stack downsamples by exactly 4")
    rng = np.random.default_rng([1009, seed])
    d = skeleton.feature_dim
    encoders = []
    for parts, spec in zip(config.part_sets, config.level_specs):
        d_in = len(skeleton.columns_for(parts))
        encoders.append(init_encoder(d_in, config, spec, rng))
    decoder = init_decoder(d, config, rng)
    return CodecCheckpoint(config=config, encoders=encoders, decoder=decoder,
                           norm_mean=np.zeros(d), norm_std=np.ones(d),
                           meta={}, skeleton=skeleton)


def _check_frames(ckpt: CodecCheckpoint, frames: np.ndarray) -> None:
    n, d = frames.shape[-2:]
    cfg = ckpt.config
    if n % cfg.downsample != 0:
        raise ConfigError(f"frame count {n} not divisible by downsample {cfg.downsample}")
    if n != cfg.frames_required:
        raise ConfigError(f"checkpoint expects {cfg.frames_required} frames, got {n}")
    if d != ckpt.skeleton.feature_dim:
        raise ConfigError(f"feature dim {d} does not match checkpoint ({ckpt.skeleton.feature_dim})")


def forward_codec(ckpt: CodecCheckpoint, frames_norm: np.ndarray, bypass: bool = False):
    """Full differentiable pass over a normalized batch (B, N, D).

    Returns dict with z (per-scale encoder latents), f (per-scale aggregates),
    tokens (per-scale index arrays (B, n_s), None when bypassed), xhat.
    """
    cfg = ckpt.config
    b, n_frames, _ = frames_norm.shape
    n = cfg.base_tokens
    state = ResidualState(Tensor(np.zeros((b, n, cfg.latent_dim))))
    zs, fs, tokens = [], [], []
    for s in range(cfg.n_scales):
        ps = ckpt.encoders[s]
        xbar = Tensor(frames_norm[:, :, ckpt.columns[s]])
        z_s = encoder_forward(ps, xbar)
        resid = z_s - state.f
        zbar = F.interp_linear(resid, cfg.n_tokens[s])
        if bypass:
            zt, y_s = zbar, None
        else:
            q = F.linear(zbar, ps["qin_w"], ps["qin_b"])
            values, _, y_s = fsq.quantize_ste(q, cfg.level_specs[s], cfg.ste_variant)
            zt = F.linear(values, ps["qout_w"], ps["qout_b"])
        zhat = F.interp_linear(zt, n)
        state = state.add(zhat)
        zs.append(z_s)
        fs.append(state.f)
        tokens.append(y_s)
    xhat = decoder_forward(ckpt.decoder, state.f)
    return {"z": zs, "f": fs, "tokens": tokens, "xhat": xhat}


def encode(x: MotionSequence, ckpt: CodecCheckpoint) -> TokenSequence:
    """Quantize one sequence into its multi-scale token representation."""
    frames = np.asarray(x.frames, dtype=np.float64)
    _check_frames(ckpt, frames)
    with no_grad():
        out = forward_codec(ckpt, ckpt.normalize(frames)[None])
    return TokenSequence([y[0] for y in out["tokens"]], ckpt.config.codebook_sizes())


def encode_batch(xs, ckpt: CodecCheckpoint, batch_size: int = 64):
    """encode() over many same-shape sequences, batched per forward pass."""
    frames = np.stack([np.asarray(getattr(x, "motion", x).frames, dtype=np.float64)
                       for x in xs])
    _check_frames(ckpt, frames[0])
    sizes = ckpt.config.codebook_sizes()
    out = []
    with no_grad():
        for i in range(0, len(xs), batch_size):
            fw = forward_codec(ckpt, ckpt.normalize(frames[i:i + batch_size]))
            for b in range(fw["tokens"][0].shape[0]):
                out.append(TokenSequence([y[b] for y in fw["tokens"]], sizes))
    return out


def _check_tokens(ckpt: CodecCheckpoint, y: TokenSequence) -> None:
    cfg = ckpt.config
    if y.n_scales != cfg.n_scales or y.lengths != tuple(cfg.n_tokens):
        raise ConfigError(f"token lengths {y.lengths} do not match config {tuple(cfg.n_tokens)}")
    if y.sizes != cfg.codebook_sizes():
        raise ConfigError("token codebook sizes do not match config")


def _decode_scales(y: TokenSequence, ckpt: CodecCheckpoint, scales) -> MotionSequence:
    _check_tokens(ckpt, y)
    cfg = ckpt.config
    n = cfg.base_tokens
    with no_grad():
        f = Tensor(np.zeros((1, n, cfg.latent_dim)))
        for s in scales:
            ps = ckpt.encoders[s]
            vals = fsq.lookup(y.indices[s][None], cfg.level_specs[s])
            zt = F.linear(Tensor(vals), ps["qout_w"], ps["qout_b"])
            f = f + F.interp_linear(zt, n)
        xhat = decoder_forward(ckpt.decoder, f)
    frames = ckpt.denormalize(xhat.data[0])
    return MotionSequence(frames, fps=ckpt.fps, joint_count=ckpt.skeleton.joint_count)


def decode(y: TokenSequence, ckpt: CodecCheckpoint) -> MotionSequence:
    return _decode_scales(y, ckpt, range(ckpt.config.n_scales))


def partial_decode(y: TokenSequence, ckpt: CodecCheckpoint, s_max: int) -> MotionSequence:
    """Decode from scales 1..s_max only (1-based, inclusive)."""
    if not 1 <= s_max <= ckpt.config.n_scales:
        raise ValueError(f"s_max must be in [1, {ckpt.config.n_scales}]")
    return _decode_scales(y, ckpt, range(s_max))


def drop_scale_decode(y: TokenSequence, ckpt: CodecCheckpoint, s_drop: int) -> MotionSequence:
    """Decode from all scales except s_drop (1-based)."""
    s = ckpt.config.n_scales
    if not 1 <= s_drop <= s:
        raise ValueError(f"s_drop must be in [1, {s}]")
    return _decode_scales(y, ckpt, [i for i in range(s) if i != s_drop - 1])


def reconstruct(x: MotionSequence, ckpt: CodecCheckpoint) -> MotionSequence:
    """encode + decode in one forward pass."""
    frames = np.asarray(x.frames, dtype=np.float64)
    _check_frames(ckpt, frames)
    with no_grad():
        out = forward_codec(ckpt, ckpt.normalize(frames)[None])
    return MotionSequence(ckpt.denormalize(out["xhat"].data[0]), fps=ckpt.fps,
                          joint_count=ckpt.skeleton.joint_count)
