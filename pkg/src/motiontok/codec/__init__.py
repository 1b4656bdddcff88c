"""Multi-scale residual FSQ codec: config, model, training, token io."""

from .config import ScaleConfig, make_scale_config
from .model import (CodecCheckpoint, ResidualState, decode, decoder_forward,
                    drop_scale_decode, encode, encode_batch, encoder_forward, forward_codec,
                    init_codec, partial_decode, reconstruct)
from .tokens import TokenSequence, read_tokens, write_tokens
from .train import codec_loss, train_codec

__all__ = [
    "ScaleConfig",
    "make_scale_config",
    "CodecCheckpoint",
    "ResidualState",
    "init_codec",
    "forward_codec",
    "encoder_forward",
    "decoder_forward",
    "encode",
    "encode_batch",
    "decode",
    "partial_decode",
    "drop_scale_decode",
    "reconstruct",
    "codec_loss",
    "train_codec",
    "TokenSequence",
    "write_tokens",
    "read_tokens",
]
