from .layout import TokenLayout
from .model import (
    GeneratorCheckpoint,
    GeneratorConfig,
    forward_ids,
    init_generator,
    nll_loss,
)
from .sampling import predict_tokens, sample
from .schedule import MaskSchedule, gamma, mask_tokens, remask_count
from .train import masked_accuracy, train_edit_generator, train_generator

__all__ = [
    "TokenLayout",
    "GeneratorCheckpoint",
    "GeneratorConfig",
    "forward_ids",
    "init_generator",
    "nll_loss",
    "predict_tokens",
    "sample",
    "MaskSchedule",
    "gamma",
    "mask_tokens",
    "remask_count",
    "masked_accuracy",
    "train_edit_generator",
    "train_generator",
]
