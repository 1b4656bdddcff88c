"""Minimal reverse-mode autodiff engine over numpy."""

from . import functional, kernels
from .gradcheck import finite_diff_check
from .optim import Adam, WarmupCosine
from .params import ParamSet
from .tensor import Tensor, as_tensor, backward, grad_enabled, no_grad

__all__ = [
    "Tensor",
    "as_tensor",
    "backward",
    "no_grad",
    "grad_enabled",
    "ParamSet",
    "Adam",
    "WarmupCosine",
    "finite_diff_check",
    "functional",
    "kernels",
]
