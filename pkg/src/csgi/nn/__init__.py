"""Minimal neural-network stack: autodiff tensors, the layer set used by the
two-headed temporal-convolutional autoencoder, Adam, and checkpoint I/O."""

from . import autodiff
from .autodiff import Tensor, backward, mse, no_grad
from .checkpoint import load_weights, save_weights
from .layers import (
    AvgPool1d,
    CausalConv1d,
    Dense,
    Dropout,
    Elu,
    GaussianNoise,
    Module,
    Parameter,
    TcnBlock,
    Upsample1d,
)
from .optim import Adam, adam_step

__all__ = [
    "autodiff",
    "Tensor",
    "backward",
    "mse",
    "no_grad",
    "Adam",
    "adam_step",
    "Module",
    "Parameter",
    "Dense",
    "CausalConv1d",
    "TcnBlock",
    "AvgPool1d",
    "Upsample1d",
    "Dropout",
    "GaussianNoise",
    "Elu",
    "save_weights",
    "load_weights",
]
