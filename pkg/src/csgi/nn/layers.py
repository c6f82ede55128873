"""Layer objects over the autodiff core.

Layers own Parameter tensors, expose named_parameters() for checkpointing,
and take (tensor, training, rng) in forward so stochastic layers (dropout,
additive noise) are exactly identity in evaluation mode.
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from . import autodiff as ad
from .autodiff import Tensor

__all__ = [
    "Parameter",
    "Module",
    "Dense",
    "CausalConv1d",
    "TcnBlock",
    "AvgPool1d",
    "Upsample1d",
    "Dropout",
    "GaussianNoise",
    "Elu",
]


class Parameter(Tensor):
    """A trainable tensor."""

    def __init__(self, data, name: str = ""):
        super().__init__(data, requires_grad=True, name=name)


def he_normal(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    """Scaled normal init with variance 2/fan_in (convolution kernels)."""
    return rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    """Uniform init on +/- sqrt(6/(fan_in+fan_out)) (dense layers)."""
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, shape)


class Module:
    """Base class: submodules and parameters are discovered by attribute
    scan, in declaration order."""

    def modules(self):
        for value in vars(self).values():
            if isinstance(value, Module):
                yield value
            elif isinstance(value, (list, tuple)):
                for item in value:
                    if isinstance(item, Module):
                        yield item

    def named_parameters(self, prefix: str = ""):
        for attr, value in vars(self).items():
            path = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{path}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(f"{path}.{i}.")
                    elif isinstance(item, Parameter):
                        yield f"{path}.{i}", item

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def forward(self, x: Tensor, training: bool = False, rng=None) -> Tensor:
        raise NotImplementedError

    def __call__(self, x: Tensor, training: bool = False, rng=None) -> Tensor:
        return self.forward(x, training=training, rng=rng)


class Dense(Module):
    """Affine map over the channel axis of (B, T, C) or (N, C) input."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.weight = Parameter(glorot_uniform(rng, (in_dim, out_dim), in_dim, out_dim))
        self.bias = Parameter(np.zeros(out_dim))

    def forward(self, x, training=False, rng=None):
        shape = x.data.shape
        if shape[-1] != self.in_dim:
            raise ShapeMismatchError(
                f"dense expected {self.in_dim} channels, got {shape[-1]}"
            )
        flat = ad.reshape(x, (-1, self.in_dim))
        out = ad.add(ad.matmul(flat, self.weight), self.bias)
        return ad.reshape(out, shape[:-1] + (self.out_dim,))


class CausalConv1d(Module):
    """Dilated causal convolution layer (zero left-padding, length kept)."""

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        dilation: int,
        rng: np.random.Generator,
    ):
        self.dilation = dilation
        self.weight = Parameter(
            he_normal(
                rng,
                (kernel_size, in_channels, out_channels),
                kernel_size * in_channels,
            )
        )
        self.bias = Parameter(np.zeros(out_channels))

    def forward(self, x, training=False, rng=None):
        return ad.causal_conv1d(x, self.weight, self.bias, self.dilation)


class Elu(Module):
    def __init__(self, alpha: float = 1.0):
        self.alpha = alpha

    def forward(self, x, training=False, rng=None):
        return ad.elu(x, self.alpha)


class Dropout(Module):
    """Inverted dropout: active only in training mode."""

    def __init__(self, p: float):
        if not 0.0 <= p < 1.0:
            raise ValueError("dropout rate must be in [0, 1)")
        self.p = p

    def forward(self, x, training=False, rng=None):
        if not training or self.p == 0.0:
            return x
        mask = (rng.random(x.data.shape) >= self.p) / (1.0 - self.p)
        return ad.mul(x, Tensor(mask))


class GaussianNoise(Module):
    """Additive zero-mean Gaussian noise, active only in training mode."""

    def __init__(self, sigma: float):
        if sigma < 0:
            raise ValueError("noise sigma must be >= 0")
        self.sigma = sigma

    def forward(self, x, training=False, rng=None):
        if not training or self.sigma == 0.0:
            return x
        return ad.add(x, Tensor(rng.standard_normal(x.data.shape) * self.sigma))


class AvgPool1d(Module):
    def __init__(self, rate: int):
        self.rate = rate

    def forward(self, x, training=False, rng=None):
        return ad.avg_pool1d(x, self.rate)


class Upsample1d(Module):
    def __init__(self, rate: int):
        self.rate = rate

    def forward(self, x, training=False, rng=None):
        return ad.upsample1d(x, self.rate)


class _TcnLevel(Module):
    """One dilation level: causal conv -> ELU -> dropout, plus a residual
    connection (1x1 conv projection when the channel counts differ)."""

    def __init__(self, in_channels, out_channels, kernel_size, dilation, dropout, rng):
        self.conv = CausalConv1d(in_channels, out_channels, kernel_size, dilation, rng)
        self.act = Elu()
        self.drop = Dropout(dropout)
        self.project = (
            CausalConv1d(in_channels, out_channels, 1, 1, rng)
            if in_channels != out_channels
            else None
        )

    def forward(self, x, training=False, rng=None):
        h = self.drop(self.act(self.conv(x)), training=training, rng=rng)
        shortcut = x if self.project is None else self.project(x)
        return ad.add(h, shortcut)


class TcnBlock(Module):
    """Stack of dilated causal convolution levels with residual connections.

    Receptive field: 1 + nb_stacks * (kernel_size - 1) * sum(dilations).
    """

    def __init__(
        self,
        in_channels: int,
        nb_filters: int,
        kernel_size: int,
        dilations,
        nb_stacks: int,
        dropout_rate: float,
        rng: np.random.Generator,
    ):
        self.nb_filters = nb_filters
        self.kernel_size = kernel_size
        self.dilations = tuple(dilations)
        self.nb_stacks = nb_stacks
        levels = []
        channels = in_channels
        for _ in range(nb_stacks):
            for d in self.dilations:
                levels.append(
                    _TcnLevel(channels, nb_filters, kernel_size, d, dropout_rate, rng)
                )
                channels = nb_filters
        self.levels = levels

    @property
    def receptive_field(self) -> int:
        return 1 + self.nb_stacks * (self.kernel_size - 1) * sum(self.dilations)

    def forward(self, x, training=False, rng=None):
        for level in self.levels:
            x = level(x, training=training, rng=rng)
        return x
