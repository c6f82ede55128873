"""Adam optimizer with bias correction."""
from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatchError
from .autodiff import Tensor

__all__ = ["Adam", "adam_step"]


def adam_step(
    value: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    t: int,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
):
    """One bias-corrected Adam update; t is the 1-based step count.

    Returns (new_value, new_m, new_v) without mutating the inputs.
    """
    if value.shape != grad.shape or m.shape != value.shape or v.shape != value.shape:
        raise ShapeMismatchError("parameter, gradient, and moment shapes must match")
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1**t)
    v_hat = v / (1.0 - beta2**t)
    return value - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


class Adam:
    """Stateful Adam over a fixed parameter list.

    Parameters with a None gradient are treated as having zero gradient
    (their moments still decay).
    """

    def __init__(
        self,
        params: list[Tensor],
        lr: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        self.t += 1
        for i, p in enumerate(self.params):
            grad = p.grad if p.grad is not None else np.zeros_like(p.data)
            p.data, self.m[i], self.v[i] = adam_step(
                p.data,
                grad,
                self.m[i],
                self.v[i],
                self.t,
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
            )

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()
