"""RMSProp with per-tensor squared-gradient accumulators."""

from __future__ import annotations

import numpy as np


class NonFiniteGradient(Exception):
    """A gradient went inf/nan; the training run should stop and be marked."""


class RmsProp:
    """v <- alpha * v + (1 - alpha) * g^2;  theta <- theta - lr * g / (sqrt(v) + eps)."""

    def __init__(self, params, lr, alpha=0.99, eps=1e-8):
        self.params = params
        self.lr = lr
        self.alpha = alpha
        self.eps = eps
        self.state = {name: np.zeros_like(t.data) for name, t in params.items()}

    def step(self):
        for name, t in self.params.items():
            g = t.grad
            if g is None:
                continue
            if not np.isfinite(g).all():
                raise NonFiniteGradient(f"non-finite gradient in {name}")
            v = self.state[name]
            v *= self.alpha
            v += (1.0 - self.alpha) * g * g
            t.data -= self.lr * g / (np.sqrt(v) + self.eps)

    def zero_grad(self):
        for t in self.params.values():
            t.grad = None
