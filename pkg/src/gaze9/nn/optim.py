"""Stochastic gradient descent with classical momentum.

Update rule: v <- momentum*v - lr*g; p <- p + v.  Parameters are updated
in place so every layer keeps its array identity.
"""

from __future__ import annotations

import numpy as np


class NonFiniteGradient(FloatingPointError):
    """Raised before any parameter is touched when a gradient is not finite."""


class SGDMomentum:
    def __init__(self, params, lr: float = 0.01, momentum: float = 0.9):
        """params: list of (name, parameter, gradient) array triples."""
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 <= momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        self.params = list(params)
        self.lr = lr
        self.momentum = momentum
        self.velocity = [np.zeros_like(p) for _, p, _ in self.params]

    def step(self):
        # Reject the whole step before mutating anything.
        for name, _, g in self.params:
            if not np.all(np.isfinite(g)):
                raise NonFiniteGradient(f"non-finite gradient in {name}")
        for (_, p, g), v in zip(self.params, self.velocity):
            v *= self.momentum
            v -= self.lr * g
            p += v
