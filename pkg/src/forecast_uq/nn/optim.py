"""Adam optimizer with bias correction.

State (first/second moment estimates and the step counter) lives in the
optimizer instance, one slot per parameter tensor. Updates are applied
in place to the parameter arrays.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import TrainingError
from .tensor import Tensor


class Adam:
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
        self.m = {id(p): np.zeros_like(p.data) for p in self.params}
        self.v = {id(p): np.zeros_like(p.data) for p in self.params}

    def step(self, grads: dict[Tensor, np.ndarray]) -> None:
        """One Adam update from a {parameter: gradient} mapping.

        Raises TrainingError on non-finite gradients so callers can report
        where training blew up.
        """
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p in self.params:
            g = grads[p]
            if not np.all(np.isfinite(g)):
                raise TrainingError(
                    f"non-finite gradient for parameter {p.name or id(p)}"
                )
            key = id(p)
            m = self.m[key] = b1 * self.m[key] + (1.0 - b1) * g
            v = self.v[key] = b2 * self.v[key] + (1.0 - b2) * g * g
            m_hat = m / (1.0 - b1**self.t)
            v_hat = v / (1.0 - b2**self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
