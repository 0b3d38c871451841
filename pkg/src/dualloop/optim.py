"""Adam over dicts of named weight arrays."""

from __future__ import annotations

import numpy as np


class Adam:
    """Standard Adam (beta1=0.9, beta2=0.999, eps=1e-8), one slot per array."""

    def __init__(self, learning_rate: float, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.lr = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}

    def update(self, weights: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        """Apply one step in place; keys of ``grads`` must match ``weights``."""
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1 ** self.t
        bias2 = 1.0 - b2 ** self.t
        for key, g in grads.items():
            m = self._m.setdefault(key, np.zeros_like(weights[key]))
            v = self._v.setdefault(key, np.zeros_like(weights[key]))
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            m_hat = m / bias1
            v_hat = v / bias2
            weights[key] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
