"""From-scratch value network: one-hidden-layer rectifier MLP with an
adaptive-moment optimizer, all in numpy float64.

The network maps a normalized state vector (y / y_max, pipeline / a_max)
to one value per action. Everything is deterministic given the init RNG.
"""

from __future__ import annotations

import numpy as np


class MLPValueNet:
    def __init__(self, n_inputs: int, n_actions: int, hidden: int, rng: np.random.Generator):
        self.n_inputs = n_inputs
        self.n_actions = n_actions
        self.hidden = hidden
        # He-scaled Gaussian fan-in init for the rectifier layer.
        self.w1 = rng.normal(0.0, np.sqrt(2.0 / n_inputs), size=(n_inputs, hidden))
        self.b1 = np.zeros(hidden)
        self.w2 = rng.normal(0.0, np.sqrt(2.0 / hidden), size=(hidden, n_actions))
        self.b2 = np.zeros(n_actions)

    def params(self):
        return [self.w1, self.b1, self.w2, self.b2]

    def set_params(self, params):
        self.w1, self.b1, self.w2, self.b2 = [p.copy() for p in params]

    def copy_from(self, other: "MLPValueNet"):
        self.set_params(other.params())

    def forward(self, x: np.ndarray) -> np.ndarray:
        """x: (B, n_inputs) -> (B, n_actions)."""
        z = x @ self.w1 + self.b1
        return np.maximum(z, 0.0) @ self.w2 + self.b2

    def loss_and_grads(self, x, actions, targets, weights=None):
        """Mean squared error of Q(x)[actions] against targets.

        weights (optional, (B,)) reweight rows; zero weight drops the row.
        Returns (loss, grads aligned with params()).
        """
        B = x.shape[0]
        z = x @ self.w1 + self.b1
        hid = np.maximum(z, 0.0)
        q = hid @ self.w2 + self.b2
        picked = q[np.arange(B), actions]
        err = picked - targets
        if weights is None:
            weights = np.ones(B)
        wsum = weights.sum()
        if wsum <= 0:
            zero = [np.zeros_like(p) for p in self.params()]
            return 0.0, zero
        loss = float((weights * err**2).sum() / wsum)
        # d loss / d picked
        g_pick = 2.0 * weights * err / wsum
        g_q = np.zeros_like(q)
        g_q[np.arange(B), actions] = g_pick
        g_w2 = hid.T @ g_q
        g_b2 = g_q.sum(axis=0)
        g_hid = g_q @ self.w2.T
        g_z = g_hid * (z > 0.0)
        g_w1 = x.T @ g_z
        g_b1 = g_z.sum(axis=0)
        return loss, [g_w1, g_b1, g_w2, g_b2]


class Adam:
    """Adaptive moment estimation. Per-weight update with step counter t:

        m <- b1*m + (1-b1)*g          v <- b2*v + (1-b2)*g^2
        m_hat = m / (1 - b1^t)        v_hat = v / (1 - b2^t)
        w <- w - lr * m_hat / (sqrt(v_hat) + eps)
    """

    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, params, grads):
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g**2
            p -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)


class EnsembleMLP:
    """M independent value nets sharing input/output dimensionality."""

    backing = "mlp"

    def __init__(self, n_heads: int, n_inputs: int, n_actions: int, hidden: int,
                 rng: np.random.Generator, lr: float = 1e-4):
        self.n_heads = n_heads
        self.heads = [MLPValueNet(n_inputs, n_actions, hidden, rng) for _ in range(n_heads)]
        self.targets = [MLPValueNet(n_inputs, n_actions, hidden, rng) for _ in range(n_heads)]
        for tgt, src in zip(self.targets, self.heads):
            tgt.copy_from(src)
        self.opts = [Adam(h.params(), lr=lr) for h in self.heads]

    @property
    def M(self) -> int:
        return self.n_heads

    @staticmethod
    def _batched_forward(nets, x: np.ndarray) -> np.ndarray:
        # One broadcasted matmul per layer instead of per-head dispatches.
        w1 = np.stack([n.w1 for n in nets])
        b1 = np.stack([n.b1 for n in nets])
        w2 = np.stack([n.w2 for n in nets])
        b2 = np.stack([n.b2 for n in nets])
        hid = np.maximum(np.matmul(x, w1) + b1[:, None, :], 0.0)
        return np.matmul(hid, w2) + b2[:, None, :]

    def head_values(self, x: np.ndarray) -> np.ndarray:
        """(B, n_inputs) -> (M, B, n_actions) from the online heads."""
        return self._batched_forward(self.heads, x)

    def mean_values(self, x: np.ndarray) -> np.ndarray:
        return self.head_values(x).mean(axis=0)

    def target_values(self, x: np.ndarray) -> np.ndarray:
        return self._batched_forward(self.targets, x)

    def sync_targets(self):
        for tgt, src in zip(self.targets, self.heads):
            tgt.copy_from(src)
