"""Fixed-capacity FIFO replay storage over flat float rows."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError


class ReplayBuffer:
    """Ring buffer of experience rows; oldest entries are evicted first.

    Rows are flat float64 vectors laid out as
        (state[L], action, reward, next_state[L], d_obs, censored)
    so the same storage serves any lead time. Sampling is uniform with
    the caller's RNG.
    """

    def __init__(self, capacity: int, state_dim: int, kind: str = "main"):
        if capacity < 1:
            raise ConfigError("replay capacity must be >= 1")
        if kind not in ("main", "side"):
            raise ConfigError(f"unknown buffer kind {kind!r}")
        self.capacity = int(capacity)
        self.state_dim = int(state_dim)
        self.kind = kind
        self.row_dim = 2 * state_dim + 4
        self._data = np.empty((self.capacity, self.row_dim))
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    @staticmethod
    def pack(state, a, r, next_state, d_obs, censored) -> np.ndarray:
        row = np.concatenate(
            [
                np.asarray(state, dtype=float).ravel(),
                [float(a), float(r)],
                np.asarray(next_state, dtype=float).ravel(),
                [float(d_obs), 1.0 if censored else 0.0],
            ]
        )
        return row

    def unpack(self, rows: np.ndarray):
        """Split rows into (states, actions, rewards, next_states, d_obs, censored)."""
        n = self.state_dim
        return (
            rows[:, :n],
            rows[:, n].astype(np.int64),
            rows[:, n + 1],
            rows[:, n + 2 : 2 * n + 2],
            rows[:, 2 * n + 2].astype(np.int64),
            rows[:, 2 * n + 3] > 0.5,
        )

    def add(self, row: np.ndarray):
        self._data[self._next] = row
        self._next = (self._next + 1) % self.capacity
        if self._size < self.capacity:
            self._size += 1

    def add_batch(self, rows: np.ndarray):
        n = len(rows)
        if n >= self.capacity:
            # Only the newest `capacity` rows survive.
            self._data[:] = rows[n - self.capacity :]
            self._next = 0
            self._size = self.capacity
            return
        end = self._next + n
        if end <= self.capacity:
            self._data[self._next : end] = rows
        else:
            split = self.capacity - self._next
            self._data[self._next :] = rows[:split]
            self._data[: end - self.capacity] = rows[split:]
        self._next = end % self.capacity
        self._size = min(self._size + n, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator) -> np.ndarray:
        idx = rng.integers(0, self._size, size=batch)
        return self._data[idx].copy()

    def oldest_first(self) -> np.ndarray:
        """Contents in insertion order (for tests)."""
        if self._size < self.capacity:
            return self._data[: self._size].copy()
        return np.roll(self._data, -self._next, axis=0).copy()
