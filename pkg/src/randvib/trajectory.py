"""Time-ordered oscillator states with explicit pre/post pairs at jumps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import State

__all__ = ["Trajectory"]


@dataclass(frozen=True)
class Trajectory:
    """Parallel arrays, one entry per record.

    A jump instant contributes two records with the same time: the left
    limit (``post_jump`` False) followed by the post-jump state.
    """

    t: np.ndarray
    x: np.ndarray
    v: np.ndarray
    post_jump: np.ndarray

    @classmethod
    def from_records(cls, records):
        if not records:
            return cls(np.zeros(0), np.zeros(0), np.zeros(0), np.zeros(0, dtype=bool))
        t, x, v, flag = zip(*records)
        return cls(np.array(t), np.array(x), np.array(v), np.array(flag, dtype=bool))

    def __len__(self):
        return len(self.t)

    def state(self, i) -> State:
        return State(float(self.t[i]), float(self.x[i]), float(self.v[i]))

    @property
    def pre_jump_indices(self) -> np.ndarray:
        """Record index of the left limit for every jump."""
        return np.flatnonzero(self.post_jump) - 1
