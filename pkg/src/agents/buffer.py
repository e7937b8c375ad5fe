"""
On-policy rollout storage for one trajectory segment
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class ActInfo:
    """What the behaviour policies emitted for one observation"""
    heads: np.ndarray          # (N,) allocation head indices, M = idle
    z: np.ndarray              # (N,) pre-squash resolution draws
    logp_alloc: float
    logp_resol: float


class RolloutBuffer:
    """
    Fixed-capacity segment of T̄ transitions

    Stores observations, both actions, both behaviour log-probs and both
    reward streams. Value estimates V_φ′(s^t), V_φ′(s^{t+1}) are attached by
    the trainer when the segment is consumed, so they always come from the
    target critic of the update that uses them.
    """

    def __init__(self, capacity: int, obs_dim: int, n_iov: int):
        if capacity < 1:
            raise ValueError(f"Buffer capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.obs_dim = obs_dim
        self.n_iov = n_iov
        self.obs = np.zeros((capacity, obs_dim))
        self.next_obs = np.zeros((capacity, obs_dim))
        self.heads = np.zeros((capacity, n_iov), dtype=np.int64)
        self.z = np.zeros((capacity, n_iov))
        self.logp_alloc = np.zeros(capacity)
        self.logp_resol = np.zeros(capacity)
        self.reward_alloc = np.zeros(capacity)
        self.reward_resol = np.zeros(capacity)
        self.ends = np.zeros(capacity, dtype=bool)
        self.values: Optional[np.ndarray] = None
        self.next_values: Optional[np.ndarray] = None
        self.size = 0

    @property
    def full(self) -> bool:
        return self.size == self.capacity

    def add(self, obs: np.ndarray, info: ActInfo, reward_alloc: float, reward_resol: float,
            next_obs: np.ndarray, end: bool) -> None:
        """Append one transition; ``end`` marks the last step of an episode"""
        if self.full:
            raise RuntimeError("RolloutBuffer is full, run an update first")
        t = self.size
        self.obs[t] = obs
        self.next_obs[t] = next_obs
        self.heads[t] = info.heads
        self.z[t] = info.z
        self.logp_alloc[t] = info.logp_alloc
        self.logp_resol[t] = info.logp_resol
        self.reward_alloc[t] = reward_alloc
        self.reward_resol[t] = reward_resol
        self.ends[t] = end
        self.size += 1

    def attach_values(self, values: np.ndarray, next_values: np.ndarray) -> None:
        self.require_full()
        self.values = np.asarray(values, dtype=np.float64)
        self.next_values = np.asarray(next_values, dtype=np.float64)

    def require_full(self) -> None:
        if not self.full:
            raise RuntimeError(
                f"Advantages need a complete segment ({self.size}/{self.capacity} steps)"
            )

    def clear(self) -> None:
        self.size = 0
        self.ends[:] = False
        self.values = None
        self.next_values = None
