"""
IoV-MMBS uplink world

Pure, seeded simulation step (mobility, channel gains, intra-cell SINR,
latency, idle accounting) and the two per-agent rewards, plus a
Gymnasium-style wrapper that owns the state and random stream.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import gymnasium as gym
import numpy as np
from gymnasium import spaces

from core.map_model import MapCurve, map_scores
from core.wireless import (
    IDLE, UnreachableLinkError, gain_matrix, rate_all, sinr_all
)
from utils.config import ScenarioConfig
from utils.logger import get_logger

logger = get_logger()


@dataclass
class WorldState:
    """Snapshot of the world before iteration ``iteration + 1``"""
    iteration: int                  # completed iterations, 0 right after reset
    iov_positions: np.ndarray       # (N, 2) meters
    gains: np.ndarray               # (N, M) linear gains
    powers: np.ndarray              # (N,) Watt, fixed per episode
    last_data_bits: np.ndarray      # (N,) bits sent in the previous iteration
    cum_idle: np.ndarray            # (N,) idle iterations so far

    def copy(self) -> 'WorldState':
        return WorldState(
            iteration=self.iteration,
            iov_positions=self.iov_positions.copy(),
            gains=self.gains.copy(),
            powers=self.powers.copy(),
            last_data_bits=self.last_data_bits.copy(),
            cum_idle=self.cum_idle.copy(),
        )


@dataclass
class JointAction:
    """Allocation (MMBS index or IDLE) and resolution for every IoV"""
    alloc: np.ndarray
    resol: np.ndarray

    def __post_init__(self):
        self.alloc = np.asarray(self.alloc, dtype=np.int64)
        self.resol = np.asarray(self.resol, dtype=np.float64)

    def validate(self, cfg: ScenarioConfig) -> None:
        """
        Check the allocation and resolution constraints

        Raises:
            ValueError: Wrong length, unknown MMBS index or resolution out of bounds
        """
        n = cfg.n_iov
        if self.alloc.shape != (n,) or self.resol.shape != (n,):
            raise ValueError(
                f"Action shapes {self.alloc.shape}/{self.resol.shape} do not match N={n}"
            )
        bad = (self.alloc != IDLE) & ((self.alloc < 0) | (self.alloc >= cfg.n_mmbs))
        if bad.any():
            raise ValueError(f"Allocation {self.alloc.tolist()} names a missing MMBS")
        # idle IoVs send nothing, so their resolution is not checked
        sent = self.resol[self.alloc != IDLE]
        if (not np.all(np.isfinite(sent))
                or np.any(sent < cfg.p_min) or np.any(sent > cfg.p_max)):
            raise ValueError(
                f"Resolutions {self.resol.tolist()} outside [{cfg.p_min}, {cfg.p_max}]"
            )

    def heads(self, n_mmbs: int) -> np.ndarray:
        """Allocation as categorical head indices (IDLE -> M)"""
        return np.where(self.alloc == IDLE, n_mmbs, self.alloc)

    @classmethod
    def from_heads(cls, heads: Sequence[int], resol: Sequence[float], n_mmbs: int) -> 'JointAction':
        heads = np.asarray(heads, dtype=np.int64)
        return cls(alloc=np.where(heads == n_mmbs, IDLE, heads), resol=resol)


@dataclass
class StepOutcome:
    """What one uplink iteration produced"""
    per_iov_latency: np.ndarray
    per_iov_map: np.ndarray
    idle_flags: np.ndarray
    reward_alloc: float
    reward_resol: float
    observation: np.ndarray
    data_bits: np.ndarray = field(default=None)
    sinr: np.ndarray = field(default=None)


@dataclass
class EpisodeSummary:
    """Objective total and its decomposition over an episode"""
    objective: float
    total_delay_s: float
    mean_map: float
    transmitted: int
    idle_count: int
    mean_reward_alloc: float
    mean_reward_resol: float
    steps: int


def default_curve(cfg: ScenarioConfig) -> MapCurve:
    """Reference cubic restricted to the scenario's resolution bounds"""
    return MapCurve(domain=(cfg.p_min, cfg.p_max))


def reset(cfg: ScenarioConfig, rng: np.random.Generator) -> WorldState:
    """
    Draw the initial world: positions, per-episode powers, gains

    Draw order is positions, powers, then fading, so trajectories depend
    only on (config, generator state).
    """
    n = cfg.n_iov
    positions = rng.uniform(0.0, cfg.map_side_m, size=(n, 2))
    powers = rng.uniform(cfg.power_min, cfg.power_max, size=n)
    gains = gain_matrix(positions, cfg, rng)
    return WorldState(
        iteration=0,
        iov_positions=positions,
        gains=gains,
        powers=powers,
        last_data_bits=np.zeros(n),
        cum_idle=np.zeros(n, dtype=np.int64),
    )


def observe(state: WorldState, cfg: ScenarioConfig) -> np.ndarray:
    """log10 gains (row-major N×M) followed by previous data sizes over ξ·p_max²"""
    return np.concatenate([
        np.log10(state.gains).ravel(),
        state.last_data_bits / cfg.max_data_bits,
    ])


def step(state: WorldState, action: JointAction, cfg: ScenarioConfig,
         rng: np.random.Generator, curve: Optional[MapCurve] = None,
         horizon: Optional[int] = None) -> Tuple[WorldState, StepOutcome]:
    """
    Advance the world one uplink iteration

    Latency, mAP and rewards are computed on the current gains; mobility
    and the gain refresh happen afterwards and feed the next observation.

    Args:
        state: Current world, left untouched
        action: Allocation and resolutions for this iteration
        cfg: Scenario parameters
        rng: Generator for mobility and fading
        curve: Detection model, defaults to the reference cubic on [p_min, p_max]
        horizon: Episode length the iteration counter is checked against

    Returns:
        (next state, outcome)

    Raises:
        ValueError: Illegal action or finished episode
        UnreachableLinkError: A transmitting IoV has zero rate
    """
    horizon = cfg.episode_len if horizon is None else horizon
    if state.iteration >= horizon:
        raise ValueError(f"Episode already finished ({state.iteration}/{horizon} iterations)")
    action.validate(cfg)
    curve = curve or default_curve(cfg)

    n = cfg.n_iov
    active = action.alloc != IDLE
    idle_flags = (~active).astype(np.int64)

    data_bits = np.where(active, cfg.bits_per_pixel * action.resol ** 2, 0.0)
    gammas = sinr_all(action.alloc, state.gains, state.powers, cfg.noise_power_w)
    rates = np.zeros(n)
    rates[active] = rate_all(gammas[active], cfg.bandwidth_hz)

    latency = np.zeros(n)
    if active.any():
        if np.any(rates[active] <= 0):
            raise UnreachableLinkError(
                f"Zero-rate link at iteration {state.iteration + 1}: alloc={action.alloc.tolist()}"
            )
        latency[active] = data_bits[active] / rates[active]

    map_values = np.zeros(n)
    if active.any():
        map_values[active] = map_scores(action.resol[active], curve)

    q, b, f = cfg.weight_q, cfg.weight_b, cfg.weight_f
    reward_alloc = -float(np.sum(q * latency + f * idle_flags)) / n
    reward_resol = -float(np.sum(q * latency - b * map_values)) / n

    moved = state.iov_positions + rng.uniform(-cfg.max_move_m, cfg.max_move_m, size=(n, 2))
    moved = np.clip(moved, 0.0, cfg.map_side_m)
    next_state = WorldState(
        iteration=state.iteration + 1,
        iov_positions=moved,
        gains=gain_matrix(moved, cfg, rng),
        powers=state.powers.copy(),
        last_data_bits=data_bits,
        cum_idle=state.cum_idle + idle_flags,
    )

    outcome = StepOutcome(
        per_iov_latency=latency,
        per_iov_map=map_values,
        idle_flags=idle_flags,
        reward_alloc=reward_alloc,
        reward_resol=reward_resol,
        observation=observe(next_state, cfg),
        data_bits=data_bits,
        sinr=gammas,
    )
    return next_state, outcome


def episode_objective(outcomes: List[StepOutcome], cfg: ScenarioConfig) -> EpisodeSummary:
    """
    Σ_t Σ_i (q·ℓ − b·mAP + f·I) with its delay, mAP and idle parts

    ``mean_map`` averages over transmissions only and is 0 when nothing was sent.
    """
    if not outcomes:
        raise ValueError("episode_objective needs at least one step")

    latency = np.stack([o.per_iov_latency for o in outcomes])
    maps = np.stack([o.per_iov_map for o in outcomes])
    idle = np.stack([o.idle_flags for o in outcomes])

    objective = float(np.sum(cfg.weight_q * latency - cfg.weight_b * maps + cfg.weight_f * idle))
    transmitted = int(idle.size - idle.sum())
    mean_map = float(maps[idle == 0].mean()) if transmitted else 0.0

    return EpisodeSummary(
        objective=objective,
        total_delay_s=float(latency.sum()),
        mean_map=mean_map,
        transmitted=transmitted,
        idle_count=int(idle.sum()),
        mean_reward_alloc=float(np.mean([o.reward_alloc for o in outcomes])),
        mean_reward_resol=float(np.mean([o.reward_resol for o in outcomes])),
        steps=len(outcomes),
    )


class UplinkEnv(gym.Env):
    """
    Stateful wrapper around reset/step

    ``step`` returns a reward vector ``[reward_alloc, reward_resol]``, one
    entry per agent, and puts the full StepOutcome under ``info['outcome']``.
    The episode truncates after ``horizon`` iterations.
    """

    metadata = {"render_modes": []}

    def __init__(self, cfg: ScenarioConfig, horizon: Optional[int] = None,
                 curve: Optional[MapCurve] = None):
        super().__init__()
        self.cfg = cfg
        self.horizon = cfg.episode_len if horizon is None else horizon
        self.curve = curve or default_curve(cfg)
        self.state: Optional[WorldState] = None

        n, m = cfg.n_iov, cfg.n_mmbs
        self.observation_space = spaces.Box(
            low=-np.inf, high=np.inf, shape=(cfg.obs_dim,), dtype=np.float64
        )
        self.action_space = spaces.Dict({
            'alloc': spaces.MultiDiscrete([m + 1] * n),
            'resol': spaces.Box(low=cfg.p_min, high=cfg.p_max, shape=(n,), dtype=np.float64),
        })

    def reset(self, *, seed: Optional[int] = None,
              options: Optional[Dict[str, Any]] = None) -> Tuple[np.ndarray, Dict[str, Any]]:
        super().reset(seed=seed)
        self.state = reset(self.cfg, self.np_random)
        return observe(self.state, self.cfg), {'state': self.state}

    def step(self, action: Union[JointAction, Dict[str, np.ndarray]]):
        if self.state is None:
            raise RuntimeError("Call reset() before step()")
        if not isinstance(action, JointAction):
            action = JointAction.from_heads(action['alloc'], action['resol'], self.cfg.n_mmbs)
        self.state, outcome = step(
            self.state, action, self.cfg, self.np_random, self.curve, self.horizon
        )
        reward = np.array([outcome.reward_alloc, outcome.reward_resol])
        truncated = self.state.iteration >= self.horizon
        return outcome.observation, reward, False, truncated, {'outcome': outcome, 'state': self.state}
