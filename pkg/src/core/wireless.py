"""
Uplink radio formulas

Data size, path-loss channel gain, intra-cell SINR, Shannon rate and
transmission latency. Scalar helpers follow the formulas literally; the
``*_matrix`` / ``*_all`` variants are the vectorized forms the environment
steps with.
"""

import math
from typing import Optional, Sequence

import numpy as np

from utils.config import ScenarioConfig

# allocation value of an IoV that sits out the current uplink
IDLE = -1

MIN_DISTANCE_M = 1.0


class UnreachableLinkError(RuntimeError):
    """Data is pending on a link whose rate is zero"""


def data_size(p: float, bits_per_pixel: float) -> float:
    """Bits of a square frame with side p: ξ·p²"""
    return bits_per_pixel * p * p


def channel_gain(iov_pos: Sequence[float], mmbs_pos: Sequence[float],
                 cfg: ScenarioConfig, fading: float = 1.0) -> float:
    """
    Log-distance path loss gain β₀·d^(-α)

    Args:
        iov_pos: (x, y) of the vehicle in meters
        mmbs_pos: (x, y) of the base station in meters
        cfg: Scenario parameters (β₀, α)
        fading: Small-scale power fading multiplier for this iteration

    Returns:
        Linear channel gain
    """
    d = math.hypot(iov_pos[0] - mmbs_pos[0], iov_pos[1] - mmbs_pos[1])
    d = max(d, MIN_DISTANCE_M)
    return cfg.reference_gain * d ** (-cfg.path_loss_exponent) * fading


def gain_matrix(iov_positions: np.ndarray, cfg: ScenarioConfig,
                rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """
    N×M gains for every IoV/MMBS pair

    A fresh unit-mean exponential fading draw is applied per pair when
    fading is enabled, which needs ``rng``.
    """
    sites = np.asarray(cfg.mmbs_positions, dtype=np.float64)
    diff = iov_positions[:, None, :] - sites[None, :, :]
    dist = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), MIN_DISTANCE_M)
    gains = cfg.reference_gain * dist ** (-cfg.path_loss_exponent)
    if cfg.fading_enabled:
        if rng is None:
            raise ValueError("fading is enabled but no random generator was given")
        gains = gains * rng.exponential(1.0, size=gains.shape)
    return gains


def sinr(i: int, alloc: Sequence[int], gains: np.ndarray, powers: Sequence[float],
         cfg: ScenarioConfig) -> float:
    """
    SINR of IoV i with interference from co-assigned IoVs only

    Raises:
        ValueError: IoV i is IDLE, callers must skip idle IoVs
    """
    v = alloc[i]
    if v == IDLE:
        raise ValueError(f"IoV {i} is idle and has no SINR")
    signal = gains[i][v] * powers[i]
    interference = 0.0
    for n, c in enumerate(alloc):
        if n != i and c == v:
            interference += gains[n][v] * powers[n]
    return signal / (interference + cfg.noise_power_w)


def sinr_all(alloc: np.ndarray, gains: np.ndarray, powers: np.ndarray,
             noise_power_w: float) -> np.ndarray:
    """SINR of every IoV, NaN where idle"""
    alloc = np.asarray(alloc)
    active = alloc != IDLE
    out = np.full(alloc.shape[0], np.nan)
    if not active.any():
        return out
    rows = np.nonzero(active)[0]
    cells = alloc[rows]
    received = gains[rows, cells] * powers[rows]
    # total power landing on each cell, then remove the own signal
    per_cell = np.bincount(cells, weights=received, minlength=gains.shape[1])
    interference = per_cell[cells] - received
    out[rows] = received / (interference + noise_power_w)
    return out


def rate(gamma: float, bandwidth_hz: float) -> float:
    """Shannon rate B·log₂(1+Γ) in bit/s"""
    if gamma < 0:
        raise ValueError(f"SINR must be non-negative, got {gamma}")
    return bandwidth_hz * math.log1p(gamma) / math.log(2.0)


def rate_all(gammas: np.ndarray, bandwidth_hz: float) -> np.ndarray:
    return bandwidth_hz * np.log1p(gammas) / np.log(2.0)


def latency(d: float, r: float) -> float:
    """
    Transmission delay d/r in seconds

    Raises:
        UnreachableLinkError: d > 0 on a zero-rate link
    """
    if d == 0:
        return 0.0
    if r <= 0:
        raise UnreachableLinkError(f"{d} bits pending on a link with rate {r}")
    return d / r
