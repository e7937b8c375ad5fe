"""
Advantage estimation and the policy/value losses

Every loss comes with its derivative with respect to the quantity the
network produces (log-probabilities for actors, values for critics); the
networks chain these through ``Mlp.backward``.
"""

from typing import Optional, Tuple

import numpy as np


class NonFiniteLossError(RuntimeError):
    """A loss or gradient became NaN/inf; carries the update diagnostics"""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def gae(rewards: np.ndarray, values: np.ndarray, gamma: float, lam: float) -> np.ndarray:
    """
    Truncated TD(λ) advantages over one segment

    Args:
        rewards: T̄ rewards
        values: T̄+1 state values, the last one is the bootstrap V(s^{T̄+1})
        gamma: Discount
        lam: Trace decay

    Returns:
        T̄ advantages A^t = Σ_k (γλ)^k δ^{t+k}, cut at the segment end
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if values.shape != (rewards.shape[0] + 1,):
        raise ValueError(f"values needs {rewards.shape[0] + 1} entries, got {values.shape[0]}")
    return gae_with_cuts(rewards, values[:-1], values[1:], np.zeros(rewards.shape[0], bool), gamma, lam)


def gae_with_cuts(rewards: np.ndarray, values: np.ndarray, next_values: np.ndarray,
                  ends: np.ndarray, gamma: float, lam: float) -> np.ndarray:
    """
    TD(λ) advantages over a segment that may span several episodes

    ``next_values[t]`` is V(s^{t+1}) of the state actually reached, so a
    time-limit end still bootstraps; ``ends[t]`` only stops the trace from
    leaking into the following episode.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    n = rewards.shape[0]
    if not (np.shape(values) == np.shape(next_values) == np.shape(ends) == (n,)):
        raise ValueError("rewards, values, next_values and ends must have equal length")

    deltas = rewards + gamma * np.asarray(next_values) - np.asarray(values)
    advantages = np.zeros(n)
    running = 0.0
    for t in range(n - 1, -1, -1):
        if ends[t]:
            running = 0.0
        running = deltas[t] + gamma * lam * running
        advantages[t] = running
    return advantages


def normalize(x: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    """Zero mean, unit std (left centred only when the std vanishes)"""
    x = np.asarray(x, dtype=np.float64)
    std = x.std()
    return (x - x.mean()) / (std + eps) if std > eps else x - x.mean()


def clipped_objective(log_prob_new: np.ndarray, log_prob_old: np.ndarray,
                      advantage: np.ndarray, eps: float,
                      literal: bool = False) -> Tuple[float, np.ndarray, np.ndarray]:
    """
    Batch-mean clipped surrogate and its gradient

    Standard form: min(ρA, clip(ρ, 1−ε, 1+ε)A).
    Literal form: min(ρ, clip(ρ, 1−ε, 1+ε))·A, i.e. the minimum over ratios
    taken before the advantage is applied.

    Returns:
        (objective, d objective / d log_prob_new per sample, ratios)
    """
    log_prob_new = np.asarray(log_prob_new, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    ratio = np.exp(log_prob_new - np.asarray(log_prob_old, dtype=np.float64))
    clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps)
    batch = max(ratio.shape[0], 1)

    if literal:
        chosen = np.minimum(ratio, clipped)
        terms = chosen * advantage
        # min(ρ, clip(ρ)) follows ρ unless ρ > 1+ε
        live = ratio <= 1.0 + eps
    else:
        unclipped_terms = ratio * advantage
        clipped_terms = clipped * advantage
        terms = np.minimum(unclipped_terms, clipped_terms)
        live = unclipped_terms <= clipped_terms

    grad = np.where(live, ratio * advantage, 0.0) / batch
    return float(terms.mean()), grad, ratio


def ppo_actor_objective(log_prob_new: np.ndarray, log_prob_old: np.ndarray,
                        advantage_sum: np.ndarray, eps: float, literal: bool = False) -> float:
    """Clipped surrogate to maximize, averaged over the batch"""
    objective, _, _ = clipped_objective(log_prob_new, log_prob_old, advantage_sum, eps, literal)
    return objective


def policy_gradient_objective(log_prob: np.ndarray,
                              advantage: np.ndarray) -> Tuple[float, np.ndarray]:
    """Unclipped mean log π·A and its gradient per sample"""
    log_prob = np.asarray(log_prob, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    batch = max(log_prob.shape[0], 1)
    return float(np.mean(log_prob * advantage)), advantage / batch


def critic_targets(advantage_sum: np.ndarray, next_target_values: np.ndarray,
                   gamma: float) -> np.ndarray:
    """(A^alloc + A^resol) + γ·V_φ′(s^{t+1})"""
    return np.asarray(advantage_sum, dtype=np.float64) + gamma * np.asarray(next_target_values)


def critic_loss(values: np.ndarray, advantage_sum: np.ndarray,
                next_target_values: np.ndarray, gamma: float) -> Tuple[float, np.ndarray]:
    """
    Mean squared error against the frozen-target value target

    Returns:
        (loss, d loss / d values); targets are constants
    """
    values = np.asarray(values, dtype=np.float64)
    diff = values - critic_targets(advantage_sum, next_target_values, gamma)
    batch = max(values.shape[0], 1)
    return float(np.mean(diff ** 2)), 2.0 * diff / batch
