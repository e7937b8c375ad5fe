"""
Actor and critic networks

AllocPolicy  -- discrete IoV->MMBS allocation, N categorical heads of size M+1
ResolPolicy  -- continuous resolutions, diagonal Gaussian squashed into [p_min, p_max]
Critic       -- state value with a stale target copy
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from nn.mlp import Mlp, ShapeError

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# final policy layer scale, keeps the initial policies near uniform
POLICY_OUTPUT_SCALE = 0.01


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _batch(obs: np.ndarray) -> np.ndarray:
    obs = np.asarray(obs, dtype=np.float64)
    return obs[None, :] if obs.ndim == 1 else obs


class AllocPolicy:
    """
    Factored categorical policy over allocations

    Head i picks c_i ∈ {0..M-1} or M (idle); the joint log-probability is the
    sum over heads.
    """

    def __init__(self, obs_dim: int, n_iov: int, n_mmbs: int,
                 hidden: Sequence[int] = (64, 64), seed: int = 0):
        self.n_iov = n_iov
        self.n_choices = n_mmbs + 1
        self.net = Mlp([obs_dim, *hidden, n_iov * self.n_choices], seed=seed,
                       output_scale=POLICY_OUTPUT_SCALE)

    @property
    def params(self) -> np.ndarray:
        return self.net.params

    @params.setter
    def params(self, value: np.ndarray) -> None:
        self.net.params = np.asarray(value, dtype=np.float64)

    def log_probs_all(self, obs: np.ndarray) -> np.ndarray:
        """(B, N, M+1) per-head log-probabilities"""
        logits = self.net.forward(_batch(obs)).reshape(-1, self.n_iov, self.n_choices)
        return _log_softmax(logits)

    def probs(self, obs: np.ndarray) -> np.ndarray:
        return np.exp(self.log_probs_all(obs))

    def log_prob(self, obs: np.ndarray, heads: np.ndarray) -> np.ndarray:
        """Joint log π(a|s) for a batch of head choices (B, N)"""
        logp = self.log_probs_all(obs)
        heads = np.asarray(heads, dtype=np.int64).reshape(logp.shape[0], self.n_iov)
        picked = np.take_along_axis(logp, heads[..., None], axis=-1)[..., 0]
        return picked.sum(axis=1)

    def sample(self, obs: np.ndarray, rng: np.random.Generator,
               deterministic: bool = False) -> Tuple[np.ndarray, float]:
        """One allocation for a single observation; argmax per head when deterministic"""
        logp = self.log_probs_all(obs)[0]
        if deterministic:
            heads = logp.argmax(axis=1)
        else:
            cdf = np.cumsum(np.exp(logp), axis=1)
            u = rng.random(self.n_iov)
            heads = np.minimum((u[:, None] > cdf).sum(axis=1), self.n_choices - 1)
        return heads.astype(np.int64), float(logp[np.arange(self.n_iov), heads].sum())

    def grad_log_prob(self, obs: np.ndarray, heads: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """∇θ Σ_b w_b·log π(a_b|s_b)"""
        obs = _batch(obs)
        probs = self.probs(obs)
        heads = np.asarray(heads, dtype=np.int64).reshape(probs.shape[0], self.n_iov)
        onehot = np.zeros_like(probs)
        np.put_along_axis(onehot, heads[..., None], 1.0, axis=-1)
        upstream = (onehot - probs) * np.asarray(weights, dtype=np.float64)[:, None, None]
        return self.net.backward(obs, upstream.reshape(obs.shape[0], -1))

    def entropy(self, obs: np.ndarray) -> np.ndarray:
        """Summed head entropies per observation"""
        logp = self.log_probs_all(obs)
        return -(np.exp(logp) * logp).sum(axis=(1, 2))

    def grad_entropy(self, obs: np.ndarray, weight: float) -> np.ndarray:
        """∇θ of weight·mean entropy"""
        obs = _batch(obs)
        logp = self.log_probs_all(obs)
        p = np.exp(logp)
        head_entropy = -(p * logp).sum(axis=-1, keepdims=True)
        upstream = -p * (logp + head_entropy) * (weight / obs.shape[0])
        return self.net.backward(obs, upstream.reshape(obs.shape[0], -1))


class ResolPolicy:
    """
    Diagonal Gaussian over pre-squash resolutions

    z ~ N(μ(s), σ²); resolution = p_min + (tanh(z)+1)/2·(p_max−p_min).
    Log-probabilities are taken in z-space, without the tanh Jacobian.
    The parameter vector is [network params, log_std].
    """

    def __init__(self, obs_dim: int, n_iov: int, p_min: float, p_max: float,
                 hidden: Sequence[int] = (64, 64), seed: int = 0, init_log_std: float = 0.0):
        self.n_iov = n_iov
        self.p_min = p_min
        self.p_max = p_max
        self.net = Mlp([obs_dim, *hidden, n_iov], seed=seed, output_scale=POLICY_OUTPUT_SCALE)
        self.log_std = np.full(n_iov, float(np.clip(init_log_std, LOG_STD_MIN, LOG_STD_MAX)))

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([self.net.params, self.log_std])

    @params.setter
    def params(self, value: np.ndarray) -> None:
        value = np.asarray(value, dtype=np.float64)
        if value.shape != (self.net.n_params + self.n_iov,):
            raise ShapeError(f"ResolPolicy expects {self.net.n_params + self.n_iov} parameters")
        self.net.params = value[:self.net.n_params].copy()
        self.log_std = np.clip(value[self.net.n_params:], LOG_STD_MIN, LOG_STD_MAX)

    def mean(self, obs: np.ndarray) -> np.ndarray:
        return self.net.forward(_batch(obs))

    def squash(self, z: np.ndarray) -> np.ndarray:
        """Map pre-squash values into [p_min, p_max]"""
        resol = self.p_min + (np.tanh(z) + 1.0) / 2.0 * (self.p_max - self.p_min)
        return np.clip(resol, self.p_min, self.p_max)

    def log_prob(self, obs: np.ndarray, z: np.ndarray) -> np.ndarray:
        mu = self.mean(obs)
        z = np.asarray(z, dtype=np.float64).reshape(mu.shape)
        std = np.exp(self.log_std)
        per_dim = -0.5 * ((z - mu) / std) ** 2 - self.log_std - HALF_LOG_2PI
        return per_dim.sum(axis=1)

    def sample(self, obs: np.ndarray, rng: np.random.Generator,
               deterministic: bool = False) -> Tuple[np.ndarray, np.ndarray, float]:
        """
        Returns:
            (z, resolutions, log-prob of z)
        """
        mu = self.mean(obs)[0]
        if deterministic:
            z = mu.copy()
        else:
            z = mu + np.exp(self.log_std) * rng.standard_normal(self.n_iov)
        logp = float(self.log_prob(obs, z[None, :])[0])
        return z, self.squash(z), logp

    def grad_log_prob(self, obs: np.ndarray, z: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """∇ Σ_b w_b·log N(z_b; μ(s_b), σ²) for [network params, log_std]"""
        obs = _batch(obs)
        mu = self.mean(obs)
        z = np.asarray(z, dtype=np.float64).reshape(mu.shape)
        w = np.asarray(weights, dtype=np.float64)[:, None]
        var = np.exp(2.0 * self.log_std)
        d_mu = (z - mu) / var * w
        d_log_std = ((((z - mu) ** 2) / var - 1.0) * w).sum(axis=0)
        return np.concatenate([self.net.backward(obs, d_mu), d_log_std])

    def entropy(self, obs: np.ndarray) -> np.ndarray:
        per_obs = float(np.sum(self.log_std + HALF_LOG_2PI + 0.5))
        return np.full(_batch(obs).shape[0], per_obs)

    def grad_entropy(self, obs: np.ndarray, weight: float) -> np.ndarray:
        return np.concatenate([np.zeros(self.net.n_params), np.full(self.n_iov, weight)])


class Critic:
    """State-value network V_φ with target copy φ′"""

    def __init__(self, obs_dim: int, hidden: Sequence[int] = (64, 64), seed: int = 0):
        self.net = Mlp([obs_dim, *hidden, 1], seed=seed)
        self.target = self.net.copy()

    @property
    def params(self) -> np.ndarray:
        return self.net.params

    @params.setter
    def params(self, value: np.ndarray) -> None:
        self.net.params = np.asarray(value, dtype=np.float64)

    def value(self, obs: np.ndarray) -> np.ndarray:
        return self.net.forward(_batch(obs))[:, 0]

    def target_value(self, obs: np.ndarray) -> np.ndarray:
        return self.target.forward(_batch(obs))[:, 0]

    def grad(self, obs: np.ndarray, d_values: np.ndarray) -> np.ndarray:
        obs = _batch(obs)
        return self.net.backward(obs, np.asarray(d_values, dtype=np.float64)[:, None])

    def refresh_target(self) -> None:
        """φ′ ← φ"""
        self.target.params = self.net.params.copy()


def sample_alloc(policy: AllocPolicy, obs: np.ndarray, rng: np.random.Generator,
                 deterministic: bool = False) -> Tuple[np.ndarray, float]:
    """(head indices with M for idle, joint log-prob)"""
    return policy.sample(obs, rng, deterministic)


def sample_resol(policy: ResolPolicy, obs: np.ndarray, rng: np.random.Generator,
                 deterministic: bool = False) -> Tuple[np.ndarray, float]:
    """(resolutions, log-prob of the pre-squash draw)"""
    _, resol, logp = policy.sample(obs, rng, deterministic)
    return resol, logp
