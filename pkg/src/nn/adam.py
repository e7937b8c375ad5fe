"""
Adam optimizer state and update
"""

from dataclasses import dataclass

import numpy as np

from .mlp import ShapeError


@dataclass
class AdamState:
    """Moment estimates for one parameter vector"""
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def create(cls, n_params: int, lr: float, **kwargs) -> 'AdamState':
        return cls(m=np.zeros(n_params), v=np.zeros(n_params), lr=lr, **kwargs)


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """
    One bias-corrected Adam descent step

    Moments in ``state`` are advanced in place; the caller negates
    ``grads`` for ascent.

    Returns:
        Updated copy of params
    """
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if not (params.shape == grads.shape == state.m.shape):
        raise ShapeError(
            f"Adam length mismatch: params {params.shape}, grads {grads.shape}, state {state.m.shape}"
        )

    state.t += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads ** 2
    m_hat = state.m / (1.0 - state.beta1 ** state.t)
    v_hat = state.v / (1.0 - state.beta2 ** state.t)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
