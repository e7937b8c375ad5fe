"""
Small numpy function approximators

Tanh multilayer perceptrons with exact reverse-mode gradients and the Adam
update rule.
"""

from .mlp import Mlp, ShapeError
from .adam import AdamState, adam_step

__all__ = [
    'Mlp',
    'ShapeError',
    'AdamState',
    'adam_step',
]
