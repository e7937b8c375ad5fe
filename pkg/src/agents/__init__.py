"""
Learning algorithms: policies, rollout storage, objectives and trainers
"""

from .buffer import ActInfo, RolloutBuffer
from .objectives import (
    NonFiniteLossError, clipped_objective, critic_loss, critic_targets, gae,
    gae_with_cuts, policy_gradient_objective, ppo_actor_objective
)
from .policies import AllocPolicy, Critic, ResolPolicy, sample_alloc, sample_resol
from .trainers import (
    ALGORITHMS, Haa2cTrainer, HappoTrainer, IndependentPpoTrainer, RandomAgent,
    UpdateStats, load_trainer, make_trainer, random_policy
)

__all__ = [
    'ActInfo', 'RolloutBuffer',
    'NonFiniteLossError', 'clipped_objective', 'critic_loss', 'critic_targets', 'gae',
    'gae_with_cuts', 'policy_gradient_objective', 'ppo_actor_objective',
    'AllocPolicy', 'Critic', 'ResolPolicy', 'sample_alloc', 'sample_resol',
    'ALGORITHMS', 'Haa2cTrainer', 'HappoTrainer', 'IndependentPpoTrainer', 'RandomAgent',
    'UpdateStats', 'load_trainer', 'make_trainer', 'random_policy',
]
