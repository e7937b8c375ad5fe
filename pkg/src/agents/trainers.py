"""
Dual-agent trainers

HappoTrainer          -- two heterogeneous actors, shared critic, clipped surrogate
Haa2cTrainer          -- same structure, single unclipped policy-gradient pass
IndependentPpoTrainer -- two PPO agents, each with a private critic and its own advantage
RandomAgent           -- uniform allocations and resolutions, nothing to learn
"""

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from core.environment import JointAction
from nn.adam import AdamState, adam_step
from utils.config import HyperParams, ScenarioConfig, dump_config, split_config
from utils.logger import get_logger
from writers.checkpoint import (
    CheckpointError, header_layer_sizes, load_params, read_manifest, save_params, write_manifest
)

from .buffer import ActInfo, RolloutBuffer
from .objectives import (
    NonFiniteLossError, clipped_objective, critic_loss, gae_with_cuts,
    normalize, policy_gradient_objective
)
from .policies import AllocPolicy, Critic, ResolPolicy, sample_alloc

logger = get_logger()

ALGORITHMS = ('happo', 'haa2c', 'ippo', 'random')

# seed-stream ids for the per-network initializations
_STREAM_ALLOC = 11
_STREAM_RESOL = 12
_STREAM_CRITIC = 13
_STREAM_CRITIC_RESOL = 14
_STREAM_SHUFFLE = 15

MANIFEST_KEYS = ('algorithm', 'step', 'run_seed')


def _stream_seed(seed: int, stream: int) -> int:
    return int(np.random.default_rng([seed, stream]).integers(2 ** 31 - 1))


@dataclass
class UpdateStats:
    """Diagnostics of one update over a full segment"""
    actor1_loss: float = 0.0
    actor2_loss: float = 0.0
    critic_loss: float = 0.0
    mean_ratio1: float = 1.0
    mean_ratio2: float = 1.0
    initial_ratio_dev: float = 0.0      # max |ρ − 1| before the first gradient step
    adv_alloc_mean: float = 0.0
    adv_alloc_std: float = 0.0
    adv_resol_mean: float = 0.0
    adv_resol_std: float = 0.0
    adv_alloc_abs_initial: float = 0.0
    adv_resol_abs_initial: float = 0.0
    adv_alloc_abs_final: float = 0.0    # recomputed with the live critic after the update
    adv_resol_abs_final: float = 0.0
    critic_losses: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


def random_policy(obs: np.ndarray, rng: np.random.Generator, cfg: ScenarioConfig) -> JointAction:
    """Uniform over {0..M-1, IDLE} per IoV and uniform resolutions in [p_min, p_max]"""
    heads = rng.integers(0, cfg.n_mmbs + 1, size=cfg.n_iov)
    resol = rng.uniform(cfg.p_min, cfg.p_max, size=cfg.n_iov)
    return JointAction.from_heads(heads, resol, cfg.n_mmbs)


class RandomAgent:
    """Baseline without parameters; evaluation only"""

    algorithm = 'random'
    learns = False

    def __init__(self, cfg: ScenarioConfig, hp: Optional[HyperParams] = None, seed: int = 0):
        self.cfg = cfg
        self.hp = hp or HyperParams()
        self.seed = seed

    def act(self, obs: np.ndarray, rng: np.random.Generator,
            deterministic: bool = False) -> Tuple[JointAction, ActInfo]:
        # stays stochastic in evaluation, there is no mode to fall back on
        action = random_policy(obs, rng, self.cfg)
        m1 = self.cfg.n_mmbs + 1
        span = self.cfg.p_max - self.cfg.p_min
        n = self.cfg.n_iov
        info = ActInfo(
            heads=action.heads(self.cfg.n_mmbs),
            z=np.zeros(n),
            logp_alloc=-n * float(np.log(m1)),
            logp_resol=-n * float(np.log(span)),
        )
        return action, info

    def save(self, directory: Union[str, Path], step: int) -> Path:
        directory = Path(directory)
        write_manifest(directory / 'manifest.txt',
                       {'algorithm': self.algorithm, 'step': step, 'run_seed': self.seed},
                       dump_config(self.cfg, self.hp))
        return directory


class _DualActorTrainer:
    """
    Shared machinery of the learning trainers

    Owns both actors, the critic(s), their Adam states and a private
    shuffling stream; ``update`` consumes one full RolloutBuffer.
    """

    algorithm = ''
    learns = True
    clipped = True

    def __init__(self, cfg: ScenarioConfig, hp: HyperParams, seed: int = 0):
        self.cfg = cfg
        self.hp = hp
        self.seed = seed
        obs_dim = cfg.obs_dim

        self.alloc = AllocPolicy(obs_dim, cfg.n_iov, cfg.n_mmbs, hp.hidden_sizes,
                                 seed=_stream_seed(seed, _STREAM_ALLOC))
        self.resol = ResolPolicy(obs_dim, cfg.n_iov, cfg.p_min, cfg.p_max, hp.hidden_sizes,
                                 seed=_stream_seed(seed, _STREAM_RESOL),
                                 init_log_std=hp.init_log_std)
        self.critic = Critic(obs_dim, hp.hidden_sizes, seed=_stream_seed(seed, _STREAM_CRITIC))

        self.alloc_adam = AdamState.create(self.alloc.params.size, hp.actor_lr)
        self.resol_adam = AdamState.create(self.resol.params.size, hp.actor_lr)
        self.critic_adam = AdamState.create(self.critic.params.size, hp.critic_lr)

        self.shuffle_rng = np.random.default_rng([seed, _STREAM_SHUFFLE])
        self.updates = 0
        self.epochs_done = 0

    # ------------------------------------------------------------------
    # acting
    # ------------------------------------------------------------------

    def act(self, obs: np.ndarray, rng: np.random.Generator,
            deterministic: bool = False) -> Tuple[JointAction, ActInfo]:
        """Sample both actors; argmax heads and mean resolutions when deterministic"""
        heads, logp_alloc = sample_alloc(self.alloc, obs, rng, deterministic)
        z, resol, logp_resol = self.resol.sample(obs, rng, deterministic)
        action = JointAction.from_heads(heads, resol, self.cfg.n_mmbs)
        return action, ActInfo(heads=heads, z=z, logp_alloc=logp_alloc, logp_resol=logp_resol)

    # ------------------------------------------------------------------
    # building blocks
    # ------------------------------------------------------------------

    def _advantages(self, rewards: np.ndarray, critic: Critic,
                    buffer: RolloutBuffer, live: bool = False) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(advantages, V(s), V(s′)) from the target critic, or the live one"""
        value_fn = critic.value if live else critic.target_value
        values = value_fn(buffer.obs)
        next_values = value_fn(buffer.next_obs)
        adv = gae_with_cuts(rewards, values, next_values, buffer.ends, self.hp.gamma, self.hp.lam)
        return adv, values, next_values

    def _actor_advantage(self, adv: np.ndarray) -> np.ndarray:
        return normalize(adv) if self.hp.normalize_advantages else adv

    def _ratio_deviation(self, buffer: RolloutBuffer) -> float:
        ratio1 = np.exp(self.alloc.log_prob(buffer.obs, buffer.heads) - buffer.logp_alloc)
        ratio2 = np.exp(self.resol.log_prob(buffer.obs, buffer.z) - buffer.logp_resol)
        return float(max(np.max(np.abs(ratio1 - 1.0)), np.max(np.abs(ratio2 - 1.0))))

    def _actor_step(self, policy, adam: AdamState, obs: np.ndarray, actions: np.ndarray,
                    logp_old: np.ndarray, adv: np.ndarray, name: str) -> Tuple[float, float]:
        """
        One ascent step on a minibatch

        Returns:
            (loss = −objective, mean ratio)
        """
        logp_new = policy.log_prob(obs, actions)
        if self.clipped:
            objective, d_logp, ratio = clipped_objective(
                logp_new, logp_old, adv, self.hp.clip_eps, self.hp.ratio_min_clip
            )
        else:
            objective, d_logp = policy_gradient_objective(logp_new, adv)
            ratio = np.exp(logp_new - logp_old)

        grad = policy.grad_log_prob(obs, actions, d_logp)
        if self.hp.entropy_coef:
            objective += self.hp.entropy_coef * float(policy.entropy(obs).mean())
            grad = grad + policy.grad_entropy(obs, self.hp.entropy_coef)

        if not (np.isfinite(objective) and np.all(np.isfinite(grad))):
            raise NonFiniteLossError(
                f"{name} objective is not finite",
                {'actor': name, 'objective': objective, 'update': self.updates,
                 'max_ratio': float(np.max(ratio)), 'max_abs_adv': float(np.max(np.abs(adv)))},
            )
        policy.params = adam_step(adam, policy.params, -grad)
        return -objective, float(ratio.mean())

    def _critic_step(self, critic: Critic, adam: AdamState, obs: np.ndarray,
                     adv_sum: np.ndarray, next_target_values: np.ndarray) -> float:
        values = critic.value(obs)
        loss, d_values = critic_loss(values, adv_sum, next_target_values, self.hp.gamma)
        grad = critic.grad(obs, d_values)
        if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
            raise NonFiniteLossError(
                "critic loss is not finite",
                {'critic_loss': loss, 'update': self.updates,
                 'max_abs_target_adv': float(np.max(np.abs(adv_sum)))},
            )
        critic.params = adam_step(adam, critic.params, grad)
        return loss

    def _minibatches(self, size: int) -> List[np.ndarray]:
        perm = self.shuffle_rng.permutation(size)
        bs = self.hp.batch_size
        return [perm[start:start + bs] for start in range(0, size, bs)]

    def _n_epochs(self) -> int:
        return self.hp.epochs

    def _end_epoch(self, critics: List[Critic]) -> None:
        """φ′ ← φ every ``target_refresh`` epochs, counted across updates"""
        self.epochs_done += 1
        if self.epochs_done % self.hp.target_refresh == 0:
            for critic in critics:
                critic.refresh_target()

    # ------------------------------------------------------------------
    # checkpoints
    # ------------------------------------------------------------------

    def _networks(self) -> Dict[str, Tuple[object, Optional[List[int]]]]:
        return {
            'actor_alloc': (self.alloc.net, self.alloc.net.layer_sizes),
            'actor_resol': (self.resol.net, self.resol.net.layer_sizes),
            'critic': (self.critic.net, self.critic.net.layer_sizes),
        }

    def save(self, directory: Union[str, Path], step: int) -> Path:
        """Write every network plus a manifest with the configs"""
        directory = Path(directory)
        for name, (net, sizes) in self._networks().items():
            save_params(directory / f'{name}.params', net.params, sizes, seed=self.seed)
        save_params(directory / 'actor_resol_logstd.params', self.resol.log_std, seed=self.seed)
        write_manifest(directory / 'manifest.txt',
                       {'algorithm': self.algorithm, 'step': step, 'run_seed': self.seed},
                       dump_config(self.cfg, self.hp))
        logger.debug(f"Checkpoint written to {directory} at step {step}")
        return directory

    def load_networks(self, directory: Union[str, Path]) -> None:
        directory = Path(directory)
        for name, (net, sizes) in self._networks().items():
            params, header = load_params(directory / f'{name}.params')
            stored = header_layer_sizes(header)
            if stored != tuple(sizes):
                raise CheckpointError(f"{name}: stored layer sizes {stored} != {tuple(sizes)}")
            net.params = params
        log_std, _ = load_params(directory / 'actor_resol_logstd.params')
        self.resol.params = np.concatenate([self.resol.net.params, log_std])
        for critic in self._critics():
            critic.refresh_target()

    def _critics(self) -> List[Critic]:
        return [self.critic]

    def update(self, buffer: RolloutBuffer) -> UpdateStats:
        raise NotImplementedError


class HappoTrainer(_DualActorTrainer):
    """
    Both actors ascend the clipped surrogate on the SHARED advantage
    A^alloc + A^resol; one critic regresses onto A_sum + γ·V_φ′(s′).
    """

    algorithm = 'happo'

    def shared_advantages(self, buffer: RolloutBuffer) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(A^alloc, A^resol, what both actors receive)"""
        adv_alloc, values, next_values = self._advantages(buffer.reward_alloc, self.critic, buffer)
        adv_resol, _, _ = self._advantages(buffer.reward_resol, self.critic, buffer)
        buffer.attach_values(values, next_values)
        actor_adv = self._actor_advantage(adv_alloc) + self._actor_advantage(adv_resol)
        return adv_alloc, adv_resol, actor_adv

    def update(self, buffer: RolloutBuffer) -> UpdateStats:
        buffer.require_full()
        hp = self.hp
        adv_alloc, adv_resol, actor_adv = self.shared_advantages(buffer)
        adv_sum = adv_alloc + adv_resol

        stats = UpdateStats(
            initial_ratio_dev=self._ratio_deviation(buffer),
            adv_alloc_mean=float(adv_alloc.mean()), adv_alloc_std=float(adv_alloc.std()),
            adv_resol_mean=float(adv_resol.mean()), adv_resol_std=float(adv_resol.std()),
            adv_alloc_abs_initial=float(np.abs(adv_alloc).mean()),
            adv_resol_abs_initial=float(np.abs(adv_resol).mean()),
        )
        a1, a2, r1, r2, cl = [], [], [], [], []
        for _ in range(self._n_epochs()):
            epoch_cl = []
            for idx in self._minibatches(buffer.size):
                obs = buffer.obs[idx]
                loss1, ratio1 = self._actor_step(self.alloc, self.alloc_adam, obs, buffer.heads[idx],
                                                 buffer.logp_alloc[idx], actor_adv[idx], 'actor_alloc')
                loss2, ratio2 = self._actor_step(self.resol, self.resol_adam, obs, buffer.z[idx],
                                                 buffer.logp_resol[idx], actor_adv[idx], 'actor_resol')
                closs = self._critic_step(self.critic, self.critic_adam, obs,
                                          adv_sum[idx], buffer.next_values[idx])
                a1.append(loss1)
                a2.append(loss2)
                r1.append(ratio1)
                r2.append(ratio2)
                epoch_cl.append(closs)
            cl.append(float(np.mean(epoch_cl)))
            self._end_epoch([self.critic])

        stats.actor1_loss = float(np.mean(a1))
        stats.actor2_loss = float(np.mean(a2))
        stats.mean_ratio1 = float(np.mean(r1))
        stats.mean_ratio2 = float(np.mean(r2))
        stats.critic_loss = float(np.mean(cl))
        stats.critic_losses = cl
        final_alloc, _, _ = self._advantages(buffer.reward_alloc, self.critic, buffer, live=True)
        final_resol, _, _ = self._advantages(buffer.reward_resol, self.critic, buffer, live=True)
        stats.adv_alloc_abs_final = float(np.abs(final_alloc).mean())
        stats.adv_resol_abs_final = float(np.abs(final_resol).mean())

        self.updates += 1
        buffer.clear()
        logger.debug(
            f"{self.algorithm} update {self.updates}: actor1={stats.actor1_loss:.4g} "
            f"actor2={stats.actor2_loss:.4g} critic={stats.critic_loss:.4g}"
        )
        return stats


class Haa2cTrainer(HappoTrainer):
    """HAPPO's structure with a single unclipped pass of log π·(A^alloc + A^resol)"""

    algorithm = 'haa2c'
    clipped = False

    def _n_epochs(self) -> int:
        return 1


class IndependentPpoTrainer(_DualActorTrainer):
    """
    Two PPO learners that never share a critic or an advantage

    Agent 1 learns from R^alloc with ``critic``; agent 2 from R^resol with
    ``critic_resol``. Each critic targets its own advantage + γ·V′(s′).
    """

    algorithm = 'ippo'

    def __init__(self, cfg: ScenarioConfig, hp: HyperParams, seed: int = 0):
        super().__init__(cfg, hp, seed)
        self.critic_resol = Critic(cfg.obs_dim, hp.hidden_sizes,
                                   seed=_stream_seed(seed, _STREAM_CRITIC_RESOL))
        self.critic_resol_adam = AdamState.create(self.critic_resol.params.size, hp.critic_lr)

    def _critics(self) -> List[Critic]:
        return [self.critic, self.critic_resol]

    def _networks(self):
        nets = super()._networks()
        nets['critic_resol'] = (self.critic_resol.net, self.critic_resol.net.layer_sizes)
        return nets

    def update_agent(self, agent: int, buffer: RolloutBuffer) -> Tuple[float, float, List[float]]:
        """
        Full PPO update of one agent from its own reward stream

        Returns:
            (mean actor loss, mean ratio, per-epoch critic losses)
        """
        if agent == 1:
            policy, adam, actions, logp_old = self.alloc, self.alloc_adam, buffer.heads, buffer.logp_alloc
            critic, critic_adam, rewards = self.critic, self.critic_adam, buffer.reward_alloc
        else:
            policy, adam, actions, logp_old = self.resol, self.resol_adam, buffer.z, buffer.logp_resol
            critic, critic_adam, rewards = self.critic_resol, self.critic_resol_adam, buffer.reward_resol

        adv, _, next_values = self._advantages(rewards, critic, buffer)
        actor_adv = self._actor_advantage(adv)
        shuffle_epochs = self.epochs_done

        losses, ratios, critic_losses = [], [], []
        for epoch in range(self._n_epochs()):
            epoch_cl = []
            for idx in self._minibatches(buffer.size):
                obs = buffer.obs[idx]
                loss, ratio = self._actor_step(policy, adam, obs, actions[idx], logp_old[idx],
                                               actor_adv[idx], f'actor{agent}')
                epoch_cl.append(self._critic_step(critic, critic_adam, obs, adv[idx], next_values[idx]))
                losses.append(loss)
                ratios.append(ratio)
            critic_losses.append(float(np.mean(epoch_cl)))
            if (shuffle_epochs + epoch + 1) % self.hp.target_refresh == 0:
                critic.refresh_target()
        return float(np.mean(losses)), float(np.mean(ratios)), critic_losses

    def update(self, buffer: RolloutBuffer) -> UpdateStats:
        buffer.require_full()
        adv_alloc, values, next_values = self._advantages(buffer.reward_alloc, self.critic, buffer)
        adv_resol, _, _ = self._advantages(buffer.reward_resol, self.critic_resol, buffer)
        buffer.attach_values(values, next_values)
        stats = UpdateStats(
            initial_ratio_dev=self._ratio_deviation(buffer),
            adv_alloc_mean=float(adv_alloc.mean()), adv_alloc_std=float(adv_alloc.std()),
            adv_resol_mean=float(adv_resol.mean()), adv_resol_std=float(adv_resol.std()),
            adv_alloc_abs_initial=float(np.abs(adv_alloc).mean()),
            adv_resol_abs_initial=float(np.abs(adv_resol).mean()),
        )

        stats.actor1_loss, stats.mean_ratio1, cl1 = self.update_agent(1, buffer)
        stats.actor2_loss, stats.mean_ratio2, cl2 = self.update_agent(2, buffer)
        self.epochs_done += self._n_epochs()
        stats.critic_losses = [0.5 * (a + b) for a, b in zip(cl1, cl2)]
        stats.critic_loss = float(np.mean(stats.critic_losses))

        final_alloc, _, _ = self._advantages(buffer.reward_alloc, self.critic, buffer, live=True)
        final_resol, _, _ = self._advantages(buffer.reward_resol, self.critic_resol, buffer, live=True)
        stats.adv_alloc_abs_final = float(np.abs(final_alloc).mean())
        stats.adv_resol_abs_final = float(np.abs(final_resol).mean())

        self.updates += 1
        buffer.clear()
        logger.debug(
            f"ippo update {self.updates}: actor1={stats.actor1_loss:.4g} "
            f"actor2={stats.actor2_loss:.4g} critic={stats.critic_loss:.4g}"
        )
        return stats


_TRAINERS = {
    'happo': HappoTrainer,
    'haa2c': Haa2cTrainer,
    'ippo': IndependentPpoTrainer,
    'random': RandomAgent,
}


def make_trainer(algorithm: str, cfg: ScenarioConfig, hp: HyperParams, seed: int = 0):
    """
    Build the agent for an algorithm name

    Raises:
        ValueError: Unknown algorithm
    """
    try:
        cls = _TRAINERS[algorithm]
    except KeyError:
        raise ValueError(
            f"Unknown algorithm '{algorithm}', expected one of {', '.join(ALGORITHMS)}"
        ) from None
    return cls(cfg, hp, seed)


def load_trainer(directory: Union[str, Path]):
    """
    Rebuild an agent from a checkpoint directory

    Returns:
        (agent, step the checkpoint was taken at)
    """
    directory = Path(directory)
    entries = read_manifest(directory / 'manifest.txt')
    missing = [key for key in MANIFEST_KEYS if key not in entries]
    if missing:
        raise CheckpointError(f"{directory}/manifest.txt lacks {', '.join(missing)}")

    raw = {k: v for k, v in entries.items() if k not in MANIFEST_KEYS}
    scenario_kwargs, hp_kwargs = split_config(raw)
    cfg = ScenarioConfig(**scenario_kwargs)
    hp = HyperParams(**hp_kwargs)
    agent = make_trainer(entries['algorithm'], cfg, hp, int(entries['run_seed']))
    if agent.learns:
        agent.load_networks(directory)
    logger.info(f"Loaded {agent.algorithm} checkpoint from {directory} (step {entries['step']})")
    return agent, int(entries['step'])
