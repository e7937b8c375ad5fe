"""
Experiment orchestration

One run is a (scenario, algorithm, seed) triple: train with periodic
evaluation, write the run directory, return its MetricsRow. A sweep fans
runs out over a process pool; every run writes only its own directory.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from agents.buffer import RolloutBuffer
from agents.trainers import ALGORITHMS, make_trainer
from core.environment import EpisodeSummary, UplinkEnv, episode_objective
from core.scenario import CONGESTION_SCENARIOS, parse_scenario, scenario_config
from harness.aggregate import aggregate_dir
from utils.config import ConfigError, HyperParams, ScenarioConfig
from utils.logger import get_logger
from writers.structures import EpisodeRow, EvaluationRow, MetricsRow, TrainLogRow
from writers.writer import RunWriter, run_dir

logger = get_logger()

# seed-stream ids, kept apart from the trainers' initialization streams
_STREAM_ACT = 21
_STREAM_EVAL_ENV = 22
_STREAM_EVAL_ACT = 23

FINAL_FRACTION = 0.1


def _derived_seed(*entropy: int) -> int:
    return int(np.random.SeedSequence(list(entropy)).generate_state(1)[0])


@dataclass(frozen=True)
class RunSpec:
    scenario: str
    algorithm: str
    seed: int


@dataclass
class ExperimentPlan:
    """
    Grid of runs and the settings they share

    ``scenario_overrides`` are ScenarioConfig fields applied to every
    scenario; ``hp.total_steps`` is replaced by ``total_steps``.
    """
    scenarios: List[str] = field(default_factory=lambda: list(CONGESTION_SCENARIOS))
    algorithms: List[str] = field(default_factory=lambda: list(ALGORITHMS))
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    total_steps: int = 50_000
    eval_episode_len: int = 1000
    out_dir: Path = Path('out')
    hp: HyperParams = field(default_factory=HyperParams)
    scenario_overrides: Dict[str, Any] = field(default_factory=dict)
    jobs: int = 1
    save_checkpoints: bool = True

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        self.scenarios = [str(s) for s in self.scenarios]
        for name in self.scenarios:
            parse_scenario(name)
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"Unknown algorithm(s): {', '.join(unknown)}")
        if not self.scenarios or not self.algorithms or not self.seeds:
            raise ConfigError("Plan needs at least one scenario, algorithm and seed")
        if self.total_steps < 0 or self.eval_episode_len < 1 or self.jobs < 1:
            raise ConfigError("total_steps >= 0, eval_episode_len >= 1 and jobs >= 1 required")
        self.hp = replace(self.hp, total_steps=self.total_steps)

    def runs(self) -> List[RunSpec]:
        return [RunSpec(s, a, int(seed))
                for s in self.scenarios for a in self.algorithms for seed in self.seeds]

    def config_for(self, scenario: str) -> ScenarioConfig:
        overrides = dict(self.scenario_overrides)
        overrides['eval_episode_len'] = self.eval_episode_len
        return scenario_config(scenario, **overrides)


def eval_points(total_steps: int, every: int) -> List[int]:
    """Multiples of ``every`` up to ``total_steps``, plus the final step"""
    points = list(range(every, total_steps + 1, every))
    if not points or points[-1] != total_steps:
        points.append(total_steps)
    return points


def evaluate_policy(agent, cfg: ScenarioConfig, episodes: int = 1, seed: int = 0,
                    horizon: Optional[int] = None, deterministic: bool = True,
                    round_index: int = 0) -> List[EpisodeSummary]:
    """
    Roll the agent out on fresh evaluation episodes

    Evaluation worlds depend only on (seed, episode index), so every
    evaluation of a run sees the same scenes. ``round_index`` varies the
    action stream of stochastic agents between evaluation rounds.

    Returns:
        One EpisodeSummary per episode
    """
    env = UplinkEnv(cfg, horizon=horizon or cfg.eval_episode_len)
    rng = np.random.default_rng([seed, _STREAM_EVAL_ACT, round_index])
    summaries = []
    for episode in range(episodes):
        obs, _ = env.reset(seed=_derived_seed(seed, _STREAM_EVAL_ENV, episode))
        outcomes = []
        truncated = False
        while not truncated:
            action, _ = agent.act(obs, rng, deterministic)
            obs, _, _, truncated, info = env.step(action)
            outcomes.append(info['outcome'])
        summaries.append(episode_objective(outcomes, cfg))
    return summaries


def _tail_mean(values: Sequence[float]) -> Optional[float]:
    """Mean over the last 10% of entries (at least one); None when empty"""
    if not values:
        return None
    count = max(1, math.ceil(FINAL_FRACTION * len(values)))
    return float(np.mean(values[-count:]))


def train_run(cfg: ScenarioConfig, hp: HyperParams, algorithm: str, seed: int,
              scenario: str, directory: Union[str, Path],
              save_checkpoints: bool = True) -> MetricsRow:
    """
    Train one agent with periodic deterministic evaluation

    The random baseline skips training and is only evaluated, on the same
    schedule.

    Returns:
        The run's MetricsRow, also written to ``metrics.csv``
    """
    agent = make_trainer(algorithm, cfg, hp, seed)
    points = eval_points(hp.total_steps, hp.eval_every)
    train_rewards = []
    eval_rows: List[EvaluationRow] = []

    logger.info(f"Run {scenario}/{algorithm}/{seed}: {hp.total_steps} steps, "
                f"{len(points)} evaluations")

    with RunWriter(directory) as writer:

        def evaluate(step: int) -> None:
            summary = evaluate_policy(agent, cfg, 1, seed, round_index=len(eval_rows))[0]
            row = EvaluationRow(
                step=step, seed=seed, scenario=scenario, episode=len(eval_rows),
                total_delay_s=summary.total_delay_s, mean_map=summary.mean_map,
                idle_count=summary.idle_count, reward_alloc=summary.mean_reward_alloc,
                reward_resol=summary.mean_reward_resol,
            )
            writer.evaluation(row)
            eval_rows.append(row)
            logger.debug(f"eval @{step}: R1={row.reward_alloc:.4g} R2={row.reward_resol:.4g} "
                         f"delay={row.total_delay_s:.4g}s")

        if not agent.learns:
            for step in points:
                evaluate(step)
        else:
            env = UplinkEnv(cfg)
            act_rng = np.random.default_rng([seed, _STREAM_ACT])
            buffer = RolloutBuffer(hp.segment_len, cfg.obs_dim, cfg.n_iov)
            obs, _ = env.reset(seed=seed)
            outcomes = []
            pending = list(points)
            if pending and pending[0] == 0:
                evaluate(pending.pop(0))

            for step in range(1, hp.total_steps + 1):
                action, info = agent.act(obs, act_rng)
                next_obs, reward, _, truncated, env_info = env.step(action)
                buffer.add(obs, info, reward[0], reward[1], next_obs, truncated)
                outcomes.append(env_info['outcome'])
                obs = next_obs

                if truncated:
                    summary = episode_objective(outcomes, cfg)
                    writer.episode(EpisodeRow(
                        seed=seed, scenario=scenario, episode=len(train_rewards),
                        total_delay_s=summary.total_delay_s, mean_map=summary.mean_map,
                        idle_count=summary.idle_count, reward_alloc=summary.mean_reward_alloc,
                        reward_resol=summary.mean_reward_resol,
                    ))
                    train_rewards.append((summary.mean_reward_alloc, summary.mean_reward_resol))
                    outcomes = []
                    obs, _ = env.reset()

                if buffer.full:
                    seg_alloc = float(buffer.reward_alloc.mean())
                    seg_resol = float(buffer.reward_resol.mean())
                    stats = agent.update(buffer)
                    writer.train(TrainLogRow(
                        step=step, reward_alloc=seg_alloc, reward_resol=seg_resol,
                        actor1_loss=stats.actor1_loss, actor2_loss=stats.actor2_loss,
                        critic_loss=stats.critic_loss, mean_ratio1=stats.mean_ratio1,
                        mean_ratio2=stats.mean_ratio2,
                    ))

                if pending and step == pending[0]:
                    pending.pop(0)
                    evaluate(step)

        last = eval_rows[-1]
        metrics = MetricsRow(
            scenario=scenario, algorithm=algorithm, seed=seed,
            final_train_reward_alloc=_tail_mean([r[0] for r in train_rewards]),
            final_train_reward_resol=_tail_mean([r[1] for r in train_rewards]),
            final_eval_reward_alloc=_tail_mean([r.reward_alloc for r in eval_rows]),
            final_eval_reward_resol=_tail_mean([r.reward_resol for r in eval_rows]),
            eval_total_delay_s=last.total_delay_s,
            eval_mean_map=last.mean_map,
            eval_idle_count=last.idle_count,
        )
        writer.metrics(metrics)
        if save_checkpoints:
            agent.save(writer.checkpoint_dir, hp.total_steps)

    logger.info(f"Run {scenario}/{algorithm}/{seed} done: "
                f"eval R1={metrics.final_eval_reward_alloc:.4g} R2={metrics.final_eval_reward_resol:.4g}")
    return metrics


def run_single(spec: RunSpec, plan: ExperimentPlan) -> MetricsRow:
    """Execute one triple of a plan (top level so worker processes can pickle it)"""
    cfg = plan.config_for(spec.scenario)
    directory = run_dir(plan.out_dir, spec.scenario, spec.algorithm, spec.seed)
    return train_run(cfg, plan.hp, spec.algorithm, spec.seed, spec.scenario, directory,
                     plan.save_checkpoints)


def run_experiment(plan: ExperimentPlan) -> List[MetricsRow]:
    """
    Run every triple of the plan, in parallel when ``plan.jobs > 1``,
    then write the aggregated summary at the output root

    Returns:
        MetricsRows in plan order
    """

    runs = plan.runs()
    try:
        plan.out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"Cannot create output directory {plan.out_dir}: {e}")
        raise

    logger.info(f"Experiment: {len(runs)} runs into {plan.out_dir} with {plan.jobs} job(s)")
    if plan.jobs == 1 or len(runs) == 1:
        results = [run_single(spec, plan) for spec in runs]
    else:
        with ProcessPoolExecutor(max_workers=min(plan.jobs, len(runs))) as executor:
            results = list(executor.map(run_single, runs, [plan] * len(runs)))

    aggregate_dir(plan.out_dir, plan.scenarios, plan.algorithms)
    return results


__all__ = [
    'ExperimentPlan', 'RunSpec', 'eval_points', 'evaluate_policy',
    'run_experiment', 'run_single', 'train_run',
]
