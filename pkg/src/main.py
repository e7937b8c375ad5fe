#!/usr/bin/env python3
"""
IoVUplink - Main Entry Point
Command line for training, evaluating and sweeping the dual-agent uplink schedulers
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# 添加当前目录到路径
sys.path.insert(0, str(Path(__file__).parent))

from agents.objectives import NonFiniteLossError  # noqa: E402
from agents.trainers import ALGORITHMS, load_trainer  # noqa: E402
from core.map_model import FitError, fit_curve, load_pairs_csv, save_curve  # noqa: E402
from core.range_parser import parse_int_list  # noqa: E402
from core.scenario import ScenarioError, parse_scenario, parse_scenario_list  # noqa: E402
from core.wireless import UnreachableLinkError  # noqa: E402
from harness.aggregate import aggregate_dir, format_summary  # noqa: E402
from harness.experiment import ExperimentPlan, evaluate_policy, run_experiment, run_single, RunSpec  # noqa: E402
from utils.config import ConfigError, HyperParams, NOISE_MODES, load_config, parse_bool  # noqa: E402
from utils.logger import get_logger  # noqa: E402
from writers.checkpoint import CheckpointError  # noqa: E402
from writers.writer import run_dir  # noqa: E402

logger = get_logger()

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

# domain errors derive from ValueError; all of them are usage or input problems
USAGE_ERRORS = (ConfigError, ScenarioError, FitError, CheckpointError, ValueError)
RUNTIME_ERRORS = (UnreachableLinkError, NonFiniteLossError, OSError, RuntimeError)


def _on_off(text: str) -> bool:
    try:
        return parse_bool(text)
    except ConfigError:
        raise argparse.ArgumentTypeError(f"expected on/off, got '{text}'")


def _add_run_options(parser: argparse.ArgumentParser, lists: bool) -> None:
    """Flags shared by train and sweep; sweep accepts lists"""
    if lists:
        parser.add_argument('--scenario', default='33-37',
                            help="Scenario list, e.g. 33-37 or 33,35 (M then N)")
        parser.add_argument('--algo', default=','.join(ALGORITHMS),
                            help=f"Comma separated algorithms from {', '.join(ALGORITHMS)}")
        parser.add_argument('--seed', default='0-9', help="Seed list, e.g. 0-9 or 0,3")
        parser.add_argument('--jobs', type=int, default=1, help="Parallel runs")
    else:
        parser.add_argument('--scenario', default='33', help="Scenario name, e.g. 37 = 3 MMBS, 7 IoVs")
        parser.add_argument('--algo', default='happo', choices=ALGORITHMS, help="Algorithm")
        parser.add_argument('--seed', type=int, default=0, help="Run seed")
    parser.add_argument('--steps', type=int, default=None, help="Training steps (default 50000)")
    parser.add_argument('--config', type=Path, default=None,
                        help="key=value file with scenario and hyper-parameter settings")
    parser.add_argument('--out', type=Path, default=Path('out'), help="Output root directory")
    parser.add_argument('--fading', type=_on_off, default=None, help="Rayleigh power fading on|off")
    parser.add_argument('--ratio-min-clip', '--eq13-literal', dest='ratio_min_clip',
                        type=_on_off, default=None,
                        help="Use min over ratios before the advantage (on|off)")
    parser.add_argument('--noise-mode', choices=NOISE_MODES, default=None,
                        help="psd: noise_psd is W/Hz, total: noise_psd is the noise power in W")
    parser.add_argument('--eval-every', type=int, default=None, help="Evaluation period in steps")
    parser.add_argument('--eval-len', type=int, default=None, help="Evaluation episode length")
    parser.add_argument('--no-checkpoints', action='store_true', help="Skip writing checkpoints")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='iovuplink',
        description="Dual-agent IoV uplink scheduling: allocation and resolution learners",
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('-v', '--verbose', action='store_true', help="Debug output on the console")
    verbosity.add_argument('-q', '--quiet', action='store_true', help="Warnings and errors only")
    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    train = sub.add_parser('train', help="Train one (scenario, algorithm, seed) run")
    _add_run_options(train, lists=False)

    sweep = sub.add_parser('sweep', help="Train a grid of runs and aggregate them")
    _add_run_options(sweep, lists=True)

    evaluate = sub.add_parser('evaluate', help="Evaluate a saved checkpoint")
    evaluate.add_argument('--checkpoint', type=Path, default=None,
                          help="Checkpoint directory (defaults to <out>/<scenario>/<algo>/<seed>/checkpoints)")
    evaluate.add_argument('--scenario', default='33', help="Scenario name")
    evaluate.add_argument('--algo', default='happo', choices=ALGORITHMS, help="Algorithm")
    evaluate.add_argument('--seed', type=int, default=0, help="Run seed, also seeds evaluation worlds")
    evaluate.add_argument('--out', type=Path, default=Path('out'), help="Output root directory")
    evaluate.add_argument('--episodes', type=int, default=1, help="Evaluation episodes")
    evaluate.add_argument('--eval-len', type=int, default=None, help="Evaluation episode length")
    evaluate.add_argument('--stochastic', action='store_true', help="Sample instead of acting greedily")

    fit = sub.add_parser('fit-map', help="Fit the cubic mAP curve to resolution/mAP pairs")
    fit.add_argument('--in', dest='pairs', type=Path, required=True,
                     help="CSV with header resolution_ppi,map")
    fit.add_argument('--out', type=Path, default=Path('map_curve.txt'), help="Curve file to write")
    fit.add_argument('--degree', type=int, default=3, help="Polynomial degree")

    agg = sub.add_parser('aggregate', help="Median/min/max over seeds of every metrics.csv")
    agg.add_argument('--out', type=Path, default=Path('out'), help="Output root directory")

    plot = sub.add_parser('plot', help="Reward curves and congestion figures as PNG")
    plot.add_argument('--out', type=Path, default=Path('out'), help="Output root directory")

    return parser


def _settings(args: argparse.Namespace):
    """(scenario overrides, hyper-parameters) from --config plus flags"""
    if args.config is not None:
        base_cfg, hp = load_config(args.config)
        overrides = base_cfg.to_dict()
        for key in ('n_iov', 'n_mmbs'):
            overrides.pop(key)
    else:
        overrides, hp = {}, HyperParams()

    if args.fading is not None:
        overrides['fading_enabled'] = args.fading
    if args.noise_mode is not None:
        overrides['noise_mode'] = args.noise_mode

    hp_changes = hp.to_dict()
    if args.steps is not None:
        hp_changes['total_steps'] = args.steps
    if args.ratio_min_clip is not None:
        hp_changes['ratio_min_clip'] = args.ratio_min_clip
    if args.eval_every is not None:
        hp_changes['eval_every'] = args.eval_every
    hp = HyperParams(**hp_changes)

    config_eval_len = overrides.pop('eval_episode_len', 1000)
    eval_len = args.eval_len if args.eval_len is not None else config_eval_len
    return overrides, hp, eval_len


def _plan(args: argparse.Namespace, scenarios: List[str], algorithms: List[str],
          seeds: List[int], jobs: int) -> ExperimentPlan:
    overrides, hp, eval_len = _settings(args)
    return ExperimentPlan(
        scenarios=scenarios, algorithms=algorithms, seeds=seeds,
        total_steps=hp.total_steps, eval_episode_len=eval_len, out_dir=args.out,
        hp=hp, scenario_overrides=overrides, jobs=jobs,
        save_checkpoints=not args.no_checkpoints,
    )


def cmd_train(args: argparse.Namespace) -> int:
    plan = _plan(args, [args.scenario], [args.algo], [args.seed], 1)
    metrics = run_single(RunSpec(args.scenario, args.algo, args.seed), plan)
    directory = run_dir(plan.out_dir, args.scenario, args.algo, args.seed)
    print(f"{directory / 'metrics.csv'}: eval reward alloc={metrics.final_eval_reward_alloc!r} "
          f"resol={metrics.final_eval_reward_resol!r}")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    scenarios = parse_scenario_list(args.scenario)
    algorithms = [a.strip() for a in args.algo.split(',') if a.strip()]
    try:
        seeds = parse_int_list(args.seed)
    except ValueError as e:
        raise ConfigError(f"--seed: {e}") from None
    plan = _plan(args, scenarios, algorithms, seeds, args.jobs)
    results = run_experiment(plan)
    print(f"{len(results)} run(s) written under {plan.out_dir}; summary in {plan.out_dir / 'summary.txt'}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    import pandas as pd

    parse_scenario(args.scenario)
    directory = args.checkpoint or run_dir(args.out, args.scenario, args.algo, args.seed) / 'checkpoints'
    agent, step = load_trainer(directory)
    horizon = args.eval_len or agent.cfg.eval_episode_len
    summaries = evaluate_policy(agent, agent.cfg, args.episodes, args.seed, horizon,
                                deterministic=not args.stochastic)
    table = pd.DataFrame([{
        'episode': i, 'total_delay_s': s.total_delay_s, 'mean_map': s.mean_map,
        'idle_count': s.idle_count, 'reward_alloc': s.mean_reward_alloc,
        'reward_resol': s.mean_reward_resol, 'objective': s.objective,
    } for i, s in enumerate(summaries)])
    print(f"{agent.algorithm} checkpoint at step {step}, {horizon} iterations per episode")
    print(table.to_string(index=False))
    return EXIT_OK


def cmd_fit_map(args: argparse.Namespace) -> int:
    curve = fit_curve(load_pairs_csv(args.pairs), degree=args.degree)
    save_curve(args.out, curve)
    print(f"{args.out}: coefficients {', '.join(repr(c) for c in curve.coeffs)} (rms {curve.fit_rms!r})")
    return EXIT_OK


def cmd_aggregate(args: argparse.Namespace) -> int:
    summary = aggregate_dir(args.out)
    sys.stdout.write(format_summary(summary))
    return EXIT_OK


def cmd_plot(args: argparse.Namespace) -> int:
    from harness.plots import plot_all

    for path in plot_all(args.out):
        print(path)
    return EXIT_OK


COMMANDS = {
    'train': cmd_train,
    'sweep': cmd_sweep,
    'evaluate': cmd_evaluate,
    'fit-map': cmd_fit_map,
    'aggregate': cmd_aggregate,
    'plot': cmd_plot,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.verbose:
        logger.set_console_level(logging.DEBUG)
    elif args.quiet:
        logger.set_console_level(logging.WARNING)

    logger.debug(f"IoVUplink {__version__}: {args.command}")
    try:
        return COMMANDS[args.command](args)
    except USAGE_ERRORS as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"iovuplink: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RUNTIME_ERRORS as e:
        logger.exception(f"{args.command} failed")
        print(f"iovuplink: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
