"""
Offline figures for a finished sweep

reward_curves_<scenario>.png -- per-agent evaluation reward over training steps,
                               median over seeds with a min/max band
congestion.png               -- delay, mAP and idle count against the IoV count
"""

from pathlib import Path
from typing import List, Union

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from core.scenario import parse_scenario  # noqa: E402
from harness.aggregate import aggregate, collect_metrics  # noqa: E402
from utils.logger import get_logger  # noqa: E402

logger = get_logger()

AGENT_COLUMNS = (('reward_alloc', 'Agent 1 (allocation)'), ('reward_resol', 'Agent 2 (resolution)'))
CONGESTION_METRICS = (
    ('eval_total_delay_s', 'Total uplink delay (s)'),
    ('eval_mean_map', 'Mean mAP'),
    ('eval_idle_count', 'Idle count'),
)


def load_evaluations(out_root: Union[str, Path], scenario: str) -> pd.DataFrame:
    """All evaluations.csv rows of one scenario with an ``algorithm`` column"""
    frames = []
    for path in sorted(Path(out_root).glob(f'{scenario}/*/*/evaluations.csv')):
        frame = pd.read_csv(path, dtype={'scenario': str})
        frame['algorithm'] = path.parent.parent.name
        frames.append(frame)
    if not frames:
        return pd.DataFrame()
    return pd.concat(frames, ignore_index=True)


def plot_reward_curves(out_root: Union[str, Path], scenario: str, dest: Union[str, Path]) -> Path:
    """Two panels, one per agent, one line per algorithm"""
    evaluations = load_evaluations(out_root, scenario)
    if evaluations.empty:
        raise FileNotFoundError(f"No evaluations.csv for scenario {scenario} under {out_root}")

    fig, axes = plt.subplots(1, 2, figsize=(10.4, 3.8), sharex=True)
    for ax, (column, title) in zip(axes, AGENT_COLUMNS):
        for algorithm, frame in evaluations.groupby('algorithm'):
            stats = frame.groupby('step')[column].agg(['median', 'min', 'max'])
            ax.plot(stats.index, stats['median'], label=algorithm)
            ax.fill_between(stats.index, stats['min'], stats['max'], alpha=0.2)
        ax.set_title(title)
        ax.set_xlabel('Training step')
        ax.set_ylabel('Mean reward per iteration')
        ax.grid(True, alpha=0.3)
    axes[0].legend()
    fig.suptitle(f'Scenario {scenario}')
    fig.tight_layout()

    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def plot_congestion(out_root: Union[str, Path], dest: Union[str, Path]) -> Path:
    """Evaluation metrics against N, median with min/max error bars"""
    summary = aggregate(collect_metrics(out_root))
    summary = summary[summary['status'] == 'ok'].copy()
    if summary.empty:
        raise FileNotFoundError(f"No metrics to plot under {out_root}")
    summary['n_iov'] = [parse_scenario(s)[1] for s in summary['scenario']]

    fig, axes = plt.subplots(1, len(CONGESTION_METRICS), figsize=(14, 3.8))
    for ax, (metric, label) in zip(axes, CONGESTION_METRICS):
        rows = summary[summary['metric'] == metric]
        for algorithm, frame in rows.groupby('algorithm'):
            frame = frame.sort_values('n_iov')
            median = frame['median'].astype(float)
            errors = [median - frame['min'].astype(float), frame['max'].astype(float) - median]
            ax.errorbar(frame['n_iov'], median, yerr=errors, marker='o', capsize=3, label=algorithm)
        ax.set_xlabel('Number of IoVs')
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[0].legend()
    fig.tight_layout()

    dest = Path(dest)
    dest.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(dest, dpi=150)
    plt.close(fig)
    return dest


def plot_all(out_root: Union[str, Path]) -> List[Path]:
    """Every figure a sweep directory supports, written under ``<out_root>/plots``"""
    out_root = Path(out_root)
    plot_dir = out_root / 'plots'
    written = []
    scenarios = sorted(p.name for p in out_root.iterdir() if p.is_dir() and p.name.isdigit())
    for scenario in scenarios:
        try:
            written.append(plot_reward_curves(out_root, scenario,
                                              plot_dir / f'reward_curves_{scenario}.png'))
        except FileNotFoundError as e:
            logger.warning(str(e))
    written.append(plot_congestion(out_root, plot_dir / 'congestion.png'))
    logger.info(f"Wrote {len(written)} figure(s) to {plot_dir}")
    return written
