"""
Per-cell statistics over seeds

Reads every ``<scenario>/<algo>/<seed>/metrics.csv`` under an output root
and reports median, min and max per (scenario, algorithm, metric). Cells
without data are listed as missing, never filled in.
"""

import math
from pathlib import Path
from typing import Iterable, List, Optional, Union

import pandas as pd

from utils.logger import get_logger
from writers.structures import METRIC_COLUMNS, MetricsRow

logger = get_logger()

SUMMARY_COLUMNS = ['scenario', 'algorithm', 'metric', 'n_seeds', 'median', 'min', 'max', 'status']


def collect_metrics(out_root: Union[str, Path]) -> pd.DataFrame:
    """
    Concatenate every run's metrics.csv

    Returns:
        One row per run, scenario kept as text ("33", not 33)
    """
    out_root = Path(out_root)
    files = sorted(out_root.glob('*/*/*/metrics.csv'))
    if not files:
        logger.warning(f"No metrics.csv found under {out_root}")
        return pd.DataFrame(columns=list(MetricsRow.header()))
    frames = [pd.read_csv(path, dtype={'scenario': str, 'algorithm': str}) for path in files]
    metrics = pd.concat(frames, ignore_index=True)
    logger.debug(f"Collected {len(metrics)} metrics rows from {out_root}")
    return metrics


def aggregate(metrics: pd.DataFrame, scenarios: Optional[Iterable[str]] = None,
              algorithms: Optional[Iterable[str]] = None) -> pd.DataFrame:
    """
    Median/min/max over seeds for each (scenario, algorithm, metric)

    Args:
        metrics: Rows shaped like MetricsRow
        scenarios: Cells to report; defaults to the scenarios present
        algorithms: Cells to report; defaults to the algorithms present

    Returns:
        Long table with SUMMARY_COLUMNS; status is 'ok' or 'missing'
    """
    metrics = metrics.copy()
    metrics['scenario'] = metrics['scenario'].astype(str)
    scenarios = list(scenarios) if scenarios is not None else sorted(metrics['scenario'].unique())
    algorithms = list(algorithms) if algorithms is not None else sorted(metrics['algorithm'].unique())
    grouped = {key: frame for key, frame in metrics.groupby(['scenario', 'algorithm'])}

    records = []
    for scenario in scenarios:
        for algorithm in algorithms:
            cell = grouped.get((scenario, algorithm))
            for metric in METRIC_COLUMNS:
                values = (pd.to_numeric(cell[metric], errors='coerce').dropna()
                          if cell is not None and metric in cell else pd.Series(dtype=float))
                if values.empty:
                    records.append({'scenario': scenario, 'algorithm': algorithm, 'metric': metric,
                                    'n_seeds': 0, 'median': math.nan, 'min': math.nan, 'max': math.nan,
                                    'status': 'missing'})
                    continue
                records.append({
                    'scenario': scenario, 'algorithm': algorithm, 'metric': metric,
                    'n_seeds': int(values.size),
                    'median': float(values.median()),
                    'min': float(values.min()),
                    'max': float(values.max()),
                    'status': 'ok',
                })
            if cell is None:
                logger.warning(f"No runs for scenario {scenario} / {algorithm}")

    return pd.DataFrame.from_records(records, columns=SUMMARY_COLUMNS)


def format_summary(summary: pd.DataFrame) -> str:
    """Aligned plain-text table"""
    if summary.empty:
        return '(no runs)\n'
    return summary.to_string(index=False, na_rep='-') + '\n'


def write_summary(out_root: Union[str, Path], summary: pd.DataFrame) -> List[Path]:
    """Write summary.csv and summary.txt at the output root"""
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    csv_path = out_root / 'summary.csv'
    txt_path = out_root / 'summary.txt'
    summary.to_csv(csv_path, index=False, lineterminator='\n')
    txt_path.write_text(format_summary(summary), encoding='utf-8')
    logger.info(f"Summary written to {csv_path} and {txt_path}")
    return [csv_path, txt_path]


def aggregate_dir(out_root: Union[str, Path], scenarios: Optional[Iterable[str]] = None,
                  algorithms: Optional[Iterable[str]] = None) -> pd.DataFrame:
    """collect + aggregate + write for one output root"""
    summary = aggregate(collect_metrics(out_root), scenarios, algorithms)
    write_summary(out_root, summary)
    return summary
