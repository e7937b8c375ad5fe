"""
测试跨种子汇总
"""

import sys
from pathlib import Path

import pandas as pd
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from harness.aggregate import SUMMARY_COLUMNS, aggregate, aggregate_dir, collect_metrics, format_summary
from writers import MetricsRow, RunWriter
from writers.writer import run_dir


def metrics_row(scenario, algorithm, seed, value, train=True):
    return MetricsRow(
        scenario=scenario, algorithm=algorithm, seed=seed,
        final_train_reward_alloc=value if train else None,
        final_train_reward_resol=value if train else None,
        final_eval_reward_alloc=value, final_eval_reward_resol=value,
        eval_total_delay_s=value, eval_mean_map=value, eval_idle_count=int(value),
    )


def frame(rows):
    return pd.DataFrame([dict(zip(MetricsRow.header(), (getattr(r, k) for k in MetricsRow.header())))
                         for r in rows])


def cell(summary, scenario, algorithm, metric):
    hit = summary[(summary['scenario'] == scenario) & (summary['algorithm'] == algorithm)
                  & (summary['metric'] == metric)]
    assert len(hit) == 1
    return hit.iloc[0]


class TestAggregate:
    """测试统计量"""

    def test_single_seed(self):
        summary = aggregate(frame([metrics_row('33', 'happo', 0, 4.0)]))
        row = cell(summary, '33', 'happo', 'eval_mean_map')
        assert (row['median'], row['min'], row['max'], row['n_seeds']) == (4.0, 4.0, 4.0, 1)
        assert list(summary.columns) == SUMMARY_COLUMNS

    def test_median_of_three(self):
        rows = [metrics_row('33', 'happo', s, v) for s, v in enumerate([1.0, 9.0, 2.0])]
        row = cell(aggregate(frame(rows)), '33', 'happo', 'final_eval_reward_alloc')
        assert (row['median'], row['min'], row['max']) == (2.0, 1.0, 9.0)

    def test_scenarios_not_pooled(self):
        rows = [metrics_row('33', 'ippo', 0, 1.0), metrics_row('37', 'ippo', 0, 100.0)]
        summary = aggregate(frame(rows))
        assert cell(summary, '33', 'ippo', 'eval_total_delay_s')['max'] == 1.0
        assert cell(summary, '37', 'ippo', 'eval_total_delay_s')['min'] == 100.0

    def test_missing_cell(self):
        summary = aggregate(frame([metrics_row('33', 'happo', 0, 1.0)]),
                            scenarios=['33', '34'], algorithms=['happo'])
        row = cell(summary, '34', 'happo', 'eval_mean_map')
        assert row['status'] == 'missing'
        assert row['n_seeds'] == 0
        assert pd.isna(row['median'])
        assert '-' in format_summary(summary)

    def test_random_has_no_training_columns(self):
        summary = aggregate(frame([metrics_row('33', 'random', 0, 3.0, train=False)]))
        assert cell(summary, '33', 'random', 'final_train_reward_alloc')['status'] == 'missing'
        assert cell(summary, '33', 'random', 'final_eval_reward_alloc')['status'] == 'ok'


class TestAggregateDir:
    """测试目录扫描与写出"""

    def test_from_run_dirs(self, tmp_path):
        for seed, value in enumerate([5.0, 7.0]):
            with RunWriter(run_dir(tmp_path, '33', 'haa2c', seed)) as writer:
                writer.metrics(metrics_row('33', 'haa2c', seed, value))
        metrics = collect_metrics(tmp_path)
        assert metrics['scenario'].tolist() == ['33', '33']

        summary = aggregate_dir(tmp_path)
        assert cell(summary, '33', 'haa2c', 'eval_mean_map')['median'] == pytest.approx(6.0)
        assert (tmp_path / 'summary.csv').exists()
        assert 'haa2c' in (tmp_path / 'summary.txt').read_text(encoding='utf-8')

    def test_empty_dir(self, tmp_path):
        assert aggregate(collect_metrics(tmp_path)).empty
