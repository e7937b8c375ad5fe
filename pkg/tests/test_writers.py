"""
测试结果文件与检查点写入
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from writers import (
    EpisodeRow, EvaluationRow, MetricsRow, RunWriter, TrainLogRow, load_params,
    read_manifest, save_params, write_csv, write_manifest
)
from writers.checkpoint import CheckpointError, header_layer_sizes
from writers.writer import run_dir


class TestRows:
    """测试行格式"""

    def test_headers(self):
        assert TrainLogRow.header() == (
            'step', 'reward_alloc', 'reward_resol', 'actor1_loss', 'actor2_loss',
            'critic_loss', 'mean_ratio1', 'mean_ratio2',
        )
        assert EvaluationRow.header()[0] == 'step'
        assert EvaluationRow.header()[1:] == EpisodeRow.header()

    def test_cells(self):
        row = MetricsRow(scenario='33', algorithm='random', seed=0,
                         final_train_reward_alloc=None, final_train_reward_resol=None,
                         final_eval_reward_alloc=0.1 + 0.2, final_eval_reward_resol=-1.0,
                         eval_total_delay_s=2.5, eval_mean_map=0.0, eval_idle_count=4)
        cells = row.to_row()
        assert cells[:5] == ['33', 'random', '0', '', '']
        assert cells[5] == '0.30000000000000004'
        assert cells[-1] == '4'


class TestRunWriter:
    """测试运行目录"""

    def test_layout(self, tmp_path):
        directory = run_dir(tmp_path, '35', 'ippo', 3)
        assert directory == tmp_path / '35' / 'ippo' / '3'
        with RunWriter(directory) as writer:
            writer.episode(EpisodeRow(3, '35', 0, 1.5, 40.0, 2, -10.0, 5.0))
            # rows reach the disk before close
            text = (directory / 'episodes.csv').read_text(encoding='utf-8')
            assert text.splitlines()[1] == '3,35,0,1.5,40.0,2,-10.0,5.0'
        assert (directory / 'train.csv').read_text(encoding='utf-8') == ','.join(TrainLogRow.header()) + '\n'
        assert writer.checkpoint_dir == directory / 'checkpoints'

    def test_write_csv_line_endings(self, tmp_path):
        path = tmp_path / 'a' / 'table.csv'
        write_csv(path, ['x', 'y'], [['1', '2']])
        assert path.read_bytes() == b'x,y\n1,2\n'


class TestCheckpointFiles:
    """测试参数文件"""

    def test_round_trip(self, tmp_path):
        params = np.random.default_rng(0).normal(size=37)
        path = tmp_path / 'net.params'
        save_params(path, params, layer_sizes=[4, 5, 2], seed=11)
        loaded, header = load_params(path)
        np.testing.assert_array_equal(loaded, params)
        assert header_layer_sizes(header) == (4, 5, 2)
        assert header['seed'] == '11'
        assert path.read_bytes().startswith(b'iovuplink-params kind=mlp layer_sizes=4,5,2')

    def test_truncated(self, tmp_path):
        path = tmp_path / 'net.params'
        save_params(path, np.ones(4))
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(CheckpointError):
            load_params(path)

    def test_not_a_checkpoint(self, tmp_path):
        path = tmp_path / 'junk.params'
        path.write_bytes(b'hello\n\x00\x00')
        with pytest.raises(CheckpointError):
            load_params(path)
        with pytest.raises(CheckpointError):
            load_params(tmp_path / 'missing.params')

    def test_manifest(self, tmp_path):
        path = tmp_path / 'manifest.txt'
        write_manifest(path, {'algorithm': 'happo', 'step': 40}, "# HyperParams\ngamma=0.99\n")
        assert read_manifest(path) == {'algorithm': 'happo', 'step': '40', 'gamma': '0.99'}

    def test_manifest_duplicate_key(self, tmp_path):
        path = tmp_path / 'manifest.txt'
        write_manifest(path, {'run_seed': 7}, "seed=0\nseed=1\n")
        with pytest.raises(CheckpointError):
            read_manifest(path)
