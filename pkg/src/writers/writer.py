"""
运行目录写入器

布局: out/<scenario>/<algo>/<seed>/{train.csv, episodes.csv, evaluations.csv,
metrics.csv, checkpoints/}。每个运行只写自己的目录, 并行任务之间互不干扰。
"""

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

from .structures import EpisodeRow, EvaluationRow, MetricsRow, TrainLogRow


def run_dir(out_root: Union[str, Path], scenario: str, algorithm: str, seed: int) -> Path:
    """单次运行的输出目录"""
    return Path(out_root) / scenario / algorithm / str(seed)


def write_csv(path: Union[str, Path], header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    """
    一次性写出完整 CSV

    使用 '\\n' 行尾, 保证同一输入在不同平台上字节一致。
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


class RunWriter:
    """
    单次运行的 CSV 写入器

    训练过程中逐行追加, 每行写入后立即 flush, 中途中断也能保留已有结果。
    """

    FILES = {
        'train': ('train.csv', TrainLogRow),
        'episodes': ('episodes.csv', EpisodeRow),
        'evaluations': ('evaluations.csv', EvaluationRow),
    }

    def __init__(self, directory: Union[str, Path]):
        """
        初始化写入器并写出表头

        Args:
            directory: 运行目录 (不存在时创建)
        """
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._files = {}
        self._writers: Dict[str, csv.writer] = {}
        for key, (name, row_type) in self.FILES.items():
            f = open(self.directory / name, 'w', encoding='utf-8', newline='')
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(row_type.header())
            self._files[key] = f
            self._writers[key] = writer

    @property
    def checkpoint_dir(self) -> Path:
        return self.directory / 'checkpoints'

    def _append(self, key: str, row) -> None:
        self._writers[key].writerow(row.to_row())
        self._files[key].flush()

    def train(self, row: TrainLogRow) -> None:
        self._append('train', row)

    def episode(self, row: EpisodeRow) -> None:
        self._append('episodes', row)

    def evaluation(self, row: EvaluationRow) -> None:
        self._append('evaluations', row)

    def metrics(self, row: MetricsRow) -> None:
        """写出运行汇总 (metrics.csv, 单行)"""
        write_csv(self.directory / 'metrics.csv', MetricsRow.header(), [row.to_row()])

    def close(self) -> None:
        for f in self._files.values():
            f.close()
        self._files = {}

    def __enter__(self) -> 'RunWriter':
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()
