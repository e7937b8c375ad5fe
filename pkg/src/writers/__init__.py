"""
结果与检查点写入器

此包负责训练/评估结果 CSV、训练检查点以及 mAP 曲线以外的所有落盘格式。
"""

from .structures import (
    TrainLogRow,
    EpisodeRow,
    EvaluationRow,
    MetricsRow,
)
from .writer import RunWriter, write_csv
from .checkpoint import save_params, load_params, write_manifest, read_manifest

__all__ = [
    'TrainLogRow',
    'EpisodeRow',
    'EvaluationRow',
    'MetricsRow',
    'RunWriter',
    'write_csv',
    'save_params',
    'load_params',
    'write_manifest',
    'read_manifest',
]
