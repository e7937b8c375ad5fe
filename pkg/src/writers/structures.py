"""
结果文件行结构定义

每个数据类对应一种 CSV 文件的一行, HEADER 给出列顺序。
浮点数一律按 repr 精度写出, 缺失值写为空字符串。
"""

from dataclasses import dataclass, fields
from typing import List, Optional, Tuple


def _cell(value) -> str:
    """单元格格式化"""
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return repr(value)
    return str(value)


class _Row:
    """按字段顺序输出 CSV 行"""

    @classmethod
    def header(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def to_row(self) -> List[str]:
        return [_cell(getattr(self, f.name)) for f in fields(self)]


@dataclass
class TrainLogRow(_Row):
    """
    训练日志 (train.csv)

    每次策略更新一行, 奖励为该轨迹段内的逐步平均值。
    """
    step: int                    # 已采样的环境步数
    reward_alloc: float          # Agent1 段平均奖励
    reward_resol: float          # Agent2 段平均奖励
    actor1_loss: float           # 分配 Actor 损失 (负的目标函数)
    actor2_loss: float           # 分辨率 Actor 损失
    critic_loss: float           # Critic 平方误差
    mean_ratio1: float           # 分配策略概率比均值
    mean_ratio2: float           # 分辨率策略概率比均值


@dataclass
class EpisodeRow(_Row):
    """
    单回合指标 (episodes.csv)

    奖励列为回合内逐步平均值。
    """
    seed: int
    scenario: str
    episode: int
    total_delay_s: float         # 回合内全部 IoV 上行时延之和
    mean_map: float              # 已传输帧的平均 mAP
    idle_count: int              # 空闲 (IoV, 迭代) 对数量
    reward_alloc: float
    reward_resol: float


@dataclass
class EvaluationRow(_Row):
    """周期性评估 (evaluations.csv), 在回合指标前加上训练步数"""
    step: int
    seed: int
    scenario: str
    episode: int
    total_delay_s: float
    mean_map: float
    idle_count: int
    reward_alloc: float
    reward_resol: float


@dataclass
class MetricsRow(_Row):
    """
    单次运行汇总 (metrics.csv)

    final_train_* 为最后 10% 训练回合的均值, final_eval_* 为最后 10% 评估的均值;
    eval_* 取自最后一次评估。random 算法没有训练列。
    """
    scenario: str
    algorithm: str
    seed: int
    final_train_reward_alloc: Optional[float]
    final_train_reward_resol: Optional[float]
    final_eval_reward_alloc: Optional[float]
    final_eval_reward_resol: Optional[float]
    eval_total_delay_s: Optional[float]
    eval_mean_map: Optional[float]
    eval_idle_count: Optional[int]


METRIC_COLUMNS = (
    'final_train_reward_alloc',
    'final_train_reward_resol',
    'final_eval_reward_alloc',
    'final_eval_reward_resol',
    'eval_total_delay_s',
    'eval_mean_map',
    'eval_idle_count',
)
