"""
网络参数检查点

参数文件格式:
    第一行为文本头, 例如
        iovuplink-params kind=mlp layer_sizes=10,64,64,8 seed=0 count=5256
    之后紧跟 count 个小端 float64。

清单文件 (manifest.txt) 为 key=value 文本, 记录算法、步数和超参数。
"""

from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from utils.logger import get_logger

logger = get_logger()

MAGIC = 'iovuplink-params'


class CheckpointError(ValueError):
    """检查点文件损坏或与网络结构不符"""


def save_params(path: Union[str, Path], params: np.ndarray,
                layer_sizes: Optional[Sequence[int]] = None, seed: int = 0) -> None:
    """
    写出参数向量

    Args:
        path: 目标文件
        params: 一维参数向量
        layer_sizes: MLP 层宽; None 表示普通向量 (如 log_std)
        seed: 初始化种子, 仅作记录
    """
    params = np.asarray(params, dtype='<f8')
    if params.ndim != 1:
        raise CheckpointError(f"参数必须为一维向量, 实际形状 {params.shape}")

    kind = 'mlp' if layer_sizes is not None else 'vector'
    sizes = ','.join(str(int(s)) for s in layer_sizes) if layer_sizes is not None else str(params.size)
    header = f"{MAGIC} kind={kind} layer_sizes={sizes} seed={seed} count={params.size}\n"

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(header.encode('ascii'))
        f.write(params.tobytes())
    logger.debug(f"保存参数 {path} ({params.size} 个)")


def load_params(path: Union[str, Path]) -> Tuple[np.ndarray, Dict[str, str]]:
    """
    读取参数向量

    Returns:
        (参数向量, 文件头字段)

    Raises:
        CheckpointError: 文件头缺失或长度不符
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"检查点不存在: {path}")

    raw = path.read_bytes()
    newline = raw.find(b'\n')
    if newline < 0:
        raise CheckpointError(f"缺少文件头: {path}")
    tokens = raw[:newline].decode('ascii', errors='replace').split()
    if not tokens or tokens[0] != MAGIC:
        raise CheckpointError(f"不是参数文件: {path}")

    header = dict(token.split('=', 1) for token in tokens[1:] if '=' in token)
    params = np.frombuffer(raw[newline + 1:], dtype='<f8').astype(np.float64)
    expected = int(header.get('count', -1))
    if params.size != expected:
        raise CheckpointError(f"{path}: 期望 {expected} 个参数, 实际 {params.size}")
    return params, header


def header_layer_sizes(header: Dict[str, str]) -> Tuple[int, ...]:
    return tuple(int(s) for s in header['layer_sizes'].split(','))


def write_manifest(path: Union[str, Path], entries: Dict[str, object], extra_text: str = '') -> None:
    """写出 key=value 清单, extra_text 直接附加在末尾 (如超参数)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{key}={value}" for key, value in entries.items()]
    path.write_text('\n'.join(lines) + '\n' + extra_text, encoding='utf-8')


def read_manifest(path: Union[str, Path]) -> Dict[str, str]:
    """读取清单, 忽略注释行"""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"清单不存在: {path}")
    entries = {}
    for line in path.read_text(encoding='utf-8').splitlines():
        line = line.split('#', 1)[0].strip()
        if '=' in line:
            key, value = line.split('=', 1)
            key = key.strip()
            if key in entries:
                raise CheckpointError(f"清单键重复: {path}: {key}")
            entries[key] = value.strip()
    return entries
