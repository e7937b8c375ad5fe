"""
Configuration management module for IoVUplink
Handles scenario parameters, learning hyper-parameters and key=value config files
"""

import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union, get_args, get_origin
from dataclasses import dataclass, asdict, field, fields

import numpy as np

from utils.logger import get_logger

logger = get_logger()


class ConfigError(ValueError):
    """Invalid configuration value or malformed config file"""


# map-relative MMBS sites used when M == 3
DEFAULT_MMBS_LAYOUT = ((0.25, 0.25), (0.75, 0.25), (0.5, 0.75))

NOISE_MODES = ('psd', 'total')


@dataclass
class ScenarioConfig:
    """Physical and episode parameters of one IoV-MMBS uplink world"""
    n_iov: int = 3
    n_mmbs: int = 3
    bandwidth_hz: float = 10e6
    noise_psd: float = 1e-13            # W/Hz in psd mode, W in total mode
    noise_mode: str = 'psd'
    power_min: float = 1.5
    power_max: float = 2.0
    p_min: float = 64.0
    p_max: float = 416.0
    bits_per_pixel: float = 24.0
    map_side_m: float = 1000.0
    max_move_m: float = 100.0
    weight_q: float = 60.0
    weight_b: float = 50.0
    weight_f: float = 75.0
    episode_len: int = 100
    eval_episode_len: int = 1000
    path_loss_exponent: float = 3.0
    reference_gain: float = 1e-3
    fading_enabled: bool = False
    mmbs_positions: Optional[List[Tuple[float, float]]] = None
    seed: int = 0

    def __post_init__(self):
        """参数验证, 并补全 MMBS 位置"""
        if self.n_iov < 1 or self.n_mmbs < 1:
            raise ConfigError(f"Need at least one IoV and one MMBS, got N={self.n_iov}, M={self.n_mmbs}")
        if self.power_min > self.power_max:
            raise ConfigError(f"power_min {self.power_min} > power_max {self.power_max}")
        if not self.p_min < self.p_max:
            raise ConfigError(f"p_min {self.p_min} must be below p_max {self.p_max}")
        for name in ('weight_q', 'weight_b', 'weight_f', 'bandwidth_hz', 'bits_per_pixel',
                     'map_side_m', 'reference_gain'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.noise_psd < 0 or self.max_move_m < 0:
            raise ConfigError("noise_psd and max_move_m must be non-negative")
        if self.noise_mode not in NOISE_MODES:
            raise ConfigError(f"Invalid noise_mode: {self.noise_mode}. Must be one of {NOISE_MODES}")
        if self.episode_len < 1 or self.eval_episode_len < 1:
            raise ConfigError("episode lengths must be at least 1")

        if self.mmbs_positions is None:
            self.mmbs_positions = default_mmbs_positions(self.n_mmbs, self.map_side_m, self.seed)
        self.mmbs_positions = [(float(x), float(y)) for x, y in self.mmbs_positions]
        if len(self.mmbs_positions) != self.n_mmbs:
            raise ConfigError(
                f"mmbs_positions has {len(self.mmbs_positions)} entries, expected {self.n_mmbs}"
            )
        for x, y in self.mmbs_positions:
            if not (0.0 <= x <= self.map_side_m and 0.0 <= y <= self.map_side_m):
                raise ConfigError(f"MMBS position ({x}, {y}) lies outside the map")

    @property
    def noise_power_w(self) -> float:
        """Noise term of the SINR denominator (B·σ² in psd mode)"""
        if self.noise_mode == 'psd':
            return self.bandwidth_hz * self.noise_psd
        return self.noise_psd

    @property
    def max_data_bits(self) -> float:
        """ξ·p_max², the size of a full-resolution frame"""
        return self.bits_per_pixel * self.p_max ** 2

    @property
    def obs_dim(self) -> int:
        return self.n_iov * self.n_mmbs + self.n_iov

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ScenarioConfig':
        """Create from dictionary"""
        return cls(**data)


@dataclass
class HyperParams:
    """Learning hyper-parameters shared by all trainers"""
    gamma: float = 0.99
    lam: float = 0.95
    clip_eps: float = 0.2
    epochs: int = 10
    batch_size: int = 250
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    target_refresh: int = 5
    segment_len: int = 1000
    total_steps: int = 50_000
    eval_every: int = 5_000
    ratio_min_clip: bool = False
    entropy_coef: float = 0.0
    normalize_advantages: bool = True
    init_log_std: float = 0.0
    hidden_sizes: Tuple[int, ...] = (64, 64)

    def __post_init__(self):
        """参数验证"""
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lam must lie in [0, 1], got {self.lam}")
        if not self.clip_eps > 0:
            raise ConfigError(f"clip_eps must be positive, got {self.clip_eps}")
        if self.epochs < 1 or self.target_refresh < 1:
            raise ConfigError("epochs and target_refresh must be at least 1")
        if self.batch_size < 1 or self.segment_len % self.batch_size != 0:
            raise ConfigError(
                f"batch_size {self.batch_size} must divide segment_len {self.segment_len}"
            )
        if self.actor_lr <= 0 or self.critic_lr <= 0:
            raise ConfigError("learning rates must be positive")
        if self.total_steps < 0 or self.eval_every < 1:
            raise ConfigError("total_steps must be >= 0 and eval_every >= 1")
        self.hidden_sizes = tuple(int(h) for h in self.hidden_sizes)
        if any(h < 1 for h in self.hidden_sizes):
            raise ConfigError(f"hidden layer widths must be positive: {self.hidden_sizes}")

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'HyperParams':
        """Create from dictionary"""
        return cls(**data)


def default_mmbs_positions(n_mmbs: int, map_side_m: float, seed: int) -> List[Tuple[float, float]]:
    """Fixed triangle layout for M=3, seeded uniform placement otherwise"""
    if n_mmbs == len(DEFAULT_MMBS_LAYOUT):
        return [(x * map_side_m, y * map_side_m) for x, y in DEFAULT_MMBS_LAYOUT]
    rng = np.random.default_rng([seed, 0x4D4D])
    sites = rng.uniform(0.0, map_side_m, size=(n_mmbs, 2))
    return [(float(x), float(y)) for x, y in sites]


# ---------------------------------------------------------------------------
# key=value files
# ---------------------------------------------------------------------------

_TRUE = {'1', 'true', 'yes', 'on'}
_FALSE = {'0', 'false', 'no', 'off'}


def parse_bool(text: str) -> bool:
    """Parse on/off style flags"""
    value = text.strip().lower()
    if value in _TRUE:
        return True
    if value in _FALSE:
        return False
    raise ConfigError(f"'{text}' is not a boolean (use on/off)")


def _coerce(name: str, annotation: Any, text: str) -> Any:
    """Convert a raw string to the declared field type"""
    origin = get_origin(annotation)
    if origin is Union:
        inner = [a for a in get_args(annotation) if a is not type(None)]
        if text.strip().lower() in ('', 'none'):
            return None
        return _coerce(name, inner[0], text)
    try:
        if annotation is bool:
            return parse_bool(text)
        if annotation is int:
            return int(text.strip().replace('_', ''))
        if annotation is float:
            value = float(text.strip())
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite")
            return value
        if annotation is str:
            return text.strip()
        if origin in (tuple, Tuple):
            return tuple(int(part) for part in text.split(',') if part.strip())
        if origin in (list, List):
            # x1:y1;x2:y2
            sites = []
            for part in text.split(';'):
                if not part.strip():
                    continue
                x, y = part.split(':')
                sites.append((float(x), float(y)))
            return sites
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"Bad value for {name}: '{text}' ({e})") from e
    raise ConfigError(f"Unsupported config field type for {name}: {annotation}")


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return 'on' if value else 'off'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ','.join(str(v) for v in value)
    if isinstance(value, list):
        return ';'.join(f"{x!r}:{y!r}" for x, y in value)
    if value is None:
        return 'none'
    return str(value)


def read_config_file(filepath: Union[str, Path]) -> Dict[str, str]:
    """
    Read a flat key=value file

    Args:
        filepath: Path to the config file

    Returns:
        Raw key -> string value mapping

    Raises:
        ConfigError: If the file is missing or a line is malformed
    """
    path = Path(filepath)
    if not path.exists():
        logger.error(f"Config file not found: {path}")
        raise ConfigError(f"Config file not found: {path}")

    raw: Dict[str, str] = {}
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, start=1):
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got '{line}'")
            key, value = line.split('=', 1)
            key = key.strip()
            if key in raw:
                logger.warning(f"{path}:{lineno}: duplicate key '{key}', last value wins")
            raw[key] = value.strip()

    logger.debug(f"Read {len(raw)} config keys from {path}")
    return raw


# Alternative spellings accepted in config files
KEY_ALIASES = {
    'eq13_literal': 'ratio_min_clip',
}


def split_config(raw: Dict[str, str]) -> Tuple[Dict[str, Any], Dict[str, Any]]:
    """
    Distribute raw keys between ScenarioConfig and HyperParams

    Returns:
        (scenario kwargs, hyper-parameter kwargs), values already typed
    """
    scenario_fields = {f.name: f.type for f in fields(ScenarioConfig)}
    hp_fields = {f.name: f.type for f in fields(HyperParams)}
    scenario_kwargs: Dict[str, Any] = {}
    hp_kwargs: Dict[str, Any] = {}

    for key, text in raw.items():
        key = KEY_ALIASES.get(key, key)
        if key in scenario_fields:
            scenario_kwargs[key] = _coerce(key, scenario_fields[key], text)
        elif key in hp_fields:
            hp_kwargs[key] = _coerce(key, hp_fields[key], text)
        else:
            raise ConfigError(f"Unknown config key: '{key}'")

    return scenario_kwargs, hp_kwargs


def dump_config(*configs: Union[ScenarioConfig, HyperParams]) -> str:
    """Render one or more configs as key=value text"""
    lines = []
    for cfg in configs:
        lines.append(f"# {type(cfg).__name__}")
        for f in fields(cfg):
            lines.append(f"{f.name}={_format(getattr(cfg, f.name))}")
    return '\n'.join(lines) + '\n'


def save_config(filepath: Union[str, Path], *configs: Union[ScenarioConfig, HyperParams]) -> None:
    """Write configs to a key=value file"""
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dump_config(*configs))
    logger.debug(f"Saved config to {path}")


def load_config(filepath: Union[str, Path]) -> Tuple[ScenarioConfig, HyperParams]:
    """
    Load a key=value file into both config dataclasses

    Missing keys keep their defaults.
    """
    scenario_kwargs, hp_kwargs = split_config(read_config_file(filepath))
    try:
        return ScenarioConfig(**scenario_kwargs), HyperParams(**hp_kwargs)
    except ConfigError as e:
        logger.error(f"Invalid config in {filepath}: {e}")
        raise
