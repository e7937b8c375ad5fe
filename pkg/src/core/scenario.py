"""
Scenario names

A two-digit name encodes the MMBS count then the IoV count: "37" is
M=3 MMBS serving N=7 IoVs. Only M=3 layouts are defined.
"""

from typing import List, Tuple

from core.range_parser import RangeParser
from utils.config import ScenarioConfig
from utils.logger import get_logger

logger = get_logger()

CONGESTION_SCENARIOS = ('33', '34', '35', '36', '37')
SUPPORTED_MMBS = 3


class ScenarioError(ValueError):
    """Unknown or malformed scenario name"""


def parse_scenario(name: str) -> Tuple[int, int]:
    """
    "37" -> (M=3, N=7)

    Raises:
        ScenarioError: Not two digits, M other than 3, or N = 0
    """
    name = str(name).strip()
    if len(name) != 2 or not name.isdigit():
        raise ScenarioError(f"unknown scenario '{name}': expected two digits such as 33")
    n_mmbs, n_iov = int(name[0]), int(name[1])
    if n_mmbs != SUPPORTED_MMBS or n_iov < 1:
        raise ScenarioError(
            f"unknown scenario '{name}': M must be {SUPPORTED_MMBS} and N between 1 and 9"
        )
    return n_mmbs, n_iov


def format_scenario(n_mmbs: int, n_iov: int) -> str:
    """(3, 7) -> "37" """
    name = f"{n_mmbs}{n_iov}"
    parse_scenario(name)
    return name


def scenario_config(name: str, **overrides) -> ScenarioConfig:
    """
    ScenarioConfig for a named scenario

    Keyword overrides replace defaults; n_iov/n_mmbs always come from the name.
    """
    n_mmbs, n_iov = parse_scenario(name)
    overrides = {k: v for k, v in overrides.items() if k not in ('n_iov', 'n_mmbs')}
    return ScenarioConfig(n_iov=n_iov, n_mmbs=n_mmbs, **overrides)


def parse_scenario_list(text: str) -> List[str]:
    """
    "33,35-37" -> ["33", "35", "36", "37"]

    Raises:
        ScenarioError: Any listed name is unknown
    """
    try:
        values = RangeParser.expand_ranges(RangeParser.parse_range(text))
    except ValueError as e:
        raise ScenarioError(f"unknown scenario list '{text}': {e}") from None
    names = [str(v) for v in values]
    for name in names:
        parse_scenario(name)
    return names
