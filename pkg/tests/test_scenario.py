"""
测试场景名称与列表解析
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from core.range_parser import RangeParser, parse_int_list
from core.scenario import (
    CONGESTION_SCENARIOS, ScenarioError, format_scenario, parse_scenario,
    parse_scenario_list, scenario_config
)


class TestScenarioNames:
    """测试场景名称"""

    @pytest.mark.parametrize('name', CONGESTION_SCENARIOS)
    def test_round_trip(self, name):
        m, n = parse_scenario(name)
        assert m == 3
        assert format_scenario(m, n) == name

    @pytest.mark.parametrize('name', ['99', '30', '3', '337', 'ab', ''])
    def test_unknown(self, name):
        with pytest.raises(ScenarioError, match="unknown scenario"):
            parse_scenario(name)

    def test_config_from_name(self):
        cfg = scenario_config('36', fading_enabled=True, n_iov=2)
        assert (cfg.n_mmbs, cfg.n_iov) == (3, 6)
        assert cfg.fading_enabled
        assert cfg.obs_dim == 24

    def test_list(self):
        assert parse_scenario_list('33-37') == list(CONGESTION_SCENARIOS)
        assert parse_scenario_list('35, 33') == ['35', '33']
        with pytest.raises(ScenarioError):
            parse_scenario_list('33,48')
        with pytest.raises(ScenarioError):
            parse_scenario_list('37-33')


class TestRangeParser:
    """测试整数列表解析"""

    def test_single(self):
        assert RangeParser.parse_range('7') == [(7, 7)]

    def test_mixed(self):
        assert RangeParser.parse_range('0-2,5') == [(0, 2), (5, 5)]
        assert parse_int_list('0-2,5') == [0, 1, 2, 5]

    def test_duplicates_dropped(self):
        assert parse_int_list('1-3,2,0') == [1, 2, 3, 0]

    @pytest.mark.parametrize('text', ['', ',', '5-2', 'x', '1--3', '-1'])
    def test_invalid(self, text):
        with pytest.raises(ValueError):
            parse_int_list(text)

    def test_parse_value(self):
        assert RangeParser.parse_value(' 42 ') == 42
        with pytest.raises(ValueError):
            RangeParser.parse_value('4.2')
