"""
测试上行无线公式
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from core.wireless import (
    IDLE, UnreachableLinkError, channel_gain, data_size, gain_matrix, latency,
    rate, rate_all, sinr, sinr_all
)
from utils.config import ScenarioConfig


class TestDataSize:
    """测试帧数据量 ξ·p²"""

    @pytest.mark.parametrize('p, expected', [(0, 0), (100, 240_000), (416, 4_153_344)])
    def test_examples(self, p, expected):
        assert data_size(p, 24) == expected


class TestChannelGain:
    """测试路径损耗增益"""

    def test_reference_distance(self):
        cfg = ScenarioConfig()
        assert channel_gain((0, 0), (1, 0), cfg) == pytest.approx(1e-3, rel=1e-12)

    def test_ten_meters(self):
        cfg = ScenarioConfig()
        assert channel_gain((0, 0), (6, 8), cfg) == pytest.approx(1e-6, rel=1e-12)

    def test_distance_floor(self):
        """0.5 m 按 1 m 计算"""
        cfg = ScenarioConfig()
        assert channel_gain((0, 0), (0.5, 0), cfg) == pytest.approx(1e-3, rel=1e-12)

    def test_matrix_matches_scalar(self):
        cfg = ScenarioConfig(n_iov=2)
        positions = np.array([[100.0, 200.0], [900.0, 600.0]])
        gains = gain_matrix(positions, cfg)
        for i in range(2):
            for v in range(3):
                assert gains[i, v] == pytest.approx(
                    channel_gain(positions[i], cfg.mmbs_positions[v], cfg), rel=1e-12)

    def test_fading_needs_rng(self):
        cfg = ScenarioConfig(fading_enabled=True)
        with pytest.raises(ValueError):
            gain_matrix(np.zeros((3, 2)), cfg)

    def test_fading_is_seeded(self):
        cfg = ScenarioConfig(fading_enabled=True)
        positions = np.full((3, 2), 400.0)
        a = gain_matrix(positions, cfg, np.random.default_rng(3))
        b = gain_matrix(positions, cfg, np.random.default_rng(3))
        np.testing.assert_array_equal(a, b)
        plain = ScenarioConfig(fading_enabled=False)
        assert not np.allclose(a, gain_matrix(positions, plain))


class TestSinr:
    """测试小区内干扰 SINR"""

    def _cfg(self, noise):
        return ScenarioConfig(n_iov=2, noise_mode='total', noise_psd=noise)

    def test_single_iov(self):
        cfg = ScenarioConfig(n_iov=1, noise_mode='total', noise_psd=1e-6)
        gains = np.array([[1e-6, 1e-9, 1e-9]])
        assert sinr(0, [0], gains, [1.0], cfg) == pytest.approx(1.0)

    def test_same_cell_interferes(self):
        cfg = self._cfg(1e-10)
        gains = np.array([[2e-10, 1e-12, 1e-12], [1e-10, 1e-12, 1e-12]])
        assert sinr(0, [0, 0], gains, [1.0, 1.0], cfg) == pytest.approx(1.0)

    def test_other_cell_does_not_interfere(self):
        cfg = self._cfg(1e-10)
        gains = np.array([[2e-10, 1e-12, 1e-12], [1e-12, 1e-10, 1e-12]])
        assert sinr(0, [0, 1], gains, [1.0, 1.0], cfg) == pytest.approx(2.0)

    def test_idle_query_rejected(self):
        cfg = self._cfg(1e-10)
        with pytest.raises(ValueError):
            sinr(0, [IDLE, 0], np.ones((2, 3)), [1.0, 1.0], cfg)

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(0)
        cfg = ScenarioConfig(n_iov=5)
        gains = rng.uniform(1e-9, 1e-6, size=(5, 3))
        powers = rng.uniform(1.5, 2.0, size=5)
        alloc = np.array([0, 0, 2, IDLE, 2])
        vec = sinr_all(alloc, gains, powers, cfg.noise_power_w)
        assert np.isnan(vec[3])
        for i in (0, 1, 2, 4):
            assert vec[i] == pytest.approx(sinr(i, alloc, gains, powers, cfg), rel=1e-12)

    def test_adding_iov_never_raises_sinr(self):
        """同一 MMBS 增加 IoV 不会提高已有 IoV 的 SINR"""
        rng = np.random.default_rng(1)
        gains = rng.uniform(1e-9, 1e-6, size=(3, 3))
        powers = rng.uniform(1.5, 2.0, size=3)
        before = sinr_all(np.array([1, 1, IDLE]), gains, powers, 1e-6)
        after = sinr_all(np.array([1, 1, 1]), gains, powers, 1e-6)
        assert np.all(after[:2] <= before[:2])


class TestRateAndLatency:
    """测试香农速率与时延"""

    @pytest.mark.parametrize('gamma, expected', [(0.0, 0.0), (1.0, 1e7), (3.0, 2e7)])
    def test_rate(self, gamma, expected):
        assert rate(gamma, 1e7) == pytest.approx(expected, rel=1e-12, abs=0.0)

    def test_rate_all(self):
        np.testing.assert_allclose(rate_all(np.array([1.0, 3.0]), 1e7), [1e7, 2e7], rtol=1e-12)

    def test_negative_sinr(self):
        with pytest.raises(ValueError):
            rate(-0.1, 1e7)

    def test_latency_examples(self):
        assert latency(0, 0) == 0.0
        assert latency(2.4e6, 1e7) == pytest.approx(0.24)
        assert latency(4_153_344, 2e7) == pytest.approx(0.2076672)

    def test_unreachable_link(self):
        with pytest.raises(UnreachableLinkError):
            latency(1000, 0.0)
