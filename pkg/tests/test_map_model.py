"""
测试 mAP 曲线与拟合
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from core.map_model import (
    DEFAULT_CURVE, FitError, MapCurve, MapDomainError, fit_curve, load_curve,
    load_pairs_csv, map_score, map_scores, save_curve
)


class TestMapScore:
    """测试默认三次曲线"""

    def test_upper_bound(self):
        assert map_score(416) == pytest.approx(86.197632, abs=1e-3)

    def test_lower_bound_clamped(self):
        """64 ppi 处原始值为负, 截断为 0"""
        assert DEFAULT_CURVE.raw(64.0) == pytest.approx(-5.671552, abs=1e-3)
        assert map_score(64) == 0.0

    def test_outside_domain(self):
        with pytest.raises(MapDomainError):
            map_score(500)
        with pytest.raises(MapDomainError):
            map_score(float('nan'))

    def test_vectorized(self):
        p = np.array([64.0, 200.0, 416.0])
        np.testing.assert_allclose(map_scores(p), [map_score(v) for v in p])

    def test_clamp_top(self):
        curve = MapCurve(coeffs=(1.0, 0.0), domain=(0.0, 500.0))
        assert map_score(300, curve) == 100.0


class TestFitCurve:
    """测试最小二乘拟合"""

    def test_exact_cubic(self):
        """四个精确采样点可恢复系数"""
        coeffs = (2e-6, -1e-3, 0.5, 3.0)
        p = [70.0, 150.0, 300.0, 410.0]
        curve = fit_curve([(x, np.polyval(coeffs, x)) for x in p])
        np.testing.assert_allclose(curve.coeffs, coeffs, rtol=1e-8, atol=1e-8)

    def test_regenerates_reference_curve(self):
        p = [64.0, 150.0, 250.0, 350.0, 416.0]
        pairs = [(x, float(DEFAULT_CURVE.raw(x))) for x in p]
        curve = fit_curve(pairs)
        np.testing.assert_allclose(curve.coeffs, DEFAULT_CURVE.coeffs, rtol=1e-6, atol=1e-6)
        assert curve.domain == (64.0, 416.0)
        assert curve.fit_rms < 1e-8

    def test_residual_within_rms(self):
        rng = np.random.default_rng(0)
        p = np.linspace(64, 416, 12)
        y = DEFAULT_CURVE.raw(p) + rng.normal(0, 0.5, size=p.size)
        curve = fit_curve(zip(p, y))
        residual = np.sqrt(np.mean((curve.raw(p) - y) ** 2))
        assert residual <= curve.fit_rms + 1e-12

    def test_too_few_points(self):
        with pytest.raises(FitError):
            fit_curve([(64, 1.0), (100, 2.0), (200, 3.0)])

    def test_duplicates_do_not_count(self):
        with pytest.raises(FitError):
            fit_curve([(64, 1.0), (64, 1.1), (100, 2.0), (200, 3.0)])


class TestCurveFiles:
    """测试曲线与样本文件"""

    def test_save_load(self, tmp_path):
        curve = fit_curve([(x, float(DEFAULT_CURVE.raw(x))) for x in (64, 150, 250, 350, 416)])
        path = tmp_path / 'curve.txt'
        save_curve(path, curve)
        lines = [l for l in path.read_text().splitlines() if not l.startswith('#')]
        assert len(lines) == 4
        assert load_curve(path) == curve

    def test_load_pairs(self, tmp_path):
        path = tmp_path / 'pairs.csv'
        path.write_text("resolution_ppi,map\n64,1.5\n128,40.25\n", encoding='utf-8')
        assert load_pairs_csv(path) == [(64.0, 1.5), (128.0, 40.25)]

    def test_pairs_missing_column(self, tmp_path):
        path = tmp_path / 'pairs.csv'
        path.write_text("ppi,score\n64,1.5\n", encoding='utf-8')
        with pytest.raises(FitError):
            load_pairs_csv(path)

    def test_pairs_missing_file(self, tmp_path):
        with pytest.raises(FitError):
            load_pairs_csv(tmp_path / 'absent.csv')
