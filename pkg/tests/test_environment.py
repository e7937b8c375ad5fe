"""
测试 IoV-MMBS 上行环境
"""

import itertools
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from core.environment import (
    JointAction, StepOutcome, UplinkEnv, WorldState, episode_objective, observe, reset, step
)
from core.map_model import MapCurve, map_score
from core.wireless import IDLE, latency, rate, sinr
from utils.config import ScenarioConfig


class PinnedRng:
    """Generator stand-in whose uniform draws sit at the lower bound"""

    def uniform(self, low, high, size=None):
        return np.full(size, float(low))


def _single_iov_state(cfg):
    return WorldState(
        iteration=0,
        iov_positions=np.array([[500.0, 500.0]]),
        gains=np.array([[1e-6, 1e-9, 1e-9]]),
        powers=np.array([1.0]),
        last_data_bits=np.zeros(1),
        cum_idle=np.zeros(1, dtype=np.int64),
    )


class TestStepRewards:
    """测试两个奖励信号"""

    def test_all_idle(self):
        cfg = ScenarioConfig()
        state = reset(cfg, np.random.default_rng(0))
        action = JointAction(alloc=[IDLE] * 3, resol=[200.0] * 3)
        nxt, out = step(state, action, cfg, np.random.default_rng(1))
        assert out.reward_alloc == -75.0
        assert out.reward_resol == 0.0
        np.testing.assert_array_equal(out.idle_flags, [1, 1, 1])
        np.testing.assert_array_equal(out.per_iov_latency, 0.0)
        np.testing.assert_array_equal(nxt.cum_idle, [1, 1, 1])
        np.testing.assert_array_equal(nxt.last_data_bits, 0.0)

    def test_single_transmission(self):
        """ℓ=0.24 s, mAP=50 的单 IoV 示例"""
        cfg = ScenarioConfig(n_iov=1, noise_mode='total', noise_psd=1e-6,
                             power_min=1.0, power_max=1.0, bandwidth_hz=1e6)
        curve = MapCurve(coeffs=(50.0,), domain=(64.0, 416.0))
        state = _single_iov_state(cfg)
        action = JointAction(alloc=[0], resol=[100.0])
        nxt, out = step(state, action, cfg, np.random.default_rng(0), curve)
        assert out.per_iov_latency[0] == pytest.approx(0.24)
        assert out.per_iov_map[0] == 50.0
        assert out.reward_alloc == pytest.approx(-14.4)
        assert out.reward_resol == pytest.approx(2485.6)
        assert nxt.last_data_bits[0] == 240_000
        assert nxt.iteration == 1

    def test_exhaustive_oracle(self):
        """N=2, M=2: 全部 9 种分配 × 5 点分辨率网格与逐项公式一致"""
        cfg = ScenarioConfig(n_iov=2, n_mmbs=2, seed=4)
        state = reset(cfg, np.random.default_rng(11))
        grid = np.linspace(cfg.p_min, cfg.p_max, 5)
        choices = [0, 1, IDLE]

        for alloc in itertools.product(choices, repeat=2):
            for resol in itertools.product(grid, repeat=2):
                _, out = step(state, JointAction(alloc=alloc, resol=resol), cfg,
                              np.random.default_rng(0))
                r_alloc = r_resol = 0.0
                for i in range(2):
                    if alloc[i] == IDLE:
                        r_alloc -= cfg.weight_f
                        continue
                    gamma = sinr(i, alloc, state.gains, state.powers, cfg)
                    ell = latency(cfg.bits_per_pixel * resol[i] ** 2, rate(gamma, cfg.bandwidth_hz))
                    r_alloc -= cfg.weight_q * ell
                    r_resol -= cfg.weight_q * ell - cfg.weight_b * map_score(resol[i])
                assert out.reward_alloc == pytest.approx(r_alloc / 2, rel=1e-9)
                assert out.reward_resol == pytest.approx(r_resol / 2, rel=1e-9, abs=1e-12)

    def test_higher_resolution_never_faster(self):
        cfg = ScenarioConfig()
        state = reset(cfg, np.random.default_rng(2))
        alloc = [0, 1, 2]
        lat = []
        for p in (64.0, 128.0, 256.0, 416.0):
            _, out = step(state, JointAction(alloc=alloc, resol=[p, 200.0, 200.0]), cfg,
                          np.random.default_rng(0))
            lat.append(out.per_iov_latency[0])
        assert all(a <= b for a, b in zip(lat, lat[1:]))

    def test_illegal_actions(self):
        cfg = ScenarioConfig()
        state = reset(cfg, np.random.default_rng(0))
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            step(state, JointAction(alloc=[0, 3, 1], resol=[100.0] * 3), cfg, rng)
        with pytest.raises(ValueError):
            step(state, JointAction(alloc=[0, 1, 2], resol=[100.0, 500.0, 100.0]), cfg, rng)
        with pytest.raises(ValueError):
            step(state, JointAction(alloc=[0, 1], resol=[100.0, 100.0]), cfg, rng)

    def test_idle_resolution_ignored(self):
        cfg = ScenarioConfig()
        outcomes = []
        for idle_resol in (100.0, 1000.0, math.nan):
            state = reset(cfg, np.random.default_rng(0))
            action = JointAction(alloc=[IDLE, 0, 1], resol=[idle_resol, 100.0, 200.0])
            _, outcome = step(state, action, cfg, np.random.default_rng(0))
            outcomes.append((outcome.reward_alloc, outcome.reward_resol))
        assert outcomes[0] == outcomes[1] == outcomes[2]

    def test_finished_episode(self):
        cfg = ScenarioConfig(episode_len=1)
        state = reset(cfg, np.random.default_rng(0))
        action = JointAction(alloc=[IDLE] * 3, resol=[100.0] * 3)
        state, _ = step(state, action, cfg, np.random.default_rng(0))
        with pytest.raises(ValueError):
            step(state, action, cfg, np.random.default_rng(0))


class TestMobilityAndState:
    """测试移动、观测与确定性"""

    def test_clip_at_corner(self):
        cfg = ScenarioConfig(n_iov=1, noise_mode='total', noise_psd=1e-6,
                             power_min=1.0, power_max=1.0)
        state = _single_iov_state(cfg)
        state.iov_positions = np.array([[0.0, 0.0]])
        nxt, _ = step(state, JointAction(alloc=[IDLE], resol=[100.0]), cfg, PinnedRng())
        np.testing.assert_array_equal(nxt.iov_positions, [[0.0, 0.0]])

    def test_positions_stay_on_map(self):
        cfg = ScenarioConfig(max_move_m=400.0)
        rng = np.random.default_rng(5)
        state = reset(cfg, rng)
        action = JointAction(alloc=[IDLE] * 3, resol=[100.0] * 3)
        for _ in range(50):
            state, _ = step(state, action, cfg, rng)
            assert np.all((state.iov_positions >= 0) & (state.iov_positions <= cfg.map_side_m))
            assert np.all(state.gains > 0)

    def test_reset_ranges(self):
        cfg = ScenarioConfig(n_iov=7)
        state = reset(cfg, np.random.default_rng(9))
        assert state.iteration == 0
        assert np.all((state.powers >= 1.5) & (state.powers <= 2.0))
        np.testing.assert_array_equal(state.last_data_bits, 0.0)

    def test_observation_layout(self):
        cfg = ScenarioConfig(n_iov=1, noise_mode='total', noise_psd=1e-6,
                             power_min=1.0, power_max=1.0)
        state = _single_iov_state(cfg)
        obs = observe(state, cfg)
        assert obs.shape == (cfg.obs_dim,)
        np.testing.assert_allclose(obs[:3], [-6.0, -9.0, -9.0])
        assert obs[3] == 0.0

        curve = MapCurve(coeffs=(50.0,), domain=(64.0, 416.0))
        _, out = step(state, JointAction(alloc=[0], resol=[cfg.p_max]), cfg, PinnedRng(), curve)
        assert out.observation[-1] == pytest.approx(1.0)

    def test_determinism(self):
        """相同种子与动作序列得到逐位相同的轨迹"""
        cfg = ScenarioConfig(n_iov=4, fading_enabled=True)

        def trajectory():
            rng = np.random.default_rng(123)
            state = reset(cfg, rng)
            states = [state]
            for t in range(20):
                alloc = [(t + i) % 4 - 1 for i in range(4)]
                state, _ = step(state, JointAction(alloc=alloc, resol=[100.0 + t] * 4), cfg, rng)
                states.append(state)
            return states

        for a, b in zip(trajectory(), trajectory()):
            np.testing.assert_array_equal(a.gains, b.gains)
            np.testing.assert_array_equal(a.iov_positions, b.iov_positions)
            np.testing.assert_array_equal(a.cum_idle, b.cum_idle)


class TestEpisodeObjective:
    """测试回合目标函数"""

    def _outcome(self, latency, maps, idle):
        n = len(latency)
        return StepOutcome(
            per_iov_latency=np.array(latency, dtype=float),
            per_iov_map=np.array(maps, dtype=float),
            idle_flags=np.array(idle),
            reward_alloc=0.0, reward_resol=0.0, observation=np.zeros(n),
        )

    def test_all_idle(self):
        cfg = ScenarioConfig()
        outcomes = [self._outcome([0, 0, 0], [0, 0, 0], [1, 1, 1]) for _ in range(2)]
        summary = episode_objective(outcomes, cfg)
        assert summary.objective == 450.0
        assert summary.mean_map == 0.0
        assert summary.transmitted == 0
        assert summary.idle_count == 6

    def test_single_step(self):
        cfg = ScenarioConfig(n_iov=1)
        summary = episode_objective([self._outcome([0.24], [50.0], [0])], cfg)
        assert summary.objective == pytest.approx(-2485.6)
        assert summary.total_delay_s == pytest.approx(0.24)
        assert summary.mean_map == 50.0

    def test_empty(self):
        with pytest.raises(ValueError):
            episode_objective([], ScenarioConfig())


class TestUplinkEnv:
    """测试 Gymnasium 包装"""

    def test_reset_and_truncation(self):
        cfg = ScenarioConfig(episode_len=3)
        env = UplinkEnv(cfg)
        obs, info = env.reset(seed=0)
        assert env.observation_space.shape == obs.shape
        assert info['state'].iteration == 0

        action = JointAction(alloc=[0, 1, 2], resol=[100.0] * 3)
        flags = []
        for _ in range(3):
            obs, reward, terminated, truncated, info = env.step(action)
            assert reward.shape == (2,)
            assert reward[0] == info['outcome'].reward_alloc
            assert not terminated
            flags.append(truncated)
        assert flags == [False, False, True]

    def test_dict_action(self):
        """action_space 采样得到的字典动作可直接执行"""
        cfg = ScenarioConfig()
        env = UplinkEnv(cfg)
        env.reset(seed=1)
        env.action_space.seed(1)
        sample = env.action_space.sample()
        _, _, _, _, info = env.step(sample)
        heads = np.asarray(sample['alloc'])
        np.testing.assert_array_equal(info['outcome'].idle_flags, (heads == cfg.n_mmbs).astype(int))

    def test_same_seed_same_world(self):
        cfg = ScenarioConfig()
        a, _ = UplinkEnv(cfg).reset(seed=42)
        b, _ = UplinkEnv(cfg).reset(seed=42)
        np.testing.assert_array_equal(a, b)

    def test_step_before_reset(self):
        with pytest.raises(RuntimeError):
            UplinkEnv(ScenarioConfig()).step(JointAction(alloc=[IDLE] * 3, resol=[100.0] * 3))
