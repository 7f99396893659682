import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metaopt.controller import ControllerParams, init_controller
from metaopt.errors import ConfigurationError, NumericDomainError
from metaopt.world import (TaskDistConfig, WorldConfig, make_task, reference_point,
                           rollout, sample_task, stage_cost, step_dynamics, wrap_angle)


def zero_dist(**kw):
    point = {name: (0.7, 0.7) for name in TaskDistConfig.RANGES}
    point.update(noise_std=(0.01, 0.01))
    point.update(kw)
    return TaskDistConfig(**point)


class TestSampleTask:
    def test_degenerate_ranges_give_the_unique_task(self, rng):
        dist = zero_dist(weights=(1.0, 0.0, 0.0))
        task = sample_task(dist, rng)
        assert task.path_kind == "circle"
        assert task.path_params == (0.7, 0.7, 0.7, 0.7)
        assert task.noise_std == (0.01, 0.01, 0.01)

    def test_degenerate_mixture_always_circle(self, rng):
        dist = TaskDistConfig(weights=(1.0, 0.0, 0.0))
        assert {sample_task(dist, rng).path_kind for _ in range(300)} == {"circle"}

    def test_radius_monte_carlo_mean(self, rng):
        dist = TaskDistConfig(weights=(1.0, 0.0, 0.0), circle_radius=(1.0, 2.0))
        radii = [sample_task(dist, rng).path_params[2] for _ in range(10_000)]
        assert abs(np.mean(radii) - 1.5) <= 0.02

    def test_deterministic_given_stream_state(self):
        dist = TaskDistConfig()
        a = sample_task(dist, np.random.default_rng(7))
        b = sample_task(dist, np.random.default_rng(7))
        assert a == b

    @pytest.mark.parametrize("kw", [
        {"weights": (0.5, 0.5, 0.5)},
        {"weights": (1.5, -0.5, 0.0)},
        {"circle_radius": (2.0, 1.0)},
        {"circle_radius": (0.0, 1.0)},
        {"noise_std": (-0.1, 0.0)},
        {"world": WorldConfig(control_low=(1.0, 0.0), control_high=(0.0, 1.0))},
    ])
    def test_malformed_distribution(self, rng, kw):
        with pytest.raises(ConfigurationError):
            sample_task(TaskDistConfig(**kw), rng)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_sampled_tasks_satisfy_invariants(self, seed):
        task = sample_task(TaskDistConfig(weights=(0.4, 0.4, 0.2)),
                           np.random.default_rng(seed))
        assert min(task.noise_std) >= 0
        assert all(lo < hi for lo, hi in zip(task.control_low, task.control_high))
        size = task.path_params[2] if task.path_kind == "circle" else task.path_params[0]
        assert size > 0


class TestReference:
    def test_circle_start(self):
        task = make_task("circle", (0, 0, 1, 0))
        np.testing.assert_array_equal(reference_point(task, 0), [1.0, 0.0])

    def test_circle_quarter_period(self):
        task = make_task("circle", (0, 0, 2.0, 0))
        quarter = (math.pi / 2) / (task.omega_ref * task.dt)
        np.testing.assert_allclose(reference_point(task, quarter), [0.0, 2.0], atol=1e-9)

    def test_zero_amplitude_sine_on_x_axis(self):
        task = make_task("sine", (0.0, 1.3, 0.4))
        pts = reference_point(task, np.arange(50))
        assert np.all(pts[:, 1] == 0.0)
        assert np.all(np.diff(pts[:, 0]) > 0)

    def test_start_state_on_reference_heading_along_it(self):
        task = make_task("circle", (0.3, -0.2, 1.5, 0.0))
        np.testing.assert_allclose(task.x0, [1.8, -0.2, math.pi / 2], atol=1e-9)

    def test_lemniscate_passes_through_origin(self):
        task = make_task("lemniscate", (1.5, 0.0))
        quarter = (math.pi / 2) / (task.omega_ref * task.dt)
        np.testing.assert_allclose(reference_point(task, quarter), [0.0, 0.0], atol=1e-12)


class TestDynamics:
    def test_euler_step_along_x(self, rng):
        task = make_task("circle", (0, 0, 1, 0))
        np.testing.assert_allclose(step_dynamics(task, [0, 0, 0], [1, 0], rng), [0.1, 0, 0])

    def test_euler_step_along_y(self, rng):
        task = make_task("circle", (0, 0, 1, 0))
        out = step_dynamics(task, [0, 0, math.pi / 2], [1, 0], rng)
        np.testing.assert_allclose(out, [0, 0.1, math.pi / 2], atol=1e-15)

    def test_noiseless_deterministic(self):
        task = make_task("sine", (1, 1, 0))
        a = step_dynamics(task, [0.2, 0.1, 3.0], [0.7, 1.2], np.random.default_rng(1))
        b = step_dynamics(task, [0.2, 0.1, 3.0], [0.7, 1.2], np.random.default_rng(2))
        np.testing.assert_array_equal(a, b)

    def test_controls_are_clamped(self, rng):
        task = make_task("circle", (0, 0, 1, 0))
        out = step_dynamics(task, [0, 0, 0], [100.0, 0.0], rng)
        np.testing.assert_allclose(out, [task.control_high[0] * task.dt, 0, 0])

    def test_heading_wraps(self, rng):
        task = make_task("circle", (0, 0, 1, 0))
        out = step_dynamics(task, [0, 0, 3.1], [0.0, 4.0], rng)
        assert -math.pi < out[2] <= math.pi
        assert out[2] == pytest.approx(3.5 - 2 * math.pi)

    def test_non_finite_rejected(self, rng):
        task = make_task("circle", (0, 0, 1, 0))
        with pytest.raises(NumericDomainError):
            step_dynamics(task, [np.nan, 0, 0], [0, 0], rng)

    @given(st.floats(-50, 50))
    def test_wrap_angle_range(self, a):
        w = float(wrap_angle(a))
        assert -math.pi < w <= math.pi
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)

    def test_wrap_minus_pi(self):
        assert wrap_angle(-math.pi) == math.pi


class TestStageCost:
    def test_on_reference_zero_control(self):
        task = make_task("circle", (0, 0, 1, 0))
        assert stage_cost(task, [1.0, 0.0, 0.3], [0, 0], 0) == 0.0

    def test_position_term(self):
        task = make_task("circle", (0, 0, 1, 0), world=WorldConfig(w_pos=1.0, w_ctrl=0.0))
        assert stage_cost(task, [1.0 + 1.2, 1.6, 0.0], [1, 1], 0) == pytest.approx(4.0)

    def test_effort_term(self):
        task = make_task("circle", (0, 0, 1, 0), world=WorldConfig(w_ctrl=0.1))
        assert stage_cost(task, [1.0, 0.0, 0.0], [1, 1], 0) == pytest.approx(0.2)


class TestRollout:
    def test_zero_sigma_zero_noise_rollouts_identical(self, rng, quiet_circle):
        m = init_controller(30, 2)
        m = ControllerParams(np.full(m.shape, 0.3), np.full(m.shape, -20.0))
        batch = rollout(quiet_circle, m, 3, rng)
        for i in (1, 2):
            np.testing.assert_allclose(batch.states[i], batch.states[0], atol=1e-9)
            np.testing.assert_allclose(batch.costs[i], batch.costs[0], atol=1e-9)

    def test_same_seed_identical(self, circle_task):
        m = init_controller(30, 2)
        a = rollout(circle_task, m, 5, np.random.default_rng(3))
        b = rollout(circle_task, m, 5, np.random.default_rng(3))
        for f in ("controls", "costs", "states"):
            np.testing.assert_array_equal(getattr(a, f), getattr(b, f))

    def test_shapes_and_invariants(self, circle_task, rng):
        batch = rollout(circle_task, init_controller(30, 2), 4, rng)
        assert batch.controls.shape == (4, 31, 2)
        assert batch.costs.shape == (4, 31)
        assert batch.states.shape == (4, 32, 3)
        assert np.all(batch.costs >= 0) and np.all(np.isfinite(batch.costs))
        assert np.all(np.abs(batch.states[:, :, 2]) <= math.pi)
        assert np.all(batch.controls <= circle_task.high)
        assert np.all(batch.controls >= circle_task.low)

    def test_horizon_mismatch(self, circle_task, rng):
        with pytest.raises(ConfigurationError):
            rollout(circle_task, init_controller(10, 2), 2, rng)

    def test_matches_iterated_step_dynamics(self):
        m = init_controller(30, 2)
        quiet = make_task("circle", (0.0, 0.0, 1.5, 0.0))
        batch = rollout(quiet, m, 1, np.random.default_rng(11))
        x = np.array(quiet.x0)
        for t in range(31):
            x = step_dynamics(quiet, x, batch.controls[0, t], np.random.default_rng(t))
            np.testing.assert_allclose(batch.states[0, t + 1], x, rtol=0, atol=1e-12)
            assert batch.costs[0, t] == pytest.approx(
                float(stage_cost(quiet, x, batch.controls[0, t], t + 1)), abs=1e-12)


def straight_line_cost_oracle(task, n, rng_seed):
    """Independent scalar simulator for a zero-mean controller, sigma = 0.5."""
    rng = np.random.default_rng(rng_seed)
    total = 0.0
    for _ in range(n):
        x, y, h = task.x0
        for t in range(task.horizon + 1):
            v = min(max(rng.normal(0.0, 0.5), task.control_low[0]), task.control_high[0])
            w = min(max(rng.normal(0.0, 0.5), task.control_low[1]), task.control_high[1])
            x, y, h = x + task.dt * v * math.cos(h), y + task.dt * v * math.sin(h), h + task.dt * w
            ang = task.omega_ref * (t + 1) * task.dt + task.path_params[3]
            rx = task.path_params[0] + task.path_params[2] * math.cos(ang)
            ry = task.path_params[1] + task.path_params[2] * math.sin(ang)
            total += task.w_pos * ((x - rx) ** 2 + (y - ry) ** 2) + task.w_ctrl * (v * v + w * w)
    return total / (n * (task.horizon + 1))


def test_zero_mean_rollout_cost_matches_independent_simulator(quiet_circle):
    oracle = straight_line_cost_oracle(quiet_circle, 4000, 99)
    batch = rollout(quiet_circle, init_controller(30, 2), 4000, np.random.default_rng(5))
    assert batch.mean_cost() == pytest.approx(oracle, rel=0.01)
