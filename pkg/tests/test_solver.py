"""Line search, restarts, and the outer solve loop on small grids."""

import numpy as np
import pytest

from pohomin import (
    LineSearchAnomaly,
    RadialGrid,
    SolverConfig,
    initial_guess,
    line_minimize,
    make_power,
    project,
    scan_minimize,
    solve,
)
from pohomin.energy import g_integral
from pohomin.descent import steepest_direction

SMALL = SolverConfig(m=48, r_star=1.0, eps_stop=2e-2, sor_tol=1e-10)


class TestInitialGuess:
    def test_gaussian_shape(self):
        grid = RadialGrid.from_extent(10, 1.0)
        w = initial_guess(grid, amplitude=2.0, width=3.0)
        assert w.values[0] == pytest.approx(2.0)
        assert np.allclose(w.values, 2.0 * np.exp(-3.0 * grid.nodes ** 2))

    def test_rejects_bad_parameters(self):
        grid = RadialGrid.from_extent(10, 1.0)
        with pytest.raises(ValueError):
            initial_guess(grid, amplitude=-1.0)
        with pytest.raises(ValueError):
            initial_guess(grid, kind="tophat")


class TestSolverConfig:
    def test_defaults_are_consistent(self):
        cfg = SolverConfig()
        assert cfg.m == 1000
        assert cfg.alpha_min <= cfg.alpha0

    @pytest.mark.parametrize("kwargs", [
        {"m": 2}, {"r_star": 0.0}, {"alpha0": -1.0},
        {"alpha0": 1e-12, "alpha_min": 1e-10},
        {"sor_omega": 2.0}, {"k_max": 0}, {"reproject_stride": 0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)


class TestScanMinimize:
    def test_quadratic_to_refinement_floor(self):
        # forward-only refinement can overshoot by half a step of the level
        # where the minimizer is passed, so the bracket is what's guaranteed
        target = 0.0123456789
        alpha, val = scan_minimize(
            lambda a: (a - target) ** 2, 0.1, 1e-10, 1000
        )
        assert abs(alpha - target) <= 1e-4
        assert val <= 1e-8

    def test_quadratic_on_node_is_exact(self):
        # a minimizer that lies on scan nodes is hit to the last level
        target = 0.0123
        alpha, val = scan_minimize(
            lambda a: (a - target) ** 2, 0.1, 1e-10, 1000
        )
        assert abs(alpha - target) <= 1e-9
        assert val <= 1e-17

    def test_immediate_rise_returns_origin(self):
        alpha, val = scan_minimize(lambda a: a, 0.1, 1e-3, 100)
        assert alpha == 0.0
        assert val == 0.0

    def test_flat_curve_is_an_anomaly(self):
        with pytest.raises(LineSearchAnomaly):
            scan_minimize(lambda a: 1.0, 0.1, 1e-2, 50)

    def test_local_maximum_is_jumped(self):
        # quadratic with a narrow bump at 0.2: a plain scan would stop
        # at the rise; the far-neighbor peek must carry it to ~0.5
        def phi(a):
            return (a - 0.5) ** 2 + 0.2 * np.exp(-((a - 0.2) / 0.02) ** 2)

        alpha, _ = scan_minimize(phi, 0.1, 1e-8, 1000)
        assert abs(alpha - 0.5) <= 1e-6


@pytest.fixture(scope="module")
def small_state():
    model = make_power(1.0)
    grid = RadialGrid.from_extent(SMALL.m, SMALL.r_star)
    w = project(model, initial_guess(grid)).projected
    dd = steepest_direction(model, w, SMALL)
    return model, w, dd


class TestLineMinimize:
    def test_descent_step_lowers_action(self, small_state):
        model, w, dd = small_state
        from pohomin.energy import action_I
        ls = line_minimize(model, w, dd.direction.values, SMALL)
        assert ls.outcome == "minimum"
        assert ls.value < action_I(model, w)
        assert ls.total_alpha > 0
        assert abs(project(model, ls.point).t_star - 1.0) <= 1e-9

    def test_projection_path_independence(self, small_state):
        # projecting a candidate gives the same state no matter which
        # intermediate mesh scale it is projected from
        model, w, dd = small_state
        values = w.values + 0.05 * dd.direction.values
        from pohomin import RadialFunction
        base = RadialFunction(w.grid, values)
        stretched = RadialFunction(w.grid.with_spacing(1.7 * w.grid.dr),
                                   values)
        pa = project(model, base)
        pb = project(model, stretched)
        assert np.array_equal(pa.projected.values, pb.projected.values)
        assert pa.projected.grid.dr == pytest.approx(
            pb.projected.grid.dr, rel=1e-12
        )
        assert pa.action_at_t == pytest.approx(pb.action_at_t, rel=1e-12)

    def test_stride_still_descends(self, small_state):
        # a sparser reprojection stride must still produce a descent step
        model, w, dd = small_state
        from pohomin.energy import action_I
        cfg_stride = SolverConfig(
            m=SMALL.m, r_star=SMALL.r_star, eps_stop=SMALL.eps_stop,
            sor_tol=SMALL.sor_tol, reproject_stride=5,
        )
        ls = line_minimize(model, w, dd.direction.values, cfg_stride)
        assert ls.outcome == "minimum"
        assert ls.value < action_I(model, w)
        assert abs(project(model, ls.point).t_star - 1.0) <= 1e-9

    def test_exhausted_scan_requests_sound_restart(self, small_state):
        # K too small to bracket the minimum: the search must hand back a
        # feasible restart point (positive G-integral) instead of a step
        model, w, dd = small_state
        cfg = SolverConfig(
            m=SMALL.m, r_star=SMALL.r_star, sor_tol=SMALL.sor_tol,
            k_max=2, alpha0=0.05, alpha_min=0.05,
        )
        ls = line_minimize(model, w, dd.direction.values, cfg)
        assert ls.outcome == "restart"
        assert ls.restart_point is not None
        assert ls.restart_k >= 1
        assert g_integral(model, ls.restart_point) > 0


class TestSolve:
    @pytest.fixture(scope="class")
    def result(self):
        return solve(make_power(1.0), SMALL)

    def test_converged_and_positive(self, result):
        # M = 48 converges via the action-stall test; the gradient floor of
        # the coarse grid sits above eps_stop, which is reported faithfully
        assert result.status == "converged"
        assert result.solution.values.min() >= -SMALL.positivity_tol

    def test_gradient_convergence_on_finer_grid(self):
        cfg = SolverConfig(m=100, r_star=2.0, eps_stop=2e-2, sor_tol=1e-10)
        res = solve(make_power(1.0), cfg)
        assert res.status == "converged"
        assert res.grad_norm < cfg.eps_stop

    def test_trace_monotone_nonincreasing(self, result):
        actions = [t.action for t in result.trace]
        assert len(actions) >= 2
        diffs = np.diff(actions)
        assert np.all(diffs <= 1e-12 * (1.0 + np.abs(actions[:-1])))

    def test_profile_radially_nonincreasing(self, result):
        u = result.solution.values
        assert np.all(np.diff(u) <= 1e-10 * (1.0 + u[:-1]))

    def test_result_fields(self, result):
        assert result.u_at_zero == pytest.approx(result.solution.values[0])
        assert result.r_star_final == pytest.approx(
            result.solution.grid.r_star
        )
        assert result.outer_iterations >= len(result.trace)

    def test_max_iterations_status(self):
        cfg = SolverConfig(m=48, r_star=1.0, sor_tol=1e-10, max_outer=1)
        res = solve(make_power(1.0), cfg)
        assert res.status == "max_iterations"
        assert res.outer_iterations == 1

    def test_custom_guess_is_respected(self):
        grid = RadialGrid.from_extent(SMALL.m, SMALL.r_star)
        guess = initial_guess(grid, amplitude=50.0, width=5.0)
        res = solve(make_power(1.0), SMALL, guess=guess)
        assert res.status == "converged"

    def test_truncation_warning_for_short_domain(self):
        with pytest.warns(UserWarning, match="tail is likely truncated"):
            solve(make_power(1.0), SMALL)
