"""Action, Pohozaev functional, projection, and fiber diagnostics."""

import numpy as np
import pytest

from pohomin import (
    ProjectionInfeasible,
    RadialFunction,
    RadialGrid,
    action_I,
    count_interior_maxima,
    fiber_scan,
    grad_l2_sq,
    h_eval,
    h_prime,
    make_power,
    pohozaev_J,
    project,
    project_t,
)
from pohomin.energy import g_integral, interior_maxima


def gaussian(amp, width=1.0, m=2000, r_star=8.0):
    grid = RadialGrid.from_extent(m, r_star)
    return RadialFunction.from_callable(
        grid, lambda r: amp * np.exp(-width * r * r)
    )


@pytest.fixture(scope="module")
def power():
    return make_power(1.0)


def test_projection_parameter_gaussian_oracle(power):
    # For u = 3 exp(-r^2), lambda = 1, f = u^3 the moments are closed-form:
    #   |grad u|^2 -> (27/8) sqrt(pi/2)  (radial, no 4 pi)
    #   int G      -> -(9/16) sqrt(pi/2) + (81/128) sqrt(pi)
    # and t*^2 = grad / (6 * int G).
    g = (27.0 / 8.0) * np.sqrt(np.pi / 2.0)
    gint = -(9.0 / 16.0) * np.sqrt(np.pi / 2.0) \
        + (81.0 / 128.0) * np.sqrt(np.pi)
    t_exact = np.sqrt(g / (6.0 * gint))
    t = project_t(power, gaussian(3.0))
    assert t == pytest.approx(t_exact, rel=1e-4)


def test_projection_lands_on_manifold(power):
    for amp in (3.0, 5.0, 10.0, 100.0):
        pr = project(power, gaussian(amp))
        scale = max(1.0, grad_l2_sq(pr.projected))
        assert abs(pohozaev_J(power, pr.projected)) <= 1e-9 * scale


def test_projection_preserves_values(power):
    w = gaussian(5.0)
    pr = project(power, w)
    assert np.array_equal(pr.projected.values, w.values)


def test_projection_infeasible_small_amplitude(power):
    # G(u) = -u^2/2 + u^4/4 < 0 pointwise for 0 < u < sqrt(2)
    with pytest.raises(ProjectionInfeasible):
        project_t(power, gaussian(0.5))


def test_h_at_one_is_action(power):
    w = gaussian(3.0)
    assert h_eval(power, w, 1.0) == pytest.approx(action_I(power, w), rel=1e-13)


def test_h_prime_vanishes_at_projection(power):
    w = gaussian(3.0)
    t = project_t(power, w)
    assert h_prime(power, w, t) == pytest.approx(0.0, abs=1e-10)
    # and t* is the fiber maximum
    assert h_eval(power, w, t) > h_eval(power, w, 0.9 * t)
    assert h_eval(power, w, t) > h_eval(power, w, 1.1 * t)


def test_h_matches_rescaled_action(power):
    from pohomin import rescale
    w = gaussian(3.0)
    for t in (0.3, 1.7):
        assert h_eval(power, w, t) == pytest.approx(
            action_I(power, rescale(w, t)), rel=1e-12
        )


def test_fiber_maximality_on_log_grid(power):
    w = gaussian(3.0)
    t_star = project_t(power, w)
    ts = np.geomspace(0.05, 20.0, 400)
    vals = np.array([h_eval(power, w, t) for t in ts])
    assert vals.max() <= h_eval(power, w, t_star) + 1e-12


def test_on_manifold_grad_is_three_times_action(power):
    # J = 0 forces int G = grad/6, hence I = grad/2 - grad/6 = grad/3
    pr = project(power, gaussian(3.0))
    assert grad_l2_sq(pr.projected) == pytest.approx(
        3.0 * pr.action_at_t, rel=1e-12
    )


def test_g_integral_sign(power):
    assert g_integral(power, gaussian(3.0)) > 0
    assert g_integral(power, gaussian(0.5)) < 0


def test_amplitude_fiber_single_maximum_for_power(power):
    w = gaussian(3.0)
    ts = np.arange(0.05, 4.0, 0.01)
    vals = fiber_scan(power, w, ts)
    assert count_interior_maxima(vals) == 1
    [(t_max, _)] = interior_maxima(ts, vals)
    assert 0.0 < t_max < 4.0


def test_fiber_scan_rejects_nonpositive_grid(power):
    with pytest.raises(ValueError):
        fiber_scan(power, gaussian(3.0), [0.0, 1.0])


def test_h_rejects_nonpositive_t(power):
    w = gaussian(3.0, m=100, r_star=4.0)
    with pytest.raises(ValueError):
        h_eval(power, w, 0.0)
    with pytest.raises(ValueError):
        h_prime(power, w, -1.0)
