"""Built-in nonlinearity families and their consistency checks."""

import numpy as np
import pytest
from scipy.integrate import quad

from pohomin import (
    G_eval,
    InfeasibleFamilyError,
    NonlinearityModel,
    make_asym_linear,
    make_nonmonotone,
    make_power,
    make_quintic,
    monotonicity_probe,
    two_maxima_profile,
)
from pohomin.grid import RadialGrid
from pohomin.nonlinearity import (
    TWO_MAXIMA_B,
    TWO_MAXIMA_C,
    TWO_MAXIMA_D,
    TWO_MAXIMA_R,
)

ALL_MODELS = [
    make_power(1.0),
    make_asym_linear(1.0, 0.5),
    make_quintic(3.0, TWO_MAXIMA_B, TWO_MAXIMA_C, TWO_MAXIMA_D),
    make_nonmonotone(0.5, 1.0),
]


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.name)
def test_F_prime_matches_f_on_fine_grid(model):
    u = np.linspace(0.01, 10.0, 50)
    h = 1e-6
    fd = (model.F(u + h) - model.F(u - h)) / (2 * h)
    f = model.f(u)
    assert np.all(np.abs(fd - f) <= 1e-4 * (1.0 + np.abs(f)))


@pytest.mark.parametrize("model", ALL_MODELS, ids=lambda m: m.name)
def test_F_vanishes_at_zero(model):
    assert float(model.F(0.0)) == pytest.approx(0.0, abs=1e-14)


def test_power_direct_values():
    m = make_power(2.0)
    assert m.f(2.0) == pytest.approx(8.0)
    assert m.F(2.0) == pytest.approx(4.0)
    assert m.lam == 2.0


def test_power_rejects_nonpositive_lambda():
    with pytest.raises(ValueError):
        make_power(0.0)
    with pytest.raises(ValueError):
        make_power(-1.0)


def test_asym_direct_values():
    m = make_asym_linear(1.0, 0.5)
    assert m.f(2.0) == pytest.approx(8.0 / 3.0)
    # F(u) = u^2/(2s) - log(1 + s u^2)/(2 s^2)
    assert m.F(2.0) == pytest.approx(4.0 - 2.0 * np.log(3.0))


def test_asym_infeasible_iff_lambda_s_at_least_one():
    with pytest.raises(InfeasibleFamilyError):
        make_asym_linear(2.0, 0.5)
    with pytest.raises(InfeasibleFamilyError):
        make_asym_linear(5.0, 0.3)
    make_asym_linear(1.0, 0.999)  # still feasible
    with pytest.raises(ValueError):
        make_asym_linear(1.0, -0.1)


def test_quintic_odd_even_extension():
    m = make_quintic(3.0, 1.0, 1.0, 1.0)
    u = np.array([-2.0, -0.5, 0.5, 2.0])
    assert np.allclose(m.f(-u), -m.f(u))
    assert np.allclose(m.F(-u), m.F(u))


def test_quintic_rejects_nonpositive_coefficients():
    with pytest.raises(ValueError):
        make_quintic(3.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        make_quintic(3.0, 1.0, -1.0, 1.0)


def test_nonmonotone_F_matches_direct_quadrature():
    m = make_nonmonotone(0.5, 1.0)

    def f_raw(u):
        return (u ** 7 - 2.5 * u ** 5 + 2.0 * u ** 3) / (1.0 + u ** 6)

    for u in (0.3, 1.0, 2.7, 10.0):
        exact, _ = quad(f_raw, 0.0, u)
        assert float(m.F(u)) == pytest.approx(exact, rel=1e-7, abs=1e-9)


def test_nonmonotone_F_bounded_table():
    m = make_nonmonotone(0.5, 1.0)
    with pytest.raises(ValueError):
        m.F(600.0)


def test_G_sign_structure_power():
    # G(u) = -u^2/2 + u^4/4 for lambda = 1: zero at sqrt(2)
    m = make_power(1.0)
    assert G_eval(m, 1.0) < 0
    assert G_eval(m, np.sqrt(2.0)) == pytest.approx(0.0, abs=1e-14)
    assert G_eval(m, 2.0) > 0


def test_monotonicity_probe():
    u = np.linspace(0.01, 3.0, 300)
    assert monotonicity_probe(make_power(1.0), u)
    assert monotonicity_probe(make_asym_linear(1.0, 0.5), u)
    assert not monotonicity_probe(make_nonmonotone(0.5, 1.0), u)
    with pytest.raises(ValueError):
        monotonicity_probe(make_power(1.0), np.array([1.0, 0.5]))


def test_model_validation_catches_inconsistent_pair():
    with pytest.raises(ValueError):
        NonlinearityModel(
            name="broken", lam=1.0,
            f=lambda u: np.asarray(u) ** 3,
            F=lambda u: np.asarray(u) ** 2,
        )


def test_two_maxima_profile_shape():
    grid = RadialGrid.from_extent(400, 10.0)
    u = two_maxima_profile(grid)
    r = grid.nodes
    cap = 1.0 / np.sqrt(4 * np.pi)
    inside = r <= TWO_MAXIMA_R
    assert np.allclose(u.values[inside], cap)
    assert np.all(u.values[~inside] < cap)
    assert np.all(np.diff(u.values[~inside]) < 0)
