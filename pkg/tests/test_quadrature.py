"""Panel quadrature, cumulative integrals, and the piecewise-linear transform."""

import numpy as np
import pytest

from halfsum.errors import QuadratureFailed
from halfsum.quadrature import (RunningIntegral, fourier_piecewise_linear,
                                integrate_adaptive)


def test_polynomial_is_exact():
    val = integrate_adaptive(lambda x: x ** 3 - 2 * x, 0.0, 2.0, 1e-12)
    assert abs(val - (4.0 - 4.0)) < 1e-12


def test_oscillatory_integral():
    # int_0^20 sin(5 t) dt = (1 - cos(100))/5
    val = integrate_adaptive(lambda x: np.sin(5 * x), 0.0, 20.0, 1e-10)
    assert abs(val - (1 - np.cos(100.0)) / 5) < 1e-9


def test_complex_integrand():
    val = integrate_adaptive(lambda x: np.exp((1j - 1) * x), 0.0, 40.0, 1e-10)
    assert abs(val - 1.0 / (1 - 1j)) < 1e-9


def test_empty_interval():
    assert integrate_adaptive(lambda x: x, 3.0, 3.0, 1e-8) == 0


def test_budget_exhaustion_reports_interval():
    # oscillation far too fast for the budget
    with pytest.raises(QuadratureFailed) as err:
        integrate_adaptive(lambda x: np.sin(1e6 * x), 0.0, 1.0,
                           1e-14, max_evals=2000)
    assert err.value.interval is not None


def test_running_integral_matches_batch():
    ri = RunningIntegral(lambda t: np.cos(t) * np.exp(-0.01 * t), 0.0,
                         tol_density=1e-12)
    partials = [ri.value_to(x) for x in (5.0, 50.0, 500.0)]
    direct = integrate_adaptive(lambda t: np.cos(t) * np.exp(-0.01 * t),
                                0.0, 500.0, 1e-11)
    assert abs(partials[-1] - direct) < 1e-8


def test_running_integral_rejects_backward():
    ri = RunningIntegral(lambda t: t, 0.0)
    ri.value_to(10.0)
    with pytest.raises(QuadratureFailed):
        ri.value_to(5.0)


def test_filon_matches_quadrature():
    grid = np.linspace(0.0, 10.0, 2049)
    values = np.exp(-grid) * (1 + 0.5j)
    for xi in (0.0, 1e-6, 0.5, 7.0):
        got = fourier_piecewise_linear(grid, values, xi)
        want = integrate_adaptive(
            lambda t, xi=xi: np.interp(t, grid, values.real) * np.exp(-1j * xi * t)
            + 1j * np.interp(t, grid, values.imag) * np.exp(-1j * xi * t),
            0.0, 10.0, 1e-10)
        assert abs(got - want) < 1e-8
