import cmath
import math

import numpy as np
import pytest

from threshold_passage.errors import DomainError, FitWindowTooWide
from threshold_passage.threshold import (
    analytic_threshold_solution,
    connection_residual,
    fit_threshold_pole,
    hankel,
    reduced_threshold_survival,
    threshold_argument_scale,
    threshold_strength,
    universal_constant,
    wronskian_residual,
    zero_energy_log_derivative,
)
from threshold_passage.sturmian import RectangularBasis


def test_universal_constant():
    c = universal_constant()
    assert abs(c - (3 - math.sqrt(5)) / 2) < 1e-15
    golden = (1 + math.sqrt(5)) / 2
    assert abs(c - (1 - 1 / golden)) < 1e-15
    assert abs(c - 4 * math.cos(2 * math.pi / 5) ** 2) < 1e-15


def test_wronskian_example():
    assert wronskian_residual(0.4, 1 + 1j) < 1e-10


def test_half_order_example():
    exact = -1j * math.sqrt(2 / (math.pi * 2)) * cmath.exp(2j)
    assert abs(hankel(0.5, 1, 2.0) - exact) < 1e-12


@pytest.mark.parametrize("rho", [0.5, 2.0, 10.0])
def test_connection_formula(rho):
    assert connection_residual(rho) < 1e-9


def test_zero_argument():
    with pytest.raises(DomainError):
        hankel(0.4, 1, 0.0)


def test_large_argument_asymptote():
    z = 40 * cmath.exp(0.3j)
    nu = 0.4
    lead = cmath.sqrt(2 / (math.pi * z)) * cmath.exp(1j * (z - nu * math.pi / 2 - math.pi / 4))
    assert abs(hankel(nu, 1, z) / lead - 1) < 0.01


def _fd_residual(omega, rate):
    """|B'' + i (2 omega)^(1/2) ... | via the E = 0 equation B'' - rho B / v^2 = 0."""
    h = min(0.01, 0.05 * abs(omega))
    pts = analytic_threshold_solution(omega + h * np.arange(-2, 3), rate)
    d2 = (-pts[0] + 16 * pts[1] - 30 * pts[2] + 16 * pts[3] - pts[4]) / (12 * h * h)
    rho = 1j * cmath.sqrt(2 * complex(omega)) if omega > 0 else -math.sqrt(-2 * omega)
    return abs(d2 - rho * pts[2] / rate**2) / abs(pts[2])


@pytest.mark.parametrize("omega", [-5.0, -2.0, -0.3, 0.2, 1.0, 5.0])
def test_analytic_solution_solves_equation(omega):
    assert _fd_residual(omega, 1.0) < 1e-6


def test_decay_exponent():
    from scipy.optimize import curve_fit

    w = np.linspace(20.0, 60.0, 21)
    y = np.log(np.abs(analytic_threshold_solution(w, 1.0)) * w**0.125)
    # log|B| + (1/8) log omega = c - K omega^s with s = 5/4
    (c, K, s), _ = curve_fit(lambda x, c, K, s: c - K * x**s, w, y, p0=(0.0, 0.5, 1.2))
    assert abs(s - 1.25) < 0.01
    assert abs(K - 2**1.75 / 5) < 0.01


def test_argument_scale():
    assert threshold_argument_scale(2.0, 3.0) == pytest.approx(2**2.25 / (5 * 2.0 * 3.0**0.25))


def test_pole_model_rectangular():
    for m in range(3):
        model = fit_threshold_pole("rectangular", m)
        assert model.slope > 0 and model.residual < 1e-3
        assert model.rho0 == pytest.approx(-2 * math.pi**2 * m * m)
        assert abs(model.kappa(model.rho0)) < 1e-12
        assert abs(zero_energy_log_derivative("rectangular", model.rho0)) < 1e-9
        L = model.scattering_length(model.rho0 + np.array([-1e-3, 1e-3]))
        assert L[0] * L[1] < 0 and np.min(np.abs(L)) > 100


def test_pole_model_matches_continuation():
    model = fit_threshold_pole("rectangular", 0)
    ch = RectangularBasis((0,)).channels[0]
    w = np.array([1e-4, 1e-3, 1e-2])
    exact = ch.rho(w.astype(complex)) - model.rho0
    pred = model.rho_of_omega(w) - model.rho0
    # the sqrt(omega) term; the model has no O(omega) real part
    assert np.max(np.abs(exact.imag - pred.imag) / np.abs(exact.imag)) < 0.01


def test_parabolic_threshold_strengths_monotone():
    rho = [threshold_strength("parabolic", m) for m in range(4)]
    assert rho[0] == 0 and np.all(np.diff(rho) < 0)
    model = fit_threshold_pole("parabolic", 1)
    assert model.slope > 0


def test_fit_window_error():
    with pytest.raises(FitWindowTooWide):
        fit_threshold_pole("rectangular", 0, rel_window=50.0, tol=1e-12, max_shrink=0)


def test_reduced_equation_is_universal():
    model = fit_threshold_pole("rectangular", 1)
    for v in (1e-3, 1.0):
        assert abs(reduced_threshold_survival(model, v).P_stay[0, 0] - universal_constant()) < 1e-6


def test_reduced_equation_tracks_single_sturmian_at_small_rate():
    from threshold_passage.reflection import solve_single_sturmian
    from threshold_passage.trap import box_spec

    model = fit_threshold_pole("rectangular", 0)
    red = reduced_threshold_survival(model, 1e-3).P_stay[0, 0]
    full = solve_single_sturmian(box_spec("rectangular", 0.0, 1e-3)).P_stay[0, 0]
    assert abs(full - red) / red < 0.02
