import math

import numpy as np
import pytest

from threshold_passage.sturmian import (
    RectangularBasis,
    RectangularChannel,
    ZeroRangeBasis,
    overlap_quadrature,
    residual_r4,
    rho_zero_range,
)

BASIS = RectangularBasis((0, 1, 2))


def test_zero_range_strength_examples():
    assert rho_zero_range(0.0) == 0
    assert rho_zero_range(2.0) == pytest.approx(2j)
    assert rho_zero_range(-2.0) == pytest.approx(-2.0)
    # the delta well with strength rho binds at -mu rho^2 / 2 = omega
    assert -rho_zero_range(-2.0).real ** 2 / 2 == pytest.approx(-2.0)


def test_zero_range_sturmian_at_origin():
    assert ZeroRangeBasis().sturmian(0.0, 1.3) == pytest.approx(1.0)
    assert ZeroRangeBasis().sturmian(0.0, -0.7) == pytest.approx(1.0)


@pytest.mark.parametrize("j", [0, 1, 2])
def test_box_limit(j):
    ch = BASIS.channels[j]
    w = np.array([-2e3, -8e3])
    gap = np.abs(ch.rho(w) - (w - (2 * j + 1) ** 2 * math.pi**2 / 2))
    assert gap[1] < gap[0] < 0.05 * (2 * j + 1) ** 2 * math.pi**2


def test_box_limit_eigenfunction():
    x = np.linspace(-0.45, 0.45, 7)
    for j in range(3):
        box = np.cos((2 * j + 1) * math.pi * x) * math.sqrt(2)
        err = [np.max(np.abs(BASIS.sturmian(x, w, j) - box)) for w in (-1e3, -1e4)]
        # the edge value closes like 1/kappa = 1/sqrt(2|omega|)
        assert err[1] < 0.5 * err[0] and err[1] < 0.1
        assert abs(BASIS.sturmian(np.array([0.8]), -1e4, j)[0]) < 1e-6


def test_real_below_threshold_and_decaying_imaginary_part():
    w = np.linspace(-40, -0.01, 50)
    for ch in BASIS.channels:
        assert np.max(np.abs(ch.rho(w).imag)) < 1e-12
    big = np.array([50.0, 500.0, 5000.0])
    for ch in BASIS.channels:
        im = np.abs(ch.rho(big).imag)
        # Im rho falls off like omega^(-1/2)
        assert np.all(np.diff(im) < 0)
        assert abs(np.polyfit(np.log(big[1:]), np.log(im[1:]), 1)[0] + 0.5) < 0.05


def test_roots_by_independent_scan():
    # dense scan of |tan(pa) + ik/p| over a complex P grid near each tracked root
    for w in (-3.0, 4.0):
        k = np.sqrt(complex(2 * w))
        for ch in BASIS.channels:
            P = ch.values(np.array([w], dtype=complex)).P[0]
            re = np.linspace(P.real - 2, P.real + 2, 201)
            im = np.linspace(P.imag - 2, P.imag + 2, 201)
            grid = re[None, :] + 1j * im[:, None]
            res = residual_r4(grid, k)
            best = grid.ravel()[np.argmin(res)]
            assert abs(best - P) < 0.03
            assert residual_r4(P, k) < 1e-10


def test_unit_normalisation():
    for j in range(3):
        for w in (-5.0, 0.5, 12.0):
            assert abs(overlap_quadrature(BASIS, j, j, w, w) - 1) < 1e-10


def test_M1_diagonal_vanishes():
    for w in (-3.0, 1e-3, 2.0, 0.5 + 0.5j):
        assert np.max(np.abs(np.diag(BASIS.at(w).M1))) == 0


def _slope(x, y):
    return np.polyfit(np.log(x), np.log(np.abs(y)), 1)[0]


def test_momentum_threshold_exponents():
    w = np.geomspace(1e-6, 1e-4, 7)
    vals = [BASIS.channels[j].values(w.astype(complex)) for j in range(2)]
    assert abs(_slope(w, vals[0].p) - 0.25) < 0.01
    p1_0 = BASIS.channels[1].values(np.array([0j])).p[0]
    assert abs(_slope(w, vals[1].p - p1_0) - 0.5) < 0.01


def test_constructor_guards():
    with pytest.raises(ValueError):
        RectangularChannel(-1)
