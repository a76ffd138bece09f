"""Sturmian orthogonality, eigenvalue condition and branch continuity."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from threshold_passage.sturmian import (
    RectangularBasis,
    ZeroRangeBasis,
    couplings_finite_difference,
    overlap_quadrature,
    residual_r4,
    rho_zero_range,
)

BASIS = RectangularBasis((0, 1, 2))
real_omega = st.floats(-60.0, 60.0).filter(lambda w: abs(w) > 1e-3)
upper_omega = st.builds(complex, st.floats(-30.0, 30.0), st.floats(1e-3, 10.0))


@settings(max_examples=25, deadline=None)
@given(w=st.one_of(real_omega, upper_omega), m=st.integers(0, 2), n=st.integers(0, 2))
def test_orthonormal_with_weight(w, m, n):
    val = overlap_quadrature(BASIS, m, n, w, w)
    assert abs(val - (1.0 if m == n else 0.0)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(w=st.one_of(real_omega, upper_omega))
def test_eigenvalue_condition(w):
    for ch in BASIS.channels:
        v = ch.values(np.array([w], dtype=complex))
        assert residual_r4(v.P, v.k)[0] < 1e-9


@settings(max_examples=25, deadline=None)
@given(w=real_omega, j=st.integers(0, 2))
def test_continuity_from_upper_half_plane(w, j):
    ch = BASIS.channels[j]
    on_axis = ch.rho(np.array([w]))[0]
    near = ch.rho(np.array([w + 1e-9j]))[0]
    assert abs(near - on_axis) < 1e-6


@pytest.mark.parametrize("j", [0, 1, 2])
def test_continuity_through_threshold(j):
    ch = BASIS.channels[j]
    eps = np.array([1e-4, 1e-6, 1e-8])
    jump = np.abs(ch.rho(eps) - ch.rho(-eps))
    # the square-root branch point closes like sqrt(eps)
    assert np.all(jump < 5 * np.sqrt(eps))
    assert np.all(np.diff(jump) < 0)


def test_scalar_path_matches_vector_path():
    for w in (-12.3, -0.01, 0.02, 7.5, 3.0 + 0.4j):
        pt = BASIS.at(w)
        rho = BASIS.rho(w).ravel()
        assert np.max(np.abs(pt.rho - rho)) < 1e-12


@settings(max_examples=8, deadline=None)
@given(w=st.one_of(st.floats(-20.0, -0.5), st.floats(0.5, 20.0)))
def test_closed_form_couplings_match_quadrature(w):
    pt = BASIS.at(w)
    M1, M2 = couplings_finite_difference(BASIS, w)
    assert np.max(np.abs(pt.M1 - M1)) < 1e-6 * max(1.0, np.max(np.abs(M1)))
    assert np.max(np.abs(pt.M2 - M2)) < 1e-5 * max(1.0, np.max(np.abs(M2)))


@settings(max_examples=30, deadline=None)
@given(w=st.one_of(real_omega, upper_omega))
def test_zero_range_strength(w):
    rho = rho_zero_range(w)
    k = np.sqrt(complex(2 * w)) if isinstance(w, complex) else None
    if k is not None:
        assert abs(rho - 1j * k) < 1e-12
    elif w < 0:
        assert abs(rho - (-math.sqrt(-2 * w))) < 1e-12
    else:
        assert abs(rho - 1j * math.sqrt(2 * w)) < 1e-12
    assert ZeroRangeBasis().at(w).M2[0, 0] == 0
