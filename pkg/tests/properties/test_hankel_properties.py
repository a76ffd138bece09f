"""Hankel evaluator: Wronskian, symmetry, closed forms and region overlaps."""

import cmath
import math

import numpy as np
import scipy.special as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from threshold_passage.threshold import (
    ASYMPTOTIC_RADIUS,
    SERIES_RADIUS,
    hankel,
    hankel_method_gap,
    wronskian_residual,
)

modulus = st.floats(0.05, 80.0)
angle = st.floats(-math.pi / 2 + 1e-6, math.pi - 1e-6)
order = st.sampled_from([0.4, 0.25, 1.3, 0.5])


def _z(r, th):
    return r * cmath.exp(1j * th)


@settings(max_examples=80, deadline=None)
@given(r=modulus, th=angle, nu=order)
def test_wronskian(r, th, nu):
    assert wronskian_residual(nu, _z(r, th)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(r=modulus, th=angle, nu=order)
def test_against_scipy(r, th, nu):
    z = _z(r, th)
    for kind, ref in ((1, sp.hankel1), (2, sp.hankel2)):
        exact = ref(nu, z)
        assert abs(hankel(nu, kind, z) - exact) <= 1e-10 * abs(exact) + 1e-300


@settings(max_examples=40, deadline=None)
@given(r=modulus, th=st.floats(1e-6, math.pi / 2))
def test_conjugation_symmetry(r, th):
    z = _z(r, th)
    assert abs(hankel(0.4, 2, z) - np.conj(hankel(0.4, 1, np.conj(z)))) <= 1e-12 * abs(hankel(0.4, 2, z))


@settings(max_examples=40, deadline=None)
@given(r=modulus, th=angle)
def test_half_order_closed_form(r, th):
    z = _z(r, th)
    exact = -1j * cmath.sqrt(2 / (math.pi * z)) * cmath.exp(1j * z)
    assert abs(hankel(0.5, 1, z) - exact) <= 1e-12 * max(abs(exact), 1e-300) * 10


@settings(max_examples=30, deadline=None)
@given(th=angle, where=st.sampled_from([SERIES_RADIUS, ASYMPTOTIC_RADIUS]))
def test_overlap_bands_agree(th, where):
    assert hankel_method_gap(0.4, _z(where, th)) < 1e-8
