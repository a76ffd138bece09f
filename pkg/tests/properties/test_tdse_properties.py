"""Crank-Nicolson unitarity, convergence order, absorber quality and bookkeeping."""

import math

import numpy as np
import pytest

from threshold_passage.tdse import GridConfig, _scales, build_grid, evolve
from threshold_passage.trap import box_spec, zero_range_spec


def _packet(grid, x0, sigma, k):
    psi = np.exp(-((grid.x - x0) ** 2) / (2 * sigma**2) + 1j * k * grid.x)
    grid.psi = psi.astype(complex)
    grid.psi /= math.sqrt(grid.norm())
    return grid


def test_norm_conserved_without_absorber_or_well():
    spec = zero_range_spec(0.0)
    g = build_grid(spec, -8.0, GridConfig(absorber=False))
    _packet(g, 3.0, 1.0, 1.0)
    n0 = g.norm()
    for _ in range(1000):
        g.step(0.01, 0.0)
    assert abs(g.norm() - n0) < 1e-10


@pytest.mark.parametrize("spec", [zero_range_spec(0.0), box_spec("rectangular", 0.0, 1.0)])
def test_unitary_full_run_without_absorber(spec):
    trace, _ = evolve(spec, config=GridConfig(absorber=False, frames=50))
    assert np.max(np.abs(trace.norm - 1.0)) < 1e-8


@pytest.mark.parametrize("kfac", [0.5, 1.0, 2.0])
def test_absorber_reflection(kfac):
    spec = zero_range_spec(0.0)
    e_scale, _, _ = _scales(spec)
    k0 = math.sqrt(2 * e_scale)
    lam = 2 * math.pi / k0
    g = build_grid(spec, -8.0, GridConfig(length=60 * lam))
    x0 = 30 * lam
    k = kfac * k0
    _packet(g, x0, 5 * lam, k)
    dt = min(0.05, 0.2 / k**2)
    for _ in range(int(2.5 * (g.x[-1] - x0) / k / dt)):
        g.step(dt, 0.0)
    inside = g.x < g.absorber_start
    left = 2 * np.sum(g.d[inside] * np.abs(g.psi[inside]) ** 2)
    assert left < 1e-6


def test_second_order_in_time():
    spec = zero_range_spec(0.0)
    P = [evolve(spec, config=GridConfig(time_refine=r, step_phase=2.0, frames=10))[1].P_stay[0, 0]
         for r in (1, 2, 4)]
    ratio = (P[0] - P[1]) / (P[1] - P[2])
    assert 3.0 < ratio < 5.0


def test_probability_bookkeeping_and_bounds():
    trace, res = evolve(box_spec("rectangular", 0.0, 10.0))
    P = np.nan_to_num(trace.populations, nan=0.0)
    assert np.all(P >= 0) and np.all(P <= 1 + 1e-8)
    assert trace.norm[-1] >= res.P_total[0] - 1e-3
    assert np.all(np.diff(trace.norm) <= 1e-12)


def test_existence_mask_for_positive_offset():
    trace, _ = evolve(zero_range_spec(1.0))
    t = trace.times
    exists = trace.exists[:, 0]
    assert np.all(exists[np.abs(t) > 1.0 + 1e-12])
    assert not np.any(exists[np.abs(t) < 1.0 - 1e-12])


def test_state_count_grows_as_well_deepens():
    trace, _ = evolve(box_spec("rectangular", 0.0, 10.0))
    before = trace.times < 0
    count = trace.exists[before].sum(axis=1)
    assert np.all(np.diff(count) <= 0)  # fewer states as the well flattens toward t = 0
    assert count[0] >= 2
