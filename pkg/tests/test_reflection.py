import numpy as np
import pytest

from threshold_passage.errors import ChannelBudgetExceeded
from threshold_passage.reflection import (
    ReflectionSystem,
    integrate_backward,
    solve_coupled,
    solve_single_sturmian,
    survival,
    write_trajectory_csv,
    zero_range_system,
)
from threshold_passage.sturmian import RectangularBasis
from threshold_passage.threshold import universal_constant
from threshold_passage.trap import TrapSpec, box_spec, zero_range_spec


@pytest.mark.parametrize("rate", [0.05, 1.0, 20.0])
def test_universal_rule(rate):
    p = survival(integrate_backward(zero_range_system(0.0, rate=rate))).P_stay[0, 0]
    assert abs(p - universal_constant()) < 1e-6


def test_gamma_limits():
    assert solve_single_sturmian(zero_range_spec(-3.0)).P_stay[0, 0] > 0.99
    assert solve_single_sturmian(zero_range_spec(3.0)).P_stay[0, 0] < 0.02


def test_scaling_invariance():
    rng = np.random.default_rng(7)
    for _ in range(10):
        gamma = rng.uniform(-2, 2)
        mu1, v1, mu2, v2 = rng.uniform(0.3, 3.0, 4)
        e1 = gamma * v1**0.4 / mu1**0.4
        e2 = gamma * v2**0.4 / mu2**0.4
        p1 = solve_single_sturmian(TrapSpec("zero_range", mu1, e1, v1)).P_stay[0, 0]
        p2 = solve_single_sturmian(TrapSpec("zero_range", mu2, e2, v2)).P_stay[0, 0]
        assert abs(p1 - p2) < 1e-6


def test_linear_in_initial_normalisation():
    from scipy.integrate import solve_ivp

    from threshold_passage.reflection import Segment, _decaying_start, _rhs_factory

    system = ReflectionSystem(RectangularBasis((0, 1)), 0.0, 1.0)
    seg = Segment("line", 0.0, 3.5, 4.0, -1.0)  # stays clear of omega = 0
    rhs = _rhs_factory(system, seg, 2)
    Y0 = _decaying_start(system, 4.0).ravel()
    ends = [solve_ivp(rhs, (0.0, 3.5), c * Y0, method="DOP853", rtol=1e-11, atol=1e-14).y[:, -1]
            for c in (1.0, 2.0)]
    assert np.max(np.abs(ends[1] - 2 * ends[0])) < 1e-9 * np.max(np.abs(ends[1]))


def test_flux_only_decreases_along_integration():
    traj = integrate_backward(zero_range_system(0.0), record=True)
    w = np.linspace(traj.omega_max * 0.9, 0.2, 200)  # descending: integration order
    Y = traj.sample(w)
    flux = np.imag(np.conj(Y[:, 0]) * Y[:, 1])
    assert np.all(np.diff(flux) <= 1e-12 * np.max(np.abs(flux)))


def test_rectangular_adiabatic_and_escape():
    assert solve_single_sturmian(box_spec("rectangular", -4.0, 0.05)).P_stay[0, 0] > 0.95
    assert solve_single_sturmian(box_spec("rectangular", 4.0, 0.05)).P_stay[0, 0] < 0.05


def test_M2_term_visible_at_moderate_rate():
    diffs = [abs(solve_single_sturmian(box_spec("rectangular", 0.0, v), with_M2=True).P_stay[0, 0]
                 - solve_single_sturmian(box_spec("rectangular", 0.0, v), with_M2=False).P_stay[0, 0])
             for v in (1.0, 10.0, 40.0)]
    assert max(diffs) > 1e-3


def test_single_channel_coupled_equals_single_path():
    spec = box_spec("rectangular", 0.0, 2.0)
    a = solve_coupled(spec, 0, 1).P_stay[0, 0]
    b = solve_single_sturmian(spec, 0, with_M2=True).P_stay[0, 0]
    assert abs(a - b) < 1e-12


def test_excited_states_scoop_population():
    res = solve_coupled(box_spec("rectangular", 0.0, 10.0), 0, 3)
    assert res.P_total[0] > res.probability(0, 0) + 0.02


def test_coupling_matters_at_large_rate():
    spec = box_spec("rectangular", 0.0, 200.0)
    coupled = solve_coupled(spec, 0, 4).probability(0, 0)
    single = solve_single_sturmian(spec).probability(0, 0)
    assert abs(coupled - single) > 1e-3


def test_channel_budget():
    with pytest.raises(ChannelBudgetExceeded):
        solve_coupled(box_spec("rectangular", 0.0, 1.0), 0, 9)
    with pytest.raises(ChannelBudgetExceeded):
        solve_coupled(box_spec("rectangular", 0.0, 1.0), 3, 2)


def test_record_and_csv(tmp_path):
    res = solve_single_sturmian(box_spec("rectangular", 0.0, 1.0), 0)
    rec = res.as_record(shape="rectangular")
    assert rec["P_0_0"] == res.probability(0, 0)
    traj = integrate_backward(ReflectionSystem(RectangularBasis((0,)), 0.0, 1.0), record=True)
    path = tmp_path / "b.csv"
    write_trajectory_csv(path, traj, np.linspace(-2, 2, 5), header={"rate": 1.0})
    lines = path.read_text().splitlines()
    assert lines[0] == "# rate=1.0" and lines[1].startswith("omega,ReB_0,ImB_0")
    assert len(lines) == 7
