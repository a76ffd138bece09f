"""Trap potentials V(x, t) = (E - v^2 t^2) W(x), adiabatic bound states and scalings.

Sign convention: ``offset`` is the constant part of the strength multiplying
W(x) >= 0, so the well is attractive (and binds) while E - v^2 t^2 < 0.
For E < 0 the ground state turns before reaching threshold, for E = 0 it
touches threshold at t = 0, and for E > 0 it disappears for |t| < sqrt(E)/v.

Two dimensionless problems are used internally:

* zero-range units (mu = v = 1): ``gamma = E mu^(2/5) v^(-2/5)``, times in
  units of ``mu^(-1/5) v^(-4/5)`` and lengths in units of ``mu^(-3/5) v^(-2/5)``;
* box units for finite wells (mu = 1, half width 1/2, so W = 1 on |y| < 1/2
  for the rectangle): times in units of ``4 mu a^2`` and lengths of ``2a``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import NoBoundState

ZERO_RANGE = "zero_range"
RECTANGULAR = "rectangular"
PARABOLIC = "parabolic"
SHAPES = (ZERO_RANGE, RECTANGULAR, PARABOLIC)

# Start the passage once the tracked level lies this many threshold
# interaction scales (v^(4/5) mu^(1/5)) below the continuum.
START_DEPTH_FACTOR = 50.0


@dataclass(frozen=True)
class TrapSpec:
    """Physical definition of the quadratic passage."""

    shape: str
    mass: float = 1.0
    offset: float = 0.0
    rate: float = 1.0
    half_width: float | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if self.shape == ZERO_RANGE:
            if self.half_width not in (None, 0, 0.0):
                raise ValueError("zero-range well has no half width")
        elif self.half_width is None or not self.half_width > 0:
            raise ValueError(f"{self.shape} well needs a positive half_width")

    @property
    def is_distributional(self):
        """True when W(x) is the delta function (values of W are not pointwise)."""
        return self.shape == ZERO_RANGE

    def strength(self, t):
        """Time-dependent prefactor E - v^2 t^2."""
        t = np.asarray(t, dtype=float)
        return self.offset - self.rate**2 * t**2

    def profile(self, x):
        """Normalised shape W(x); raises for the zero-range well."""
        if self.shape == ZERO_RANGE:
            raise ValueError("W(x) = delta(x) has no pointwise values")
        return shape_profile(self.shape, self.half_width)(x)

    def cell_integral(self, lo, hi):
        """Integral of W over [lo, hi] (vectorised); exact for every shape."""
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        if self.shape == ZERO_RANGE:
            return ((lo <= 0.0) & (hi > 0.0)).astype(float)
        a = self.half_width
        clo = np.clip(lo, -a, a)
        chi = np.clip(hi, -a, a)
        if self.shape == RECTANGULAR:
            return np.maximum(chi - clo, 0.0) / (2 * a)
        return np.maximum(0.5 * (chi**3 - clo**3) / a**3, 0.0)


def shape_profile(shape, a) -> Callable:
    if shape == RECTANGULAR:
        def w(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x) <= a, 1.0 / (2 * a), 0.0)
    elif shape == PARABOLIC:
        # 1.5 x^2 / a^3 integrates to exactly one over [-a, a]
        def w(x):
            x = np.asarray(x, dtype=float)
            return np.where(np.abs(x) <= a, 1.5 * x**2 / a**3, 0.0)
    else:
        raise ValueError(f"no pointwise profile for {shape!r}")
    return w


def profile_norm(spec):
    """Numerical value of the integral of W(x); 1 for every supported shape."""
    if spec.shape == ZERO_RANGE:
        return 1.0
    a = spec.half_width
    w = spec.profile
    val, _ = quad(lambda x: float(w(x)), -a, a, epsabs=1e-13, epsrel=1e-13, limit=200)
    return val


def potential_at(spec, x, t):
    """V(x, t) = (E - v^2 t^2) W(x).

    For the zero-range well the delta function cannot be evaluated, so the
    prefactor E - v^2 t^2 multiplying delta(x) is returned instead
    (``spec.is_distributional`` is True).
    """
    g = spec.strength(t)
    if spec.shape == ZERO_RANGE:
        return g
    return g * spec.profile(x)


@dataclass(frozen=True)
class ScalingParams:
    gamma: float
    time_scale: float
    length_scale: float
    offset_box: float | None = None
    rate_box: float | None = None


def scaling(spec):
    """Dimensionless parameters of ``spec``.

    ``gamma`` and the two inverse scales refer to the zero-range scaling; the
    box-unit offset and rate (E-bar, v-bar) are filled in for finite wells.
    For a = 1/2 the box values reduce to 4 mu a^2 E and 8 mu^(3/2) a^3 v.
    """
    mu, e, v = spec.mass, spec.offset, spec.rate
    gamma = e * mu**0.4 / v**0.4
    params = ScalingParams(gamma, mu**0.2 * v**0.8, mu**0.6 * v**0.4)
    if spec.shape != ZERO_RANGE:
        a = spec.half_width
        params = replace(
            params,
            offset_box=2 * mu * a * e,
            rate_box=4 * math.sqrt(2) * mu**1.5 * a**2.5 * v,
        )
    return params


def to_scaled(spec):
    """Equivalent dimensionless spec (zero-range units or box units)."""
    s = scaling(spec)
    if spec.shape == ZERO_RANGE:
        return TrapSpec(ZERO_RANGE, 1.0, s.gamma, 1.0)
    return TrapSpec(spec.shape, 1.0, s.offset_box, s.rate_box, 0.5)


def box_spec(shape, offset, rate):
    """Finite well directly in box units (mu = 1, a = 1/2)."""
    return TrapSpec(shape, 1.0, float(offset), float(rate), 0.5)


def zero_range_spec(gamma):
    """Zero-range well in its own scaled units (mu = v = 1)."""
    return TrapSpec(ZERO_RANGE, 1.0, float(gamma), 1.0)


@dataclass(frozen=True)
class AdiabaticState:
    """Instantaneous even bound state.

    ``kind`` selects the closed form: "delta" uses ``decay``; "box" uses the
    interior wave number ``wavenumber`` and exterior ``decay``; "numeric"
    carries an interpolating callable in ``interior``.
    """

    index: int
    energy: float
    decay: float
    norm: float
    kind: str
    half_width: float = 0.0
    wavenumber: float = 0.0
    interior: Callable | None = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        if self.kind == "delta":
            return self.norm * np.exp(-self.decay * ax)
        a = self.half_width
        if self.kind == "box":
            inside = np.cos(self.wavenumber * x)
            edge = math.cos(self.wavenumber * a)
        else:
            inside = self.interior(np.minimum(ax, a))
            edge = float(self.interior(a))
        outside = edge * np.exp(-self.decay * (ax - a))
        return self.norm * np.where(ax <= a, inside, outside)


def bound_state_zero_range(spec, t):
    """Bound state of the delta well with strength E - v^2 t^2 < 0."""
    if spec.shape != ZERO_RANGE:
        raise ValueError("zero-range spec required")
    g = float(spec.strength(t))
    if g >= 0.0:
        raise NoBoundState(f"strength {g:g} >= 0 at t={t:g}: no bound state")
    kappa = -spec.mass * g
    energy = -spec.mass * g**2 / 2
    return AdiabaticState(0, energy, kappa, math.sqrt(kappa), "delta")


def _even_box_roots(u0):
    """Roots u of u tan u = sqrt(u0^2 - u^2) in increasing order."""
    roots = []
    j = 0
    while j * math.pi < u0:
        lo = j * math.pi
        hi = min(lo + math.pi / 2, u0)

        def f(u):
            return u * math.sin(u) - math.sqrt(max(u0 * u0 - u * u, 0.0)) * math.cos(u)

        if hi - lo < 1e-300:
            break
        flo, fhi = f(lo), f(hi)
        if flo == 0.0:
            roots.append(lo)
        elif flo * fhi < 0:
            roots.append(brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200))
        j += 1
    return roots


def bound_states_rectangular(spec, t):
    """All even bound states of the rectangular well at time t, deepest first."""
    if spec.shape != RECTANGULAR:
        raise ValueError("rectangular spec required")
    mu, a = spec.mass, spec.half_width
    depth = -float(spec.strength(t)) / (2 * a)
    if depth <= 0.0:
        raise NoBoundState(f"no well at t={t:g}")
    u0 = a * math.sqrt(2 * mu * depth)
    states = []
    for j, u in enumerate(_even_box_roots(u0)):
        kappa = math.sqrt(max(u0 * u0 - u * u, 0.0)) / a
        if kappa <= 0.0:
            continue
        p = u / a
        energy = -kappa**2 / (2 * mu)
        # |phi|^2 integral: interior a + sin(2pa)/2p, exterior cos^2(pa)/kappa
        n2 = a + math.sin(2 * u) / (2 * p) + math.cos(u) ** 2 / kappa
        states.append(AdiabaticState(j, energy, kappa, 1 / math.sqrt(n2), "box", a, p))
    if not states:
        raise NoBoundState(f"no even bound state at t={t:g}")
    return states


def _interior_shot(spec, g, energy, dense=False):
    """Integrate the even interior solution phi(0)=1, phi'(0)=0 to x = a."""
    mu, a, w = spec.mass, spec.half_width, spec.profile

    def rhs(x, y):
        return [y[1], 2 * mu * (g * float(w(x)) - energy) * y[0]]

    return solve_ivp(rhs, (0.0, a), [1.0, 0.0], method="DOP853", rtol=1e-12,
                     atol=1e-14, dense_output=dense)


def bound_states_numeric(spec, t, n_scan=400):
    """Even bound states of any finite well by shooting on the interior ODE."""
    if spec.shape == ZERO_RANGE:
        return [bound_state_zero_range(spec, t)]
    g = float(spec.strength(t))
    mu, a = spec.mass, spec.half_width
    if g >= 0.0:
        raise NoBoundState(f"no well at t={t:g}")
    vmin = g * float(np.max(spec.profile(np.linspace(-a, a, 2001))))

    def mismatch(e):
        sol = _interior_shot(spec, g, e)
        phi, dphi = sol.y[0, -1], sol.y[1, -1]
        kappa = math.sqrt(-2 * mu * e)
        return dphi + kappa * phi

    grid = -np.geomspace(-vmin, 1e-10 * -vmin, n_scan)
    vals = [mismatch(e) for e in grid]
    roots = []
    for e0, e1, f0, f1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if f0 * f1 < 0:
            roots.append(brentq(mismatch, e0, e1, xtol=1e-14 * max(1.0, abs(e0))))
    states = []
    for j, e in enumerate(sorted(roots)):
        sol = _interior_shot(spec, g, e, dense=True)
        kappa = math.sqrt(-2 * mu * e)
        interior = lambda x, s=sol: s.sol(x)[0]
        inner, _ = quad(lambda x: float(interior(x)) ** 2, 0.0, a, epsabs=1e-14, limit=200)
        n2 = 2 * inner + float(interior(a)) ** 2 / kappa
        states.append(AdiabaticState(j, e, kappa, 1 / math.sqrt(n2), "numeric", a,
                                     interior=interior))
    if not states:
        raise NoBoundState(f"no even bound state at t={t:g}")
    return states


def bound_states(spec, t):
    """Even adiabatic bound states for any shape, deepest first."""
    if spec.shape == ZERO_RANGE:
        return [bound_state_zero_range(spec, t)]
    if spec.shape == RECTANGULAR:
        return bound_states_rectangular(spec, t)
    return bound_states_numeric(spec, t)


def threshold_scale(spec):
    """Energy scale v^(4/5) mu^(1/5) of the threshold interaction."""
    return spec.rate**0.8 * spec.mass**0.2


def start_time(spec, m=0, factor=START_DEPTH_FACTOR):
    """Negative time at which level m lies ``factor`` threshold scales deep.

    Closed form for the delta well; for finite wells the time is grown
    geometrically until the actual level m is deep enough.
    """
    target = factor * threshold_scale(spec)
    mu, e, v = spec.mass, spec.offset, spec.rate
    if spec.shape == ZERO_RANGE:
        # mu (v^2 t^2 - E)^2 / 2 = target
        return -math.sqrt(max(e + math.sqrt(2 * target / mu), 0.0)) / v
    a = spec.half_width

    def level(t):
        try:
            states = bound_states(spec, t)
        except NoBoundState:
            return 0.0
        return states[m].energy if m < len(states) else 0.0

    t = -(math.sqrt(max(e, 0.0)) + 1.0 / math.sqrt(2 * mu * a)) / v
    while level(t) > -target:
        t *= 1.5
    return t
