"""Threshold analytics: complex Hankel functions, the exact E = 0 solution of
the zero-range amplitude equation, the 38% constant and the scattering-length
pole model of a bound state crossing threshold.

Hankel functions are evaluated by region of |z|:

* ``|z| <= SERIES_RADIUS``: ascending series of J_(+-nu);
* ``SERIES_RADIUS < |z| <= ASYMPTOTIC_RADIUS``: Laguerre quadrature of the
  integral representation with kernel (1+iu/2z)^(nu-1/2), the u contour
  rotated away from the kernel singularity at u = 2iz;
* ``|z| > ASYMPTOTIC_RADIUS``: the Hankel asymptotic series, truncated at
  its smallest term.

Both integral and asymptotic forms are used for arg z in [-pi/2, pi]; the
remaining sector follows from the half-turn continuation
H1(w e^(-i pi)) = 2cos(nu pi) H1(w) + e^(-i nu pi) H2(w).

H2 is always obtained from H1 by H2_nu(z) = conj(H1_nu(conj z)) for real nu,
with the negative real axis taken as the limit from above.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_genlaguerre

from .errors import DomainError, FitWindowTooWide, NoBoundState

SERIES_RADIUS = 4.0
ASYMPTOTIC_RADIUS = 30.0
LAGUERRE_NODES = 96
THRESHOLD_ORDER = 0.4


# -- Hankel functions ------------------------------------------------------

def _bessel_j_series(nu, r, theta):
    """J_nu(r e^(i theta)) by its ascending series; theta fixes the branch."""
    half = 0.5 * r * cmath.exp(1j * theta)
    x = -half * half
    term = 1.0 / math.gamma(nu + 1) if nu + 1 > 0 or nu + 1 != int(nu + 1) else 0.0
    if nu + 1 <= 0 and nu + 1 == int(nu + 1):
        raise DomainError("integer order below zero in the series")
    total = term
    k = 0
    while True:
        k += 1
        term = term * x / (k * (k + nu))
        total += term
        if abs(term) <= 1e-17 * abs(total) and k > 4:
            break
        if k > 400:
            break
    return total * cmath.exp(nu * (math.log(0.5 * r) + 1j * theta))


def _h1_series(nu, r, theta):
    s = math.sin(nu * math.pi)
    if abs(s) < 1e-12:
        raise DomainError(f"integer order {nu:g} is not supported near the origin")
    jp = _bessel_j_series(nu, r, theta)
    jm = _bessel_j_series(-nu, r, theta)
    return (jm - cmath.exp(-1j * nu * math.pi) * jp) / (1j * s)


@lru_cache(maxsize=16)
def _laguerre(nu, n):
    x, w = roots_genlaguerre(n, nu - 0.5)
    return x, w / math.gamma(nu + 0.5)


def _h1_laguerre(nu, r, theta, n=LAGUERRE_NODES):
    """Integral representation along u = s e^(i beta)/cos(beta)."""
    z = r * cmath.exp(1j * theta)
    beta = min(max(0.5 * (theta - 0.25 * math.pi), -math.pi / 3), math.pi / 3)
    rot = cmath.exp(1j * beta) / math.cos(beta)
    s, w = _laguerre(nu, n)
    u = s * rot
    f = np.exp(s - u) * (1 + 1j * u / (2 * z)) ** (nu - 0.5)
    integral = np.sum(w * f) * rot ** (nu + 0.5)
    pref = cmath.sqrt(2 / (math.pi * r)) * cmath.exp(-0.5j * theta)
    return pref * cmath.exp(1j * (z - 0.5 * nu * math.pi - 0.25 * math.pi)) * integral


def _h1_asymptotic(nu, r, theta):
    z = r * cmath.exp(1j * theta)
    mu4 = 4 * nu * nu
    term = 1.0 + 0j
    total = term
    prev = abs(term)
    for k in range(1, 200):
        term = term * 1j * (mu4 - (2 * k - 1) ** 2) / (k * 8 * z)
        if abs(term) > prev:
            break
        total += term
        prev = abs(term)
        if prev < 1e-17 * abs(total):
            break
    pref = cmath.sqrt(2 / (math.pi * r)) * cmath.exp(-0.5j * theta)
    return pref * cmath.exp(1j * (z - 0.5 * nu * math.pi - 0.25 * math.pi)) * total


def _h1_direct(nu, r, theta):
    """H1 for theta in [-pi/2, pi] (or any theta near the origin)."""
    if r <= SERIES_RADIUS:
        return _h1_series(nu, r, theta)
    if r > ASYMPTOTIC_RADIUS:
        return _h1_asymptotic(nu, r, theta)
    return _h1_laguerre(nu, r, theta)


def _h1_polar(nu, r, theta):
    """H1_nu(r e^(i theta)) for nu >= 0 and theta in [-pi, pi]."""
    if r <= SERIES_RADIUS or theta >= -0.5 * math.pi:
        return _h1_direct(nu, r, theta)
    w = theta + math.pi
    c = math.cos(nu * math.pi)
    return 2 * c * _h1_direct(nu, r, w) + cmath.exp(-1j * nu * math.pi) * _h2_polar(nu, r, w)


def hankel_series(nu, kind, r, theta):
    """H^(kind)_nu(r e^(i theta)) from the J_(+-nu) series on any sheet of z.

    theta may lie outside [-pi, pi]; the series is single-valued in z^2, so
    the branch enters only through (z/2)^(+-nu). Intended for moderate r.
    """
    s = math.sin(nu * math.pi)
    if abs(s) < 1e-12:
        raise DomainError(f"integer order {nu:g} is not supported by the series")
    jp = _bessel_j_series(nu, r, theta)
    jm = _bessel_j_series(-nu, r, theta)
    sign = 1j if kind == 1 else -1j
    return (jm - cmath.exp(-sign * nu * math.pi) * jp) / (sign * s)


def _h2_polar(nu, r, theta):
    return _h1_polar(nu, r, -theta).conjugate()


def _polar(z):
    z = complex(z)
    r = abs(z)
    if r == 0.0:
        raise DomainError("Hankel functions are singular at z = 0")
    theta = math.atan2(z.imag, z.real)
    if z.imag == 0.0 and z.real < 0:
        theta = math.pi  # negative real axis: limit from above
    return r, theta


def hankel_polar(nu, kind, r, theta):
    """H^(kind)_nu(r e^(i theta)) with the branch fixed by theta in [-pi, pi]."""
    if r <= 0:
        raise DomainError("Hankel functions are singular at z = 0")
    if kind not in (1, 2):
        raise ValueError("kind must be 1 or 2")
    nu = float(nu)
    phase = 1.0
    if nu < 0:
        # H1_(-nu) = e^(i nu pi) H1_nu, H2_(-nu) = e^(-i nu pi) H2_nu
        nu = -nu
        phase = cmath.exp((1j if kind == 1 else -1j) * nu * math.pi)
    h = _h1_polar(nu, r, theta) if kind == 1 else _h2_polar(nu, r, theta)
    return phase * h


def hankel(nu, kind, z):
    """Principal-branch Hankel function H^(kind)_nu(z) for real order nu."""
    r, theta = _polar(z)
    return hankel_polar(nu, kind, r, theta)


def hankel_derivative(nu, kind, z):
    """dH_nu/dz = H_(nu-1) - (nu/z) H_nu."""
    z = complex(z)
    return hankel(nu - 1, kind, z) - nu / z * hankel(nu, kind, z)


def hankel_method_gap(nu, z):
    """Largest relative disagreement between the evaluation methods usable at z.

    Series and Laguerre quadrature are compared on the inner overlap band,
    Laguerre and asymptotic series on the outer one.
    """
    r, theta = _polar(z)
    if theta < -0.5 * math.pi:
        raise DomainError("method comparison is defined for arg z >= -pi/2")
    nu = abs(float(nu))
    values = []
    if r <= 1.5 * SERIES_RADIUS:
        values.append(_h1_series(nu, r, theta))
    if 0.75 * SERIES_RADIUS <= r:
        values.append(_h1_laguerre(nu, r, theta))
    if r >= 0.8 * ASYMPTOTIC_RADIUS:
        values.append(_h1_asymptotic(nu, r, theta))
    if len(values) < 2:
        return 0.0
    ref = values[-1]
    return max(abs(v - ref) for v in values[:-1]) / abs(ref)


def wronskian_residual(nu, z):
    """Relative deviation of W[H1, H2](z) from -4i/(pi z)."""
    z = complex(z)
    h1, h2 = hankel(nu, 1, z), hankel(nu, 2, z)
    d1, d2 = hankel_derivative(nu, 1, z), hankel_derivative(nu, 2, z)
    exact = -4j / (math.pi * z)
    return abs(h1 * d2 - d1 * h2 - exact) / abs(exact)


def connection_residual(rho, nu=THRESHOLD_ORDER):
    """|H1(z') - 2cos(nu pi) H1(z) - e^(-i nu pi) H2(z)| for z' = rho e^(3i pi/4).

    z = z' e^(i pi) = rho e^(7i pi/4) lies beyond the principal sheet, so the
    right side comes from the ascending series with arg z = 7 pi/4 while the
    left side uses the principal-branch evaluator.
    """
    lhs = hankel_polar(nu, 1, rho, 0.75 * math.pi)
    h1 = hankel_series(nu, 1, rho, 1.75 * math.pi)
    h2 = hankel_series(nu, 2, rho, 1.75 * math.pi)
    rhs = 2 * math.cos(nu * math.pi) * h1 + cmath.exp(-1j * nu * math.pi) * h2
    return abs(lhs - rhs)


# -- exact threshold solution ----------------------------------------------

def universal_constant():
    """Retention probability 4 cos^2(2 pi/5) = (3 - sqrt 5)/2 at threshold."""
    return (3 - math.sqrt(5)) / 2


def threshold_argument_scale(rate=1.0, mass=1.0):
    """Modulus factor of z = scale e^(3 i pi/4) omega^(5/4)."""
    return 2**2.25 / (5 * rate * mass**0.25)


def analytic_threshold_solution(omega, rate=1.0, mass=1.0):
    """Decaying solution sqrt(omega) H1_(2/5)(z) of B'' - i sqrt(2 omega/mu) B/v^2 = 0.

    For omega < 0 the solution is continued through the upper half omega
    plane, where z reaches R e^(2 i pi) and
    H1(R e^(2i pi)) = -H1(R) - 2cos(2pi/5) e^(-2i pi/5) H2(R).
    Accepts scalars or arrays of real omega.
    """
    omega_arr = np.asarray(omega, dtype=float)
    scale = threshold_argument_scale(rate, mass)
    nu = THRESHOLD_ORDER
    out = np.empty(omega_arr.shape, dtype=complex)
    c = 2 * math.cos(nu * math.pi) * cmath.exp(-1j * nu * math.pi)
    for idx, w in np.ndenumerate(omega_arr):
        if w == 0.0:
            # limit sqrt(w) H1(z) as w -> 0 from the z^(-nu) term
            out[idx] = _threshold_value_at_zero(scale, nu)
            continue
        R = scale * abs(w) ** 1.25
        if w > 0:
            out[idx] = math.sqrt(w) * hankel_polar(nu, 1, R, 0.75 * math.pi)
        else:
            h1 = hankel_polar(nu, 1, R, 0.0)
            h2 = hankel_polar(nu, 2, R, 0.0)
            out[idx] = 1j * math.sqrt(-w) * (-h1 - c * h2)
    return out if out.ndim else complex(out)


def _threshold_value_at_zero(scale, nu):
    # only the J_(-nu) term of H1 survives, and sqrt(w) z^(-nu) is w-free
    zfac = scale * cmath.exp(0.75j * math.pi)
    return (0.5 * zfac) ** (-nu) / math.gamma(1 - nu) / (1j * math.sin(nu * math.pi))


# -- scattering-length pole model ------------------------------------------

@dataclass(frozen=True)
class ThresholdPoleModel:
    """Linear model kappa(rho) = C (rho0 - rho) near the threshold strength.

    ``rho`` is the (negative, attractive) strength multiplying W in box units
    and kappa = -phi'(a)/phi(a) is taken from the zero-energy even solution,
    so kappa > 0 while the state is bound. ``slope`` is C = |d kappa/d rho|.
    """

    index: int
    shape: str
    slope: float
    rho0: float
    window: float
    residual: float
    mass: float = 1.0

    def kappa(self, rho):
        return self.slope * (self.rho0 - np.asarray(rho, dtype=float))

    def scattering_length(self, rho):
        return -1.0 / self.kappa(rho)

    def rho_of_omega(self, omega):
        """Pole position rho0 + i sqrt(2 mu omega)/C on the physical sheet."""
        from .sturmian import sqrt_cut

        w = np.asarray(omega, dtype=complex)
        return self.rho0 + 1j * sqrt_cut(2 * self.mass * w) / self.slope

    def reduced_coefficient(self, rate):
        """c in B'' + c sqrt(omega) B = 0 for the conjugated amplitude."""
        return -1j * math.sqrt(2 * self.mass) / (self.slope * rate**2)


def zero_energy_log_derivative(shape, rho):
    """kappa(rho) = -phi'(a)/phi(a) of the even zero-energy solution in box units."""
    from .trap import RECTANGULAR, _interior_shot, box_spec

    rho = float(rho)
    if shape == RECTANGULAR:
        if rho > 0:
            p = math.sqrt(2 * rho)
            return -p * math.tanh(0.5 * p)
        p = math.sqrt(-2 * rho)
        return p * math.tan(0.5 * p)
    sol = _interior_shot(box_spec(shape, 0.0, 1.0), rho, 0.0)
    phi, dphi = sol.y[0, -1], sol.y[1, -1]
    return -dphi / phi


_THRESHOLD_ROOTS = {}


def threshold_strength(shape, m):
    """rho0 < 0 at which the m-th even state sits exactly at zero energy (box units)."""
    from scipy.optimize import brentq

    from .trap import RECTANGULAR, _interior_shot, box_spec

    if m == 0:
        return 0.0
    if shape == RECTANGULAR:
        return -2 * math.pi**2 * m * m
    spec = box_spec(shape, 0.0, 1.0)

    def slope_at_edge(rho):
        return _interior_shot(spec, rho, 0.0).y[1, -1]

    # roots found so far and the scan position, extended on demand
    roots, lo, f_lo = _THRESHOLD_ROOTS.get(shape, ([], -1e-6, None))
    if f_lo is None:
        f_lo = slope_at_edge(lo)
    while len(roots) < m:
        hi = lo - max(0.5, 0.02 * abs(lo))
        f_hi = slope_at_edge(hi)
        if f_lo * f_hi < 0:
            roots.append(brentq(slope_at_edge, hi, lo, xtol=1e-13, rtol=1e-14))
        lo, f_lo = hi, f_hi
        if lo < -1e5:
            raise NoBoundState(f"no threshold strength found for state {m}")
    _THRESHOLD_ROOTS[shape] = (roots, lo, f_lo)
    return roots[m - 1]


def fit_threshold_pole(shape, m=0, rel_window=0.05, tol=1e-3, n=21, max_shrink=6):
    """Fit kappa(rho) = C (rho0 - rho) around the threshold strength of state m.

    The window is |rho - rho0| <= rel_window max(|rho0|, 1); it is halved until
    the relative linearity residual drops below ``tol``.
    """
    rho0 = threshold_strength(shape, m)
    half = rel_window * max(abs(rho0), 1.0)
    for _ in range(max_shrink + 1):
        rho = rho0 + np.linspace(-half, half, n)
        kap = np.array([zero_energy_log_derivative(shape, r) for r in rho])
        slope, icpt = np.polyfit(rho - rho0, kap, 1)
        resid = float(np.max(np.abs(kap - (slope * (rho - rho0) + icpt)))
                      / np.max(np.abs(kap)))
        if resid < tol:
            return ThresholdPoleModel(m, shape, float(-slope), rho0, half, resid)
        half *= 0.5
    raise FitWindowTooWide(f"kappa(rho) not linear to {tol:g} near rho0={rho0:g} "
                           f"(residual {resid:.2e})")


class PoleBasis:
    """One-channel basis with rho(omega) from the pole model and no couplings.

    Driving the reflection solver with this basis at E = rho0 integrates the
    reduced threshold equation B'' + c sqrt(omega) B = 0.
    """

    n_channels = 1

    def __init__(self, model):
        self.model = model
        self.labels = (model.index,)
        self.mass = model.mass

    def rho(self, omega):
        return np.atleast_1d(self.model.rho_of_omega(omega))

    def at(self, omega, couplings=True):
        from .sturmian import BasisPoint, sqrt_cut

        s = complex(sqrt_cut(2 * self.model.mass * complex(omega)))
        rho = np.array([self.model.rho0 + 1j * s / self.model.slope])
        drho = np.array([1j * self.model.mass / (self.model.slope * s)])
        z = np.zeros((1, 1), dtype=complex)
        return BasisPoint(rho, drho, z, z)


def reduced_threshold_survival(model, rate, energy_shift=0.0, **kw):
    """Retention from the reduced equation for state ``model.index`` at E = rho0 + shift."""
    from .reflection import ReflectionSystem, integrate_backward, survival

    system = ReflectionSystem(PoleBasis(model), model.rho0 + energy_shift, float(rate),
                              include_M2_diagonal=False, include_couplings=False, **kw)
    return survival(integrate_backward(system))
