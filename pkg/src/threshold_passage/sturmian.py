"""Sturmian eigenvalues rho_n(omega), eigenfunctions and coupling matrices.

All finite-well quantities are computed in box units: unit mass, half width
a = 1/2 and W(x) = 1 on |x| < 1/2.  A Sturmian is a solution of

    -S''/2 + rho W S = omega S,    S ~ exp(i k |x|),  k = sqrt(2 omega),

with the strength rho as eigenvalue.  The energy contour is the real axis
approached from above the cut of sqrt(omega) (positive real axis), so that
k > 0 for omega > 0 (outgoing) and k = i|k| for omega < 0 (decaying); any
complex omega with Im omega > 0 is also accepted, which is how the reflection
solver steps around the branch point at omega = 0.

Symmetric channels are labelled by their ordinal ``j`` among the even states
(so j = 1 is the second even state): as omega -> -inf the channel tends to the box level
cos((2j+1) pi x) with rho -> omega - (2j+1)^2 pi^2 / 2.

The eigenvalue condition p tan(p a) = -i k is solved for P = p^2, in which
it is analytic, as  P s(P) + i k c(P) = 0  with c = cos(sqrt(P) a) and
s = sin(sqrt(P) a)/sqrt(P).  P(k) is analytic in k through k = 0, so every
threshold singularity in omega enters only through k = sqrt(2 omega).
"""

from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContinuationFailure

A = 0.5  # half width in box units
OMEGA_GUARD = 1e-6


def sqrt_cut(z):
    """sqrt with the cut on the positive real axis, approached from above.

    Valid for Im z >= 0; a negative zero imaginary part is treated as +0.
    """
    z = np.asarray(z, dtype=complex)
    z = np.where(z.imag == 0.0, z.real + 0j, z)
    out = np.sqrt(z)
    return out


def momentum(omega, mass=1.0):
    """External momentum k = sqrt(2 mu omega) on the physical sheet."""
    return sqrt_cut(2 * mass * np.asarray(omega, dtype=complex))


def rho_zero_range(omega, mass=1.0):
    """Sturmian strength of the delta well, i sqrt(2 omega / mu)."""
    return 1j * sqrt_cut(2 * np.asarray(omega, dtype=complex) / mass)


# ---------------------------------------------------------------------------
# entire functions of P = p^2 and of z (sin z / z)

_SER = 16


def _series(u, coeffs):
    out = np.zeros_like(u)
    for c in reversed(coeffs):
        out = out * u + c
    return out


def _cs(P):
    """c(P), s(P) and their first two P-derivatives (a = 1/2)."""
    P = np.asarray(P, dtype=complex)
    u = A * A * P
    p = np.sqrt(P)
    small = np.abs(u) < 1.0
    safe_p = np.where(small, 1.0, p)
    safe_P = np.where(small, 1.0, P)
    c = np.cos(p * A)
    s = np.where(small, 0.0, np.sin(safe_p * A) / safe_p)
    # s(P) = a sum (-u)^k/(2k+1)!
    fact = [math.factorial(2 * k + 1) for k in range(_SER + 3)]
    s_ser = A * _series(-u, [1 / fact[k] for k in range(_SER)])
    s1_ser = -A**3 * _series(-u, [(k + 1) / fact[k + 1] for k in range(_SER)])
    s2_ser = A**5 * _series(-u, [(k + 2) * (k + 1) / fact[k + 2] for k in range(_SER)])
    s = np.where(small, s_ser, s)
    s1 = np.where(small, s1_ser, (A * c - s) / (2 * safe_P))
    c1 = -0.5 * A * s
    c2 = -0.5 * A * s1
    s2 = np.where(small, s2_ser, (A * c1 - 3 * s1) / (2 * safe_P))
    return c, c1, c2, s, s1, s2


def sinc_derivs(z):
    """F(z) = sin z / z with F' and F''."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1.0
    zs = np.where(small, 1.0, z)
    sn, cs = np.sin(zs), np.cos(zs)
    f = sn / zs
    f1 = (zs * cs - sn) / zs**2
    f2 = ((2 - zs**2) * sn - 2 * zs * cs) / zs**3
    w = z * z
    fact = [math.factorial(n) for n in range(40)]
    f_s = _series(-w, [1 / fact[2 * k + 1] for k in range(14)])
    f1_s = -z * _series(-w, [(2 * k + 2) / fact[2 * k + 3] for k in range(14)])
    f2_s = -_series(-w, [(2 * k + 2) * (2 * k + 1) / fact[2 * k + 3] for k in range(14)])
    return (np.where(small, f_s, f), np.where(small, f1_s, f1), np.where(small, f2_s, f2))


_S0 = [A / math.factorial(2 * k + 1) for k in range(_SER)]
_S1 = [-A**3 * (k + 1) / math.factorial(2 * k + 3) for k in range(_SER)]
_S2 = [A**5 * (k + 2) * (k + 1) / math.factorial(2 * k + 5) for k in range(_SER)]
_F0 = [1 / math.factorial(2 * k + 1) for k in range(14)]
_F1 = [-(2 * k + 2) / math.factorial(2 * k + 3) for k in range(14)]
_F2 = [-(2 * k + 2) * (2 * k + 1) / math.factorial(2 * k + 3) for k in range(14)]


def _horner(x, coeffs):
    out = 0j
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _cs1(P):
    """Scalar version of :func:`_cs` (cmath), used inside ODE right-hand sides."""
    u = A * A * P
    p = cmath.sqrt(P)
    c = cmath.cos(p * A)
    if abs(u) < 1.0:
        s = _horner(-u, _S0)
        s1 = _horner(-u, _S1)
        s2 = _horner(-u, _S2)
    else:
        s = cmath.sin(p * A) / p
        s1 = (A * c - s) / (2 * P)
        s2 = (-0.5 * A * A * s - 3 * s1) / (2 * P)
    return c, -0.5 * A * s, -0.5 * A * s1, s, s1, s2


def _sinc1(z):
    if abs(z) < 1.0:
        w = -z * z
        return _horner(w, _F0), z * _horner(w, _F1), _horner(w, _F2)
    sn, cs = cmath.sin(z), cmath.cos(z)
    return sn / z, (z * cs - sn) / z**2, ((2 - z * z) * sn - 2 * z * cs) / z**3


def _g(P, k):
    c, c1, _, s, s1, _ = _cs(P)
    return P * s + 1j * k * c, s + P * s1 + 1j * k * c1


def _newton(P, k, tol=1e-14, maxiter=40):
    P = np.array(P, dtype=complex)
    for _ in range(maxiter):
        g, dg = _g(P, k)
        step = g / dg
        P = P - step
        if np.all(np.abs(step) <= tol * (1 + np.abs(P))):
            return P, True
    return P, False


def _box_limit_guess(j, kappa):
    """Root of p tan(pa) = kappa for large kappa near ((2j+1) pi / 2a)."""
    u = (2 * j + 1) * math.pi / 2 / (1 + 1 / (kappa * A))
    return (u / A) ** 2


def residual_r4(P, k):
    """|tan(p a) + i k / p| for a root P (the untransformed condition)."""
    p = np.sqrt(np.asarray(P, dtype=complex))
    return np.abs(np.tan(p * A) + 1j * np.asarray(k) / p)


@dataclass(frozen=True)
class ChannelValues:
    """Sturmian data of one or more channels at a set of omegas."""

    omega: np.ndarray
    k: np.ndarray
    P: np.ndarray
    dP_dk: np.ndarray
    d2P_dk2: np.ndarray

    @property
    def p(self):
        return np.sqrt(self.P)

    @property
    def rho(self):
        return self.omega - self.P / 2

    @property
    def dP(self):
        return self.dP_dk / self.k

    @property
    def d2P(self):
        return self.d2P_dk2 / self.k**2 - self.dP_dk / self.k**3

    @property
    def drho(self):
        return 1 - self.dP / 2

    @property
    def dp(self):
        return self.dP / (2 * self.p)

    @property
    def d2p(self):
        p = self.p
        return self.d2P / (2 * p) - self.dP**2 / (4 * p**3)


class RectangularChannel:
    """Symmetric Sturmian branch ``j`` of the rectangular well (box units).

    The branch is tabulated once by predictor-corrector continuation in k,
    from the box limit at k = i kappa_max down the imaginary axis to k = 0 and
    out along the real axis to k_max.  Later evaluations interpolate this
    table and polish with Newton, so the object is immutable after
    construction.
    """

    def __init__(self, j, omega_span=2.0e4, step=0.05):
        if j < 0:
            raise ValueError("channel ordinal must be >= 0")
        self.j = int(j)
        self.label = self.j
        kmax = math.sqrt(2 * omega_span)
        self._imag = self._trace(1j, kmax, step)
        self._real = self._trace(1.0, kmax, step, start=self._imag[1][0])
        self._imag_lists = tuple(list(a) for a in self._imag)
        self._real_lists = tuple(list(a) for a in self._real)

    def _trace(self, direction, kmax, step, start=None):
        # imaginary axis is walked from kmax down to 0; real axis from 0 up
        if start is None:
            s, s_end, sign = kmax, 0.0, -1.0
            P0 = _box_limit_guess(self.j, kmax)
        else:
            s, s_end, sign = 0.0, kmax, 1.0
            P0 = start
        P, ok = _newton(P0, direction * s)
        if not ok:
            raise ContinuationFailure(f"channel {self.j}: no start root", last_good=None)
        ss, Ps, dPs = [s], [complex(P)], [complex(self._dP(P, direction * s))]
        h = step
        while sign * (s_end - s) > 1e-15:
            s_new = s + sign * min(h, abs(s_end - s))
            # Euler predictor along the path, then Newton corrector
            guess = Ps[-1] + dPs[-1] * direction * (s_new - s)
            P_new, ok = _newton(guess, direction * s_new, maxiter=8)
            jump = abs(P_new - guess)
            if not ok or jump > 0.05 * (1 + abs(Ps[-1])):
                h /= 2
                if h < 1e-10:
                    raise ContinuationFailure(
                        f"channel {self.j}: lost branch near k={direction * s}",
                        last_good=complex(direction * s),
                    )
                continue
            s = s_new
            ss.append(s)
            Ps.append(complex(P_new))
            dPs.append(complex(self._dP(P_new, direction * s)))
            if jump < 1e-4 * (1 + abs(P_new)):
                h = min(h * 1.5, 2.0)
        order = np.argsort(ss)
        return (np.asarray(ss)[order], np.asarray(Ps)[order], np.asarray(dPs)[order])

    @staticmethod
    def _dP(P, k):
        c, c1, c2, s, s1, s2 = _cs(P)
        gP = s + P * s1 + 1j * k * c1
        return -1j * c / gP

    def _guess(self, k):
        k = np.asarray(k, dtype=complex)
        out = np.empty_like(k)
        use_imag = np.abs(k.real) <= np.abs(k.imag)
        for axis, mask, coord in ((self._imag, use_imag, k.imag), (self._real, ~use_imag, k.real)):
            if not np.any(mask):
                continue
            s_tab, P_tab, dP_tab = axis
            x = np.clip(coord[mask], s_tab[0], s_tab[-1])
            i = np.clip(np.searchsorted(s_tab, x) - 1, 0, len(s_tab) - 2)
            s0, s1 = s_tab[i], s_tab[i + 1]
            h = s1 - s0
            t = (x - s0) / h
            unit = 1j if axis is self._imag else 1.0
            d0 = dP_tab[i] * unit * h
            d1 = dP_tab[i + 1] * unit * h
            h00 = 2 * t**3 - 3 * t**2 + 1
            h10 = t**3 - 2 * t**2 + t
            h01 = -2 * t**3 + 3 * t**2
            h11 = t**3 - t**2
            base = h00 * P_tab[i] + h10 * d0 + h01 * P_tab[i + 1] + h11 * d1
            slope = (6 * t**2 - 6 * t) * P_tab[i] / h + (3 * t**2 - 4 * t + 1) * d0 / h \
                + (-6 * t**2 + 6 * t) * P_tab[i + 1] / h + (3 * t**2 - 2 * t) * d1 / h
            on_axis = unit * x
            # step off the axis with the local derivative
            out[mask] = base + slope / unit * (k[mask] - on_axis)
        return out

    def solve_P(self, k):
        k = np.asarray(k, dtype=complex)
        guess = self._guess(k)
        P, ok = _newton(guess, k)
        if not ok or np.any(np.abs(P - guess) > 0.5 + 0.05 * np.abs(guess)):
            P = self._continue_from_axis(k)
        return P

    def _continue_from_axis(self, k):
        flat = np.atleast_1d(k).ravel()
        out = np.empty_like(flat)
        for idx, kk in enumerate(flat):
            base = complex(kk.real, 0.0) if abs(kk.real) > abs(kk.imag) else complex(0.0, kk.imag)
            P = complex(self._guess(np.array([base]))[0])
            P, ok = _newton(P, base)
            n = max(4, int(abs(kk - base) / 0.02) + 1)
            for t in np.linspace(0, 1, n + 1)[1:]:
                kt = base + t * (kk - base)
                P, ok = _newton(P, kt)
                if not ok:
                    raise ContinuationFailure(f"channel {self.j}: no root at k={kt}",
                                              last_good=complex(kt))
            out[idx] = P
        return out.reshape(np.shape(k))

    def _guess1(self, k):
        if abs(k.real) <= abs(k.imag):
            s_tab, P_tab, dP_tab = self._imag_lists
            x, unit = k.imag, 1j
        else:
            s_tab, P_tab, dP_tab = self._real_lists
            x, unit = k.real, 1.0
        x = min(max(x, s_tab[0]), s_tab[-1])
        i = min(max(bisect.bisect_right(s_tab, x) - 1, 0), len(s_tab) - 2)
        h = s_tab[i + 1] - s_tab[i]
        t = (x - s_tab[i]) / h
        p0, p1 = P_tab[i], P_tab[i + 1]
        d0, d1 = dP_tab[i] * unit * h, dP_tab[i + 1] * unit * h
        base = (2 * t**3 - 3 * t**2 + 1) * p0 + (t**3 - 2 * t**2 + t) * d0 \
            + (-2 * t**3 + 3 * t**2) * p1 + (t**3 - t**2) * d1
        slope = ((6 * t**2 - 6 * t) * (p0 - p1) + (3 * t**2 - 4 * t + 1) * d0
                 + (3 * t**2 - 2 * t) * d1) / h
        return base + slope / unit * (k - unit * x)

    def scalar(self, omega):
        """(k, P, dP/dk, d2P/dk2) at one omega; fast path for ODE right-hand sides."""
        omega = complex(omega)
        if omega.imag == 0.0:
            omega = complex(omega.real, 0.0)
        k = cmath.sqrt(2 * omega)
        guess = self._guess1(k)
        P = guess
        for _ in range(40):
            c, c1, c2, s, s1, s2 = _cs1(P)
            gP = s + P * s1 + 1j * k * c1
            step = (P * s + 1j * k * c) / gP
            P -= step
            if abs(step) <= 1e-14 * (1 + abs(P)):
                break
        else:
            P = complex(self._continue_from_axis(np.array([k]))[0])
        if abs(P - guess) > 0.5 + 0.05 * abs(guess):
            P = complex(self._continue_from_axis(np.array([k]))[0])
        c, c1, c2, s, s1, s2 = _cs1(P)
        gP = s + P * s1 + 1j * k * c1
        gPP = 2 * s1 + P * s2 + 1j * k * c2
        dP = -1j * c / gP
        d2P = -(gPP * dP * dP + 2j * c1 * dP) / gP
        return k, P, dP, d2P

    def values(self, omega):
        omega = np.asarray(omega, dtype=complex)
        k = momentum(omega)
        P = self.solve_P(k)
        c, c1, c2, s, s1, s2 = _cs(P)
        gP = s + P * s1 + 1j * k * c1
        gPP = 2 * s1 + P * s2 + 1j * k * c2
        dP = -1j * c / gP
        d2P = -(gPP * dP**2 + 2j * c1 * dP) / gP
        return ChannelValues(omega, k, P, dP, d2P)

    def rho(self, omega):
        return self.values(omega).rho


def _pair_G(pm, pn):
    """G(pm, pn) and its first two pn-derivatives; broadcasting."""
    fp, fp1, fp2 = sinc_derivs((pm + pn) * A)
    fm, fm1, fm2 = sinc_derivs((pm - pn) * A)
    O = 0.5 * (fp + fm)
    O1 = 0.5 * A * (fp1 - fm1)
    O2 = 0.5 * A * A * (fp2 + fm2)
    Nm = 0.5 * (1 + sinc_derivs(2 * A * pm)[0])
    fn, fn1, fn2 = sinc_derivs(2 * A * pn)
    Nn = 0.5 * (1 + fn)
    Nn1 = A * fn1
    Nn2 = 2 * A * A * fn2
    inv = 1 / np.sqrt(Nm * Nn)
    G = O * inv
    G1 = (O1 - O * Nn1 / (2 * Nn)) * inv
    G2 = (O2 - O1 * Nn1 / Nn + O * (0.75 * Nn1**2 / Nn**2 - 0.5 * Nn2 / Nn)) * inv
    return G, G1, G2


def _pair_G1(pm, pn, diagonal):
    """Scalar dG/dp_n and d2G/dp_n^2; the first vanishes on the diagonal."""
    fp, fp1, fp2 = _sinc1((pm + pn) * A)
    fm, fm1, fm2 = _sinc1((pm - pn) * A)
    O = 0.5 * (fp + fm)
    O1 = 0.5 * A * (fp1 - fm1)
    O2 = 0.5 * A * A * (fp2 + fm2)
    Nm = 0.5 * (1 + _sinc1(2 * A * pm)[0])
    fn, fn1, fn2 = _sinc1(2 * A * pn)
    Nn = 0.5 * (1 + fn)
    Nn1 = A * fn1
    Nn2 = 2 * A * A * fn2
    inv = 1 / cmath.sqrt(Nm * Nn)
    G1 = 0j if diagonal else (O1 - O * Nn1 / (2 * Nn)) * inv
    G2 = (O2 - O1 * Nn1 / Nn + O * (0.75 * Nn1**2 / Nn**2 - 0.5 * Nn2 / Nn)) * inv
    return G1, G2


def norm_factor(P):
    """(cos p x | cos p x) in box units: (1 + sin p / p) / 2."""
    return 0.5 * (1 + sinc_derivs(np.sqrt(np.asarray(P, dtype=complex)))[0])


@dataclass(frozen=True)
class CouplingMatrices:
    omega: complex
    M1: np.ndarray
    M2: np.ndarray
    singular: bool


@dataclass(frozen=True)
class BasisPoint:
    """Everything the reflection ODE needs at one omega."""

    rho: np.ndarray
    drho: np.ndarray
    M1: np.ndarray
    M2: np.ndarray


class ZeroRangeBasis:
    """The single Sturmian of the delta well; couplings vanish identically."""

    n_channels = 1
    labels = (0,)
    mass = 1.0

    def __init__(self, mass=1.0):
        self.mass = mass

    def rho(self, omega):
        return np.atleast_1d(rho_zero_range(omega, self.mass))

    def at(self, omega, couplings=True):
        k = momentum(omega, self.mass)
        rho = np.array([1j * k / self.mass])
        drho = np.array([1j / k])
        z = np.zeros((1, 1), dtype=complex)
        return BasisPoint(rho, drho, z, z)

    def sturmian(self, x, omega, n=0):
        """S_0(x, omega) = exp(i k |x|), so S_0(0) = 1."""
        k = momentum(omega, self.mass)
        return np.exp(1j * k * np.abs(np.asarray(x, dtype=float)))


class RectangularBasis:
    """Symmetric rectangular-well Sturmians ``j`` in ``channels`` (box units)."""

    mass = 1.0

    def __init__(self, channels=(0, 1, 2), omega_span=2.0e4):
        self.channels = tuple(RectangularChannel(j, omega_span) for j in channels)
        self.n_channels = len(self.channels)
        self.labels = tuple(ch.label for ch in self.channels)

    def values(self, omega):
        return [ch.values(omega) for ch in self.channels]

    def rho(self, omega):
        return np.array([ch.rho(omega) for ch in self.channels])

    def coupling_matrices(self, omega, guard=OMEGA_GUARD):
        vals = [ch.values(np.asarray([omega], dtype=complex)) for ch in self.channels]
        M1, M2 = _couplings(vals)
        return CouplingMatrices(complex(omega), M1[..., 0], M2[..., 0],
                                bool(abs(omega) < guard))

    def at(self, omega, couplings=True):
        n = self.n_channels
        omega = complex(omega)
        rho = np.empty(n, dtype=complex)
        drho = np.empty(n, dtype=complex)
        p = [0j] * n
        dp = [0j] * n
        d2p = [0j] * n
        for i, ch in enumerate(self.channels):
            k, P, Pk, Pkk = ch.scalar(omega)
            Pw = Pk / k
            Pww = Pkk / k**2 - Pk / k**3
            rho[i] = omega - P / 2
            drho[i] = 1 - Pw / 2
            pi = cmath.sqrt(P)
            p[i] = pi
            dp[i] = Pw / (2 * pi)
            d2p[i] = Pww / (2 * pi) - Pw * Pw / (4 * pi**3)
        M1 = np.zeros((n, n), dtype=complex)
        M2 = np.zeros((n, n), dtype=complex)
        if couplings:
            for a in range(n):
                for b in range(n):
                    g1, g2 = _pair_G1(p[a], p[b], a == b)
                    M1[a, b] = g1 * dp[b]
                    M2[a, b] = g1 * d2p[b] + g2 * dp[b] ** 2
        return BasisPoint(rho, drho, M1, M2)

    def sturmian(self, x, omega, n=0):
        """S_n(x, omega): cos(p x)/sqrt(N) inside, outgoing/decaying outside."""
        ch = self.channels[n]
        v = ch.values(np.asarray([omega], dtype=complex))
        p, k = v.p[0], v.k[0]
        nf = np.sqrt(norm_factor(v.P[0]))
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        inside = np.cos(p * x) / nf
        edge = np.cos(p * A) / nf
        return np.where(ax <= A, inside, edge * np.exp(1j * k * (ax - A)))


def _couplings(vals):
    """M1, M2 (shape N x N x npts) from closed-form G derivatives."""
    p = np.array([v.p for v in vals])
    dp = np.array([v.dp for v in vals])
    d2p = np.array([v.d2p for v in vals])
    pm = p[:, None, :]
    pn = p[None, :, :]
    _, G1, G2 = _pair_G(pm, pn)
    n = len(vals)
    eye = np.eye(n, dtype=bool)[:, :, None]
    # (S_m|S_m) = 1 for all omega, so dG/dp_n vanishes on the diagonal
    G1 = np.where(eye, 0.0, G1)
    M1 = G1 * dp[None, :, :]
    M2 = G1 * d2p[None, :, :] + G2 * dp[None, :, :] ** 2
    return M1, M2


def overlap_quadrature(basis, m, n, omega_m, omega_n, nodes=96):
    """(S_m(omega_m) | S_n(omega_n)) by Gauss-Legendre quadrature over the well."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = A * x
    w = A * w
    sm = basis.sturmian(x, omega_m, m)
    sn = basis.sturmian(x, omega_n, n)
    return np.sum(w * sm * sn)


def couplings_finite_difference(basis, omega, h=None):
    """M1, M2 from central differences of the quadrature overlap in omega'."""
    n = basis.n_channels
    if h is None:
        h = 1e-3 * max(abs(omega), 1e-3)
    M1 = np.zeros((n, n), dtype=complex)
    M2 = np.zeros((n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            f = [overlap_quadrature(basis, a, b, omega, omega + d * h) for d in (-2, -1, 0, 1, 2)]
            M1[a, b] = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
            M2[a, b] = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return M1, M2
