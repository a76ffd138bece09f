"""Reflection solver: the omega-space amplitude equations and their WKB analysis.

The time-dependent problem is mapped onto the amplitudes B_n(omega) of the
Sturmian expansion, which obey

    B_m'' + sum_n (2 M1_mn B_n' + M2_mn B_n) + (E - rho_m(omega)) B_m / v^2 = 0.

For omega > 0 the strengths rho_m are complex ("absorbing"); the physical
solution decays as omega -> +inf. It is integrated backward from omega_max
along a contour that leaves the real axis on a small half circle in the
upper half plane, where all coefficients are analytic, and is decomposed at
omega_min into incoming and outgoing semiclassical waves

    B ~ a_in q^(-1/2) exp(-i Phi/v) + a_out q^(-1/2) exp(+i Phi/v),
    Phi = int_{omega_0}^{omega} q,  q = sqrt(E - rho).

The retention probability is |a_out/a_in|^2. The equation is integrated for
B itself; the amplitudes of the complex-conjugate system used in the usual
scattering bookkeeping are ``A_plus = conj(a_in)`` and ``A_minus = conj(a_out)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .errors import ChannelBudgetExceeded, FitDegenerate, StiffnessFailure
from .sturmian import RectangularBasis, ZeroRangeBasis

RTOL = 1e-10
ATOL = 1e-14
WKB_TOL = 5e-4
COUPLING_TOL = 1e-2
DECAY_TARGET = 40.0   # e-folds of suppression of the unwanted branch
PIECE_GROWTH = 8.0    # e-folds per piece before renormalizing
FIT_WAVELENGTHS = 2.0
FIT_SAMPLES = 96
WINDOW_SHIFT = 0.2
WINDOW_TOL = 1e-4
FIT_TOL = 1e-3


def _principal_sqrt(z):
    return np.sqrt(np.asarray(z, dtype=complex))


@dataclass
class ReflectionSystem:
    """Amplitude equations for one energy offset and rate.

    ``basis`` supplies rho_n, d rho_n/d omega and the coupling matrices at any
    complex omega. ``omega_min``/``omega_max`` and the detour radius are
    chosen automatically when left as None.
    """

    basis: object
    energy: float
    rate: float
    include_M2_diagonal: bool = True
    include_couplings: bool = True
    omega_min: float | None = None
    omega_max: float | None = None
    detour: float | None = None
    rtol: float = RTOL
    atol: float = ATOL
    wkb_tol: float = WKB_TOL

    @property
    def n_channels(self):
        return self.basis.n_channels

    def _needs_M(self):
        return self.include_couplings or self.include_M2_diagonal

    def coefficients(self, omega):
        """(rho, drho, M1, M2) with the coupling flags applied."""
        pt = self.basis.at(omega, couplings=self._needs_M())
        M1, M2 = pt.M1, pt.M2
        if not self.include_couplings:
            M1 = np.zeros_like(M1)
            M2 = np.diag(np.diag(M2)) if self.include_M2_diagonal else np.zeros_like(M2)
        elif not self.include_M2_diagonal:
            M2 = M2 - np.diag(np.diag(M2))
        return pt.rho, pt.drho, M1, M2

    def q(self, omega):
        """Principal local momenta sqrt(E - rho_n(omega))."""
        rho = self.basis.at(omega, couplings=False).rho
        return _principal_sqrt(self.energy - rho)

    def epsilon(self, omega):
        """WKB validity |v q'/q^2| per channel."""
        pt = self.basis.at(omega, couplings=False)
        q = _principal_sqrt(self.energy - pt.rho)
        return self.rate * np.abs(pt.drho) / (2 * np.abs(q) ** 3)

    def derivative(self, omega, Y):
        """dY/d omega for the stacked state Y = [B; B'] (2N x K)."""
        n = self.n_channels
        rho, _, M1, M2 = self.coefficients(omega)
        B, D = Y[:n], Y[n:]
        dD = -(2 * M1 @ D + M2 @ B) - ((self.energy - rho) / self.rate**2)[:, None] * B
        return np.vstack([D, dD])


# -- contour ---------------------------------------------------------------

@dataclass
class Segment:
    """omega(s) = start + direction * s for lines, r e^(i s) for the arc."""

    kind: str
    s0: float
    s1: float
    start: complex = 0.0
    direction: complex = -1.0
    radius: float = 0.0

    def omega(self, s):
        if self.kind == "arc":
            return self.radius * np.exp(1j * s)
        return self.start + self.direction * s

    def domega(self, s):
        if self.kind == "arc":
            return 1j * self.radius * np.exp(1j * s)
        return self.direction


def contour(omega_max, omega_min, radius):
    """Backward path: real line to +r, upper half circle, real line to omega_min."""
    if radius <= 0:
        return [Segment("line", 0.0, omega_max - omega_min, omega_max, -1.0)]
    return [
        Segment("line", 0.0, omega_max - radius, omega_max, -1.0),
        Segment("arc", 0.0, math.pi, radius=radius),
        Segment("line", 0.0, -radius - omega_min, -radius, -1.0),
    ]


@dataclass
class Piece:
    segment: Segment
    s0: float
    s1: float
    dense: object
    transform: np.ndarray  # R factor applied at the end of this piece


@dataclass
class Trajectory:
    """Backward solution; columns are independent solutions (QR-renormalized)."""

    system: ReflectionSystem
    pieces: list
    Y_end: np.ndarray
    omega_end: float
    omega_max: float
    fit_piece: Piece
    steps: int

    def coefficient_chain(self, c_end):
        """Coefficients of the solution Y_end @ c_end in every piece's basis."""
        cs = [None] * len(self.pieces)
        c = np.asarray(c_end, dtype=complex)
        for i in range(len(self.pieces) - 1, -1, -1):
            cs[i] = c
            c = np.linalg.solve(self.pieces[i - 1].transform, c) if i > 0 else c
        return cs

    def sample(self, omega, c_end=None):
        """B at real omega values (outside the detour) for the solution Y_end @ c_end."""
        if c_end is None:
            c_end = np.ones(self.Y_end.shape[1])
        cs = self.coefficient_chain(c_end)
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        n = self.system.n_channels
        out = np.full((len(omega), 2 * n), np.nan + 0j)
        for i, piece in enumerate(self.pieces):
            seg = piece.segment
            if seg.kind != "line" or piece.dense is None:
                continue
            w_hi = (seg.start + seg.direction * piece.s0).real
            w_lo = (seg.start + seg.direction * piece.s1).real
            sel = (omega <= w_hi) & (omega >= w_lo) & np.isnan(out[:, 0].real)
            if not np.any(sel):
                continue
            s = (omega[sel] - seg.start.real) / seg.direction.real
            Y = piece.dense(s).reshape(2 * n, -1, len(s))
            out[sel] = np.einsum("ikt,k->ti", Y, cs[i])
        return out


def _rhs_factory(system, segment, K):
    n = system.n_channels

    def rhs(s, y):
        w = segment.omega(s)
        Y = y.reshape(2 * n, K)
        return (segment.domega(s) * system.derivative(w, Y)).ravel()

    return rhs


def _growth_rate(system, omega):
    q = system.q(omega)
    return float(np.max(np.abs(q.imag))) / system.rate


def natural_scale(system):
    """omega range of the threshold interaction, ~ v^(4/5) in scaled units."""
    m = getattr(system.basis, "mass", 1.0)
    return system.rate**0.8 * m**0.2


def choose_omega_max(system, target=DECAY_TARGET):
    """Smallest omega with int_0^omega max|Im q|/v >= target (and above the wells)."""
    w, acc = 0.0, 0.0
    h = 0.05 * natural_scale(system)
    while acc < target:
        mid = w + 0.5 * h
        acc += _growth_rate(system, mid) * h
        w += h
        h *= 1.1
    # stay beyond any real-axis turning point of the excited channels
    return w


def _coupling_ratio(system, omega):
    if not (system.include_couplings and system.n_channels > 1):
        return 0.0
    rho, _, M1, M2 = system.coefficients(omega)
    q = _principal_sqrt(system.energy - rho)
    v = system.rate
    worst = 0.0
    for m in range(system.n_channels):
        for n in range(system.n_channels):
            if m == n:
                continue
            gap = abs(q[m] ** 2 - q[n] ** 2)
            worst = max(worst, v * v * (2 * abs(q[n] * M1[m, n]) / v + abs(M2[m, n])) / gap)
    return worst


def turning_points(system):
    """Real omega < 0 where E - rho_n(omega) changes sign, per channel (None if absent)."""
    out = []
    for n in range(system.n_channels):
        def f(w, n=n):
            return float((system.energy - system.basis.at(w, couplings=False).rho[n]).real)

        lo, hi = -1e-12, -natural_scale(system)
        if f(lo) >= 0.0:
            out.append(None)
            continue
        while f(hi) < 0.0:
            lo, hi = hi, 2 * hi
            if hi < -1e7:
                raise StiffnessFailure("no classically allowed region found", hi)
        out.append(brentq(f, hi, lo, xtol=1e-13, rtol=1e-14))
    return out


def choose_omega_min(system, turning=None):
    """Most asymptotic-side edge of the fit window satisfying the WKB checks."""
    if turning is None:
        turning = turning_points(system)
    edge = min([t for t in turning if t is not None] + [0.0])
    w = min(2.0 * edge, edge - natural_scale(system))
    for _ in range(400):
        span = _window_span(system, w)
        near = w + (1 + WINDOW_SHIFT) * span
        if near < edge and np.all(system.epsilon(near) < system.wkb_tol) \
                and _coupling_ratio(system, near) < COUPLING_TOL:
            return w - WINDOW_SHIFT * span
        w *= 1.15
    raise StiffnessFailure("could not reach the semiclassical region", w)


def _window_span(system, omega):
    q = np.abs(system.q(omega))
    return FIT_WAVELENGTHS * 2 * math.pi * system.rate / float(np.min(q))


def _pieces_for(system, segment, K):
    """Split a segment into pieces of bounded exponential growth."""
    if segment.kind == "arc":
        return [segment.s0, segment.s1]
    n_probe = 200
    s = np.linspace(segment.s0, segment.s1, n_probe + 1)
    rates = np.array([_growth_rate(system, segment.omega(x)) for x in 0.5 * (s[1:] + s[:-1])])
    if K > 1:
        q = [np.abs(system.q(segment.omega(x)).imag) for x in 0.5 * (s[1:] + s[:-1])]
        rates = np.array([float(np.ptp(x)) / system.rate + r for x, r in zip(q, rates)])
    cum = np.concatenate([[0.0], np.cumsum(rates * np.diff(s))])
    n_pieces = max(1, int(math.ceil(cum[-1] / PIECE_GROWTH)))
    marks = np.interp(np.linspace(0, cum[-1], n_pieces + 1), cum, s) if cum[-1] > 0 \
        else np.array([segment.s0, segment.s1])
    marks[0], marks[-1] = segment.s0, segment.s1
    return list(np.unique(marks))


def _decaying_start(system, omega_max):
    """Columns seeded on the decaying WKB branch of each channel."""
    n = system.n_channels
    v = system.rate
    rho, drho, _, _ = system.coefficients(omega_max)
    q = _principal_sqrt(system.energy - rho)
    q = np.where(q.imag > 0, -q, q)  # exp(-i q omega/v) must decay
    dq = -drho / (2 * q)
    Y = np.zeros((2 * n, n), dtype=complex)
    for j in range(n):
        b = q[j] ** -0.5
        Y[j, j] = b
        Y[n + j, j] = (-1j * q[j] / v - dq[j] / (2 * q[j])) * b
    return Y / np.linalg.norm(Y, axis=0)


def integrate_backward(system, record=False, fit_span=None):
    """Integrate from omega_max to omega_min along the upper-half-plane detour.

    Returns a Trajectory; ``record`` keeps dense output for every piece.
    """
    n = system.n_channels
    omega_max = system.omega_max or choose_omega_max(system)
    turning = turning_points(system)
    omega_min = system.omega_min if system.omega_min is not None \
        else choose_omega_min(system, turning)
    radius = system.detour if system.detour is not None \
        else min(0.1 * natural_scale(system), 0.5 * omega_max)
    if fit_span is None:
        fit_span = (1 + 2 * WINDOW_SHIFT) * _window_span(system, omega_min + _window_span(system, omega_min))
    Y = _decaying_start(system, omega_max)
    K = Y.shape[1]
    segs = contour(omega_max, omega_min, radius)
    pieces = []
    steps = 0
    for seg in segs:
        marks = _pieces_for(system, seg, K)
        if seg is segs[-1] and seg.kind == "line":
            last = seg.s1 - fit_span
            marks = [m for m in marks if m < last] + [last, seg.s1]
        rhs = _rhs_factory(system, seg, K)
        for a, b in zip(marks[:-1], marks[1:]):
            if b <= a:
                continue
            final_piece = seg is segs[-1] and b == marks[-1]
            sol = solve_ivp(rhs, (a, b), Y.ravel(), method="DOP853", rtol=system.rtol,
                            atol=system.atol, dense_output=record or final_piece)
            if sol.status != 0:
                raise StiffnessFailure(f"integration stalled: {sol.message}",
                                       complex(seg.omega(sol.t[-1])))
            steps += sol.t.size - 1
            Yb = sol.y[:, -1].reshape(2 * n, K)
            Q, R = np.linalg.qr(Yb)
            pieces.append(Piece(seg, a, b, sol.sol if (record or final_piece) else None, R))
            Y = Q
    # undo the last QR so Y_end matches the final dense piece
    R_last = pieces[-1].transform
    Y_end = Y @ R_last
    pieces[-1].transform = np.eye(K, dtype=complex)
    return Trajectory(system, pieces, Y_end, omega_min, omega_max, pieces[-1], steps)


# -- semiclassical decomposition ------------------------------------------

@dataclass
class SurvivalResult:
    """Retention probabilities P_stay[i][j]: from state rows[i] into labels[j].

    ``rows`` defaults to ``labels`` (square matrix, one row per initial state).
    """

    labels: tuple
    energy: float
    rate: float
    A_plus: np.ndarray
    A_minus: np.ndarray
    P_stay: np.ndarray
    P_total: np.ndarray
    loss: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    rows: tuple | None = None

    def __post_init__(self):
        if self.rows is None:
            self.rows = tuple(self.labels)

    def probability(self, m=0, n=0):
        """P_stay from state m into state n, by label."""
        return float(self.P_stay[self.rows.index(m), self.labels.index(n)])

    def as_record(self, **inputs):
        """Flat dict: inputs, P matrix entries, totals and fit diagnostics."""
        rec = dict(inputs)
        rec.update(energy=self.energy, rate=self.rate)
        for i, m in enumerate(self.rows):
            for j, n in enumerate(self.labels):
                rec[f"P_{m}_{n}"] = float(self.P_stay[i, j])
            rec[f"P_total_{m}"] = float(self.P_total[i])
            rec[f"loss_{m}"] = float(self.loss[i])
        for key, val in self.diagnostics.items():
            if np.isscalar(val):
                rec[key] = val
        return rec


def phase_reference(system, n, turning):
    t = turning[n]
    return t if t is not None else 0.0


def _phase_integral(system, n, a, b):
    """int_a^b q_n along the real axis (a, b < 0)."""
    def re(w):
        return float(system.q(w)[n].real)

    val, _ = quad(re, a, b, limit=400, epsabs=1e-13, epsrel=1e-13)
    return val


def _wkb_design(system, omegas, phi0, omega_ref):
    """Per channel: f_in, f_out and derivatives at the sample points."""
    n = system.n_channels
    v = system.rate
    rho = np.empty((len(omegas), n), dtype=complex)
    drho = np.empty_like(rho)
    M1 = np.empty((len(omegas), n, n), dtype=complex)
    M2 = np.empty_like(M1)
    for i, w in enumerate(omegas):
        rho[i], drho[i], M1[i], M2[i] = system.coefficients(w)
    q2 = system.energy - rho + v * v * np.einsum("tnn->tn", M2)
    q = np.sqrt(q2.real.astype(complex))  # real on the allowed side
    dq = -drho / (2 * q)
    # phase relative to omega_ref by Gauss-Legendre on each subinterval
    x, wts = np.polynomial.legendre.leggauss(8)
    phi = np.empty((len(omegas), n))
    edges = np.concatenate([[omega_ref], omegas])
    acc = phi0.copy()
    for i in range(len(omegas)):
        a, b = edges[i], edges[i + 1]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        qs = np.array([system.q(mid + half * xx).real for xx in x])
        acc = acc + half * (wts @ qs)
        phi[i] = acc
    amp = q ** -0.5
    f_out = amp * np.exp(1j * phi / v)
    f_in = amp * np.exp(-1j * phi / v)
    d_out = (1j * q / v - dq / (2 * q)) * f_out
    d_in = (-1j * q / v - dq / (2 * q)) * f_in
    return dict(q=q, f_in=f_in, f_out=f_out, d_in=d_in, d_out=d_out, M1=M1, M2=M2)


def _fit(system, design, B, D):
    """Joint least squares for (a_in, a_out) of every channel and column.

    Each channel's free waves also drive the others through the couplings;
    that first-order dressing is part of the model so residual coupling in
    the window does not bias the amplitudes.
    """
    n = system.n_channels
    v = system.rate
    q = design["q"]
    T = len(q)
    cols = []  # 2n unknowns: (in, out) per channel
    for c in range(n):
        for kind in ("in", "out"):
            f = design["f_" + kind][:, c]
            d = design["d_" + kind][:, c]
            sgn = -1.0 if kind == "in" else 1.0
            Bcol = np.zeros((T, n), dtype=complex)
            Dcol = np.zeros((T, n), dtype=complex)
            Bcol[:, c] = f
            Dcol[:, c] = d
            if system.include_couplings and n > 1:
                for m in range(n):
                    if m == c:
                        continue
                    gap = q[:, m] ** 2 - q[:, c] ** 2
                    beta = -v * v * (2j * sgn * q[:, c] / v * design["M1"][:, m, c]
                                     + design["M2"][:, m, c]) / gap
                    Bcol[:, m] = beta * f
                    Dcol[:, m] = beta * d
            scale = v / np.abs(q)
            cols.append(np.concatenate([Bcol.ravel(), (Dcol * scale).ravel()]))
    A = np.array(cols).T
    rhs = np.concatenate([B.reshape(T * n, -1), (D * (v / np.abs(q))[:, :, None]).reshape(T * n, -1)])
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > 1e10:
        raise FitDegenerate(f"WKB basis collinear over the window (cond {cond:.2e})")
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    resid = np.linalg.norm(A @ sol - rhs, axis=0) / np.linalg.norm(rhs, axis=0)
    a_in = sol[0::2]
    a_out = sol[1::2]
    return a_in, a_out, float(np.max(resid)), float(cond)


def _probabilities(a_in, a_out):
    """P[m, n] for unit incoming flux in channel m only."""
    coef = np.linalg.solve(a_in, np.eye(a_in.shape[0]))
    out = a_out @ coef
    return np.abs(out.T) ** 2, out


def decompose_wkb(traj, shift=0.0, samples=FIT_SAMPLES):
    """Fit the end of the trajectory to incoming/outgoing waves."""
    system = traj.system
    n = system.n_channels
    piece = traj.fit_piece
    seg = piece.segment
    w_far = (seg.start + seg.direction * piece.s1).real
    w_near = (seg.start + seg.direction * piece.s0).real
    total = w_near - w_far
    width = total / (1 + 2 * WINDOW_SHIFT)
    lo = w_far + (WINDOW_SHIFT + shift) * width
    omegas = np.linspace(lo + width, lo, samples)
    turning = turning_points(system)
    refs = np.array([phase_reference(system, c, turning) for c in range(n)])
    # phases at the first sample from per-channel references
    phi0 = np.array([_phase_integral(system, c, refs[c], omegas[0]) if refs[c] != omegas[0]
                     else 0.0 for c in range(n)])
    design = _wkb_design(system, omegas, phi0, omegas[0])
    # the first sample sits exactly at omega_ref: drop the zero-length step
    s = (omegas - seg.start.real) / seg.direction.real
    Y = piece.dense(s).reshape(2 * n, traj.Y_end.shape[1], samples)
    B = np.transpose(Y[:n], (2, 0, 1))
    D = np.transpose(Y[n:], (2, 0, 1))
    a_in, a_out, resid, cond = _fit(system, design, B, D)
    return a_in, a_out, resid, cond


def survival(traj):
    """SurvivalResult from a trajectory, with the window-shift stability check."""
    system = traj.system
    a_in, a_out, resid, cond = decompose_wkb(traj)
    P, out = _probabilities(a_in, a_out)
    spread = 0.0
    for shift in (-WINDOW_SHIFT, WINDOW_SHIFT):
        ai, ao, _, _ = decompose_wkb(traj, shift)
        spread = max(spread, float(np.max(np.abs(_probabilities(ai, ao)[0] - P))))
    n = system.n_channels
    A_minus = np.conj(out.T)
    A_plus = np.ones(n, dtype=complex)
    P_total = P.sum(axis=1)
    diagnostics = dict(
        fit_residual=resid,
        fit_condition=cond,
        window_spread=spread,
        window_stable=bool(spread <= WINDOW_TOL),
        omega_min=float(traj.omega_end),
        omega_max=float(traj.omega_max),
        steps=int(traj.steps),
        wkb_epsilon=float(np.max(system.epsilon(traj.omega_end))),
    )
    if n == 1:
        A_plus = np.conj(a_in[0])
        A_minus = np.conj(a_out[0])[None, :]
    return SurvivalResult(tuple(system.basis.labels), system.energy, system.rate,
                          np.atleast_1d(A_plus), A_minus, P, P_total, 1 - P_total,
                          diagnostics)


def solve(system, record=False):
    traj = integrate_backward(system, record=record)
    return survival(traj), traj


# -- problem-level entry points --------------------------------------------

def zero_range_system(gamma, rate=1.0, **kw):
    """Delta well with E = gamma in zero-range units (mu = v = 1 unless rate given)."""
    return ReflectionSystem(ZeroRangeBasis(), float(gamma), float(rate),
                            include_M2_diagonal=False, include_couplings=False, **kw)


def _basis_for(spec, channels):
    from .trap import RECTANGULAR, ZERO_RANGE

    if spec.shape == ZERO_RANGE:
        return ZeroRangeBasis(spec.mass)
    if spec.shape != RECTANGULAR:
        raise ValueError("Sturmian expansion is available for zero-range and rectangular wells")
    return RectangularBasis(channels)


def _scaled(spec):
    from .trap import to_scaled

    return to_scaled(spec)


def solve_single_sturmian(spec, m=0, with_M2=True, **kw):
    """Single-channel retention for state m; M2 is a no-op for the delta well."""
    s = _scaled(spec)
    basis = _basis_for(s, (m,))
    system = ReflectionSystem(basis, s.offset, s.rate, include_M2_diagonal=with_M2,
                              include_couplings=False, **kw)
    return survival(integrate_backward(system))


MAX_CHANNELS = 8


def solve_coupled(spec, m=0, n_channels=3, **kw):
    """Coupled even channels 0..n_channels-1; row m of the result is physical."""
    from .trap import RECTANGULAR

    if n_channels < 1:
        raise ValueError("n_channels must be >= 1")
    if n_channels > MAX_CHANNELS:
        raise ChannelBudgetExceeded(f"{n_channels} channels requested, at most {MAX_CHANNELS}")
    if m >= n_channels:
        raise ChannelBudgetExceeded(f"initial channel {m} outside the {n_channels} built")
    s = _scaled(spec)
    if s.shape != RECTANGULAR:
        raise ValueError("coupled channels need a rectangular well")
    basis = RectangularBasis(tuple(range(n_channels)))
    system = ReflectionSystem(basis, s.offset, s.rate, **kw)
    return survival(integrate_backward(system))


def write_trajectory_csv(path, traj, omegas, c_end=None, header=None):
    """omega, Re B_n, Im B_n per channel on the requested real omega grid."""
    Y = traj.sample(omegas, c_end)
    n = traj.system.n_channels
    with open(path, "w", newline="") as fh:
        for key, val in (header or {}).items():
            fh.write(f"# {key}={val}\n")
        w = csv.writer(fh)
        w.writerow(["omega"] + [f"{p}B_{c}" for c in traj.system.basis.labels for p in ("Re", "Im")])
        for om, row in zip(np.atleast_1d(omegas), Y):
            vals = []
            for c in range(n):
                vals += [f"{row[c].real:.12e}", f"{row[c].imag:.12e}"]
            w.writerow([f"{om:.12e}"] + vals)
