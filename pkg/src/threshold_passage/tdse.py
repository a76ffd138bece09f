"""Direct Crank-Nicolson integration of i psi_t = -psi_xx/2mu + (E - v^2 t^2) W(x) psi.

Only the even sector is evolved, on a half line x >= 0 with a symmetry
condition at the origin. The grid is non-uniform: a fine uniform core that
resolves the deepest bound state (with nodes on the well edges), a
geometrically coarsening region, and a quadratic complex absorbing potential
at the far end. Space is discretised by the finite-volume form

    i d_i psi_i' = sum_j K_ij psi_j,   K = T + g(t) diag(w_i) - i diag(eta_i d_i),

with d_i the dual-cell lengths and w_i the exact cell integrals of W, so a
delta well enters through its jump condition psi'(0+) = mu g psi(0). With
the absorber off K is real symmetric and the scheme conserves sum d |psi|^2.
Populations are projections on the discrete bound states of the same
operator, so the initial state is an exact eigenvector of the grid problem.

All runs use the scaled units of :func:`trap.to_scaled`.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.linalg.lapack import zgtsv

from .errors import GridUnderResolved, NoBoundState
from .reflection import SurvivalResult
from .trap import ZERO_RANGE, bound_states, start_time, to_scaled

ZERO_RANGE_START = -8.0
STEP_PHASE = 0.5          # max |E| dt at the deepest level
STEPS_PER_TIME_SCALE = 40
CORE_NODES_PER_WELL = 40
ABSORBER_WAVELENGTHS = 15.0
ABSORBER_POWER = 2
SELF_CHECK_TOL = 0.005


@dataclass(frozen=True)
class GridConfig:
    """Numerical parameters; None picks a default from the problem scales."""

    core_step: float | None = None
    growth: float = 1.02
    max_step: float | None = None
    length: float | None = None
    absorber: bool = True
    absorber_width: float | None = None
    absorber_strength: float | None = None
    max_dt: float | None = None
    step_phase: float = STEP_PHASE
    frames: int = 200
    refine: float = 1.0   # divides every spatial step
    time_refine: float = 1.0  # divides every time step


@dataclass
class GridState:
    """Wave function on the half-line grid at time t."""

    x: np.ndarray
    d: np.ndarray
    w: np.ndarray
    eta: np.ndarray
    off: np.ndarray
    kin: np.ndarray
    psi: np.ndarray
    t: float
    mass: float = 1.0
    delta: bool = False
    absorber_start: float = math.inf

    @property
    def n(self):
        return len(self.x)

    def norm(self):
        """Full-line norm (both halves)."""
        return 2.0 * float(np.sum(self.d * np.abs(self.psi) ** 2))

    def hamiltonian(self, g, absorber=True):
        """Tridiagonal (diag, off) of K at strength g."""
        diag = self.kin + g * self.w
        if absorber:
            diag = diag - 1j * self.eta * self.d
        return diag, self.off

    def step(self, dt, g):
        """One Crank-Nicolson step with K evaluated at strength g."""
        diag, off = self.hamiltonian(g)
        c = 0.5j * dt
        rhs = (self.d - c * diag) * self.psi
        rhs[:-1] -= c * off * self.psi[1:]
        rhs[1:] -= c * off * self.psi[:-1]
        lo = (c * off).astype(complex)
        _, _, _, sol, info = zgtsv(lo.copy(), (self.d + c * diag).astype(complex), lo.copy(),
                                   rhs[:, None])
        if info != 0:
            raise RuntimeError(f"tridiagonal solve failed (info={info})")
        self.psi = sol[:, 0]
        self.t += dt

    def bound_states(self, g, count):
        """Lowest ``count`` eigenpairs of the Hermitian part, normalised to 1."""
        diag, off = self.hamiltonian(g, absorber=False)
        s = 1 / np.sqrt(self.d)
        a = diag.real * s * s
        b = off * s[:-1] * s[1:]
        count = min(count, self.n)
        vals, vecs = eigh_tridiagonal(a, b, select="i", select_range=(0, count - 1))
        phi = vecs * s[:, None] / math.sqrt(2.0)
        return vals, phi

    def project(self, phi):
        return 2.0 * (self.d * self.psi) @ phi


def _scales(spec):
    """Energy, length and time scales of the threshold region (scaled units)."""
    mu, v = spec.mass, spec.rate
    energy = v**0.8 * mu**0.2
    length = mu**-0.6 * v**-0.4
    return energy, length, 1.0 / energy


def default_times(spec, m=0):
    if spec.shape == ZERO_RANGE:
        t0 = min(ZERO_RANGE_START, -math.sqrt(max(spec.offset, 0.0)) / spec.rate - 4.0)
    else:
        t0 = start_time(spec, m)
    return t0, -t0


def build_grid(spec, t_min, config=GridConfig()):
    """Half-line grid and operators for ``spec`` (already in scaled units)."""
    mu = spec.mass
    e_scale, ell, _ = _scales(spec)
    g_max = abs(float(spec.strength(t_min)))
    delta = spec.shape == ZERO_RANGE
    if delta:
        kappa = mu * g_max
        h0 = config.core_step or min(0.1 / kappa, 0.05 * ell)
        core = 0.0
        a = 0.0
    else:
        a = spec.half_width
        w_max = float(np.max(spec.profile(np.linspace(0, a, 201))))
        p_max = math.sqrt(2 * mu * g_max * w_max)
        h0 = config.core_step or min(a / CORE_NODES_PER_WELL, 0.25 / p_max, 0.05 * ell)
        core = a
    h0 /= config.refine
    k_out = 4 * math.sqrt(2 * mu * e_scale)
    h_max = (config.max_step or min(0.3 / k_out, 0.1 * ell)) / config.refine
    h_max = max(h_max, h0)
    length = config.length or max(50 * max(a, 0.5 * ell / 10), 10 * ell)
    k_abs = math.sqrt(2 * mu * e_scale)
    width = config.absorber_width or ABSORBER_WAVELENGTHS * 2 * math.pi / k_abs
    total = length + (width if config.absorber else 0.0)

    if core > 0:
        n_core = max(int(math.ceil(core / h0)), 1)
        xs = list(np.linspace(0.0, core, n_core + 1))
        h = core / n_core
    else:
        xs = [0.0]
        h = h0
    # a short uniform stretch beyond the edge before coarsening
    while xs[-1] < core + 5 * h0:
        xs.append(xs[-1] + h)
    while xs[-1] < total:
        h = min(h * config.growth, h_max)
        xs.append(xs[-1] + h)
    x = np.array(xs)
    hs = np.diff(x)
    d = np.empty_like(x)
    d[0] = 0.5 * hs[0]
    d[1:-1] = 0.5 * (hs[:-1] + hs[1:])
    d[-1] = 0.5 * hs[-1]
    lo = np.concatenate([[0.0], x[1:] - 0.5 * hs])
    hi = np.concatenate([x[:-1] + 0.5 * hs, [x[-1]]])
    if delta:
        w = np.zeros_like(x)
        w[0] = 0.5  # half of the unit weight at the origin
    else:
        w = spec.cell_integral(lo, hi)
    inv = 1 / hs
    kin = np.zeros_like(x)
    kin[:-1] += inv
    kin[1:] += inv
    kin /= 2 * mu
    kin[-1] += inv[-1] / (2 * mu)  # Dirichlet one cell beyond the last node
    off = -inv / (2 * mu)
    eta = np.zeros_like(x)
    if config.absorber:
        strength = config.absorber_strength or 2.0 * e_scale
        s = np.clip((x - length) / width, 0.0, None)
        eta = strength * s**ABSORBER_POWER
    return GridState(x, d, w, eta, off, kin, np.zeros_like(x, dtype=complex), t_min,
                     mu, delta, length)


def time_grid(spec, t_min, t_max, config=GridConfig()):
    """Step sequence with |E_deep| dt <= step_phase and dt <= time scale / 40."""
    mu = spec.mass
    _, _, t_scale = _scales(spec)
    dt_max = config.max_dt or t_scale / STEPS_PER_TIME_SCALE
    if spec.shape == ZERO_RANGE:
        def depth(t):
            return 0.5 * mu * float(spec.strength(t)) ** 2
    else:
        w_max = float(np.max(spec.profile(np.linspace(0, spec.half_width, 201))))

        def depth(t):
            return abs(float(spec.strength(t))) * w_max

    ts = [t_min]
    t = t_min
    while t < t_max:
        dt = min(dt_max, config.step_phase / max(depth(t), 1e-300))
        dt /= config.time_refine
        # symmetric sequence: mirror the steps about t = 0
        if t + dt >= 0.5 * (t_min + t_max):
            break
        t += dt
        ts.append(t)
    mid = 0.5 * (t_min + t_max)
    left = np.array(ts + [mid])
    right = (t_min + t_max) - left[::-1]
    return np.concatenate([left, right[1:]])


@dataclass
class PopulationTrace:
    """P_n(t) of the tracked even bound states; NaN where a state is absent."""

    times: np.ndarray
    populations: np.ndarray
    exists: np.ndarray
    norm: np.ndarray
    labels: tuple
    meta: dict = field(default_factory=dict)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            for key, val in self.meta.items():
                fh.write(f"# {key}={val}\n")
            w = csv.writer(fh)
            w.writerow(["tau"] + [f"P_{n}" for n in self.labels] + ["norm"])
            for i, t in enumerate(self.times):
                row = [f"{t:.10e}"]
                for j in range(len(self.labels)):
                    p = self.populations[i, j]
                    row.append("nan" if not self.exists[i, j] else f"{p:.12e}")
                row.append(f"{self.norm[i]:.12e}")
                w.writerow(row)


def track_bound_states(spec, t):
    """Even adiabatic bound states at time t, deepest first (empty if none)."""
    try:
        return bound_states(spec, t)
    except NoBoundState:
        return []


def _state_count(spec, t):
    """Number of even bound states, from the zero-energy threshold strengths."""
    from .threshold import threshold_strength

    g = float(spec.strength(t))
    if spec.shape == ZERO_RANGE:
        return 1 if g < 0 else 0
    # the dimensionless strength is mu a g; box units have mu a = 1/2
    g_box = 2 * spec.mass * spec.half_width * g
    n = 0
    while g_box < threshold_strength(spec.shape, n):
        n += 1
    return n


def evolve(spec, m=0, t_min=None, t_max=None, config=GridConfig(), tracked=None,
           self_check=False):
    """Evolve from the m-th even bound state; returns (trace, SurvivalResult).

    ``spec`` may be given in physical units; the run happens in scaled units
    and the trace times are scaled times. ``self_check`` repeats the run on
    a grid refined by two and raises GridUnderResolved on disagreement.
    """
    s = to_scaled(spec)
    d_min, d_max = default_times(s, m)
    t_min = d_min if t_min is None else t_min
    t_max = d_max if t_max is None else t_max
    n_final = _state_count(s, t_max)
    if tracked is None:
        tracked = max(n_final, m + 1)
    grid = build_grid(s, t_min, config)
    g0 = float(s.strength(t_min))
    vals, phi = grid.bound_states(g0, tracked)
    if not vals[m] < 0:
        raise NoBoundState(f"state {m} is not bound on the grid at t={t_min:g}")
    grid.psi = phi[:, m].astype(complex)
    times = time_grid(s, t_min, t_max, config)
    # frames evenly spaced in time; the steps crowd where the well is deep
    marks = np.linspace(t_min, t_max, max(config.frames, 1) + 1)[1:-1]
    next_mark = 0
    rec_t, rec_p, rec_e, rec_n = [], [], [], []

    def record():
        g = float(s.strength(grid.t))
        present = min(_state_count(s, grid.t), tracked)
        amp = np.zeros(tracked, dtype=complex)
        ex = np.zeros(tracked, dtype=bool)
        if present:
            # only the states that exist are needed; this dominates the run time
            ev, ph = grid.bound_states(g, present)
            amp[:present] = grid.project(ph)
            ex[:present] = ev < 0
        rec_t.append(grid.t)
        rec_p.append(np.where(ex, np.abs(amp) ** 2, np.nan))
        rec_e.append(ex)
        rec_n.append(grid.norm())
        return amp, ex

    record()
    for i in range(len(times) - 1):
        dt = times[i + 1] - times[i]
        grid.step(dt, float(s.strength(times[i] + 0.5 * dt)))
        grid.t = times[i + 1]
        if next_mark < len(marks) and grid.t >= marks[next_mark] and i + 1 < len(times) - 1:
            record()
            next_mark = np.searchsorted(marks, grid.t, side="right")
    amp, ex = record()
    trace = PopulationTrace(np.array(rec_t), np.array(rec_p), np.array(rec_e),
                            np.array(rec_n), tuple(range(tracked)))
    P = np.where(ex, np.abs(amp) ** 2, 0.0)
    meta = dict(shape=s.shape, offset=s.offset, rate=s.rate, initial=m, t_min=t_min,
                t_max=t_max, nodes=grid.n, steps=len(times) - 1,
                x_max=float(grid.x[-1]), absorber_start=grid.absorber_start,
                scheme="crank-nicolson", **{f"cfg_{k}": v for k, v in asdict(config).items()})
    trace.meta = meta
    diagnostics = dict(final_norm=float(rec_n[-1]), nodes=grid.n, steps=len(times) - 1)
    if self_check:
        fine = GridConfig(**{**asdict(config), "refine": 2 * config.refine})
        _, other = evolve(spec, m, t_min, t_max, fine, tracked)
        change = float(np.max(np.abs(other.P_stay - P[None, :])))
        diagnostics["refinement_change"] = change
        if change > SELF_CHECK_TOL:
            raise GridUnderResolved(f"doubling the grid changed P_stay by {change:.4f}")
    result = SurvivalResult(tuple(range(tracked)), s.offset, s.rate,
                            np.ones(1, dtype=complex), np.conj(amp)[None, :], P[None, :],
                            np.array([P.sum()]), np.array([1 - P.sum()]), diagnostics,
                            rows=(m,))
    return trace, result
