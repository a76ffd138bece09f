"""Acceptance suite: the ten end-to-end checks of the solver stack.

Each ``criterion_N`` returns a :class:`CriterionResult` carrying the measured
values; nothing here decides tolerances other than the stated ones.
"""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .sweep import evaluate_point
from .threshold import THRESHOLD_ORDER, universal_constant

P38 = universal_constant()


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        failed = [k for k, ok in self.checks.items() if not ok]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        return f"[{status}] criterion {self.number}: {self.title}{tail} [{self.seconds:.1f}s]"


def _result(number, title, checks, measured, t0):
    checks = {k: bool(v) for k, v in checks.items()}
    return CriterionResult(number, title, all(checks.values()), _clean(measured), checks,
                           time.perf_counter() - t0)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _log_fit(x, y):
    return float(np.polyfit(np.log(x), np.log(np.abs(y)), 1)[0])


# -- 1 ----------------------------------------------------------------------

def criterion_1(rates=(0.01, 0.1, 1.0, 10.0)):
    """Zero-range E = 0: P_stay = 0.38197 +- 1e-3 over three decades of v, < 1 min."""
    t0 = time.perf_counter()
    P = {v: evaluate_point("zero_range", "reflection-single", 0, 0.0, v)[0] for v in rates}
    dev = max(abs(p - 0.38197) for p in P.values())
    elapsed = time.perf_counter() - t0
    return _result(1, "universal 38% rule over three decades of v",
                   {"deviation<1e-3": dev < 1e-3, "runtime<60s": elapsed < 60},
                   {"P": P, "max_deviation": dev, "runtime_s": elapsed}, t0)


# -- 2 ----------------------------------------------------------------------

def criterion_2(rate=1.0):
    """Integrated B(omega) vs sqrt(omega) H1_{2/5}(z) to 1e-6 after one global factor."""
    from .reflection import integrate_backward, zero_range_system
    from .threshold import analytic_threshold_solution

    t0 = time.perf_counter()
    traj = integrate_backward(zero_range_system(0.0, rate=rate), record=True)
    w = np.linspace(-10.0, 5.0, 301)
    w = w[np.abs(w) > 1e-12]
    B = traj.sample(w)[:, 0]
    ref = analytic_threshold_solution(w, rate)
    ok = ~np.isnan(B.real)
    c = np.vdot(B[ok], ref[ok]) / np.vdot(B[ok], B[ok])
    err = float(np.max(np.abs(c * B[ok] - ref[ok]) / np.abs(ref[ok])))
    covered = int(ok.sum())
    return _result(2, "integrated amplitude matches the Hankel solution",
                   {"relative<1e-6": err < 1e-6, "grid_covered": covered >= 290},
                   {"max_relative_error": err, "points": covered}, t0)


# -- 3 ----------------------------------------------------------------------

FIG3_GAMMA = tuple(round(-4 + 0.25 * i, 2) for i in range(33))


def criterion_3(gammas=FIG3_GAMMA):
    """Fig. 3: monotone P(gamma), limits at +-3, 0.382 at 0, reflection vs TDSE within 2%."""
    t0 = time.perf_counter()
    refl = [evaluate_point("zero_range", "reflection-single", 0, g, 1.0)[0] for g in gammas]
    tdse = [evaluate_point("zero_range", "tdse", 0, g, 1.0)[0] for g in gammas]
    refl, tdse = np.array(refl), np.array(tdse)
    idx = {g: i for i, g in enumerate(gammas)}
    gap = float(np.max(np.abs(refl - tdse)))
    checks = {
        "monotone_decreasing": bool(np.all(np.diff(refl) < 0)),
        "P(-3)>0.99": refl[idx[-3.0]] > 0.99,
        "P(0)=0.382": abs(refl[idx[0.0]] - P38) < 1e-3,
        "P(3)<0.02": refl[idx[3.0]] < 0.02,
        "reflection_vs_tdse<0.02": gap < 0.02,
    }
    measured = {"gamma": list(gammas), "reflection": refl, "tdse": tdse, "max_gap": gap}
    return _result(3, "Fig. 3 survival curve and cross-oracle band", checks, measured, t0)


# -- 4 ----------------------------------------------------------------------

def criterion_4(energies=(-1.0, 0.0, 1.0), rates=tuple(10.0 ** k for k in range(-2, 6))):
    """Zero-range rapid limit: deviation from 0.38197 < 0.01 at the largest v."""
    t0 = time.perf_counter()
    curves = {e: [evaluate_point("zero_range", "reflection-single", 0, e, v)[0] for v in rates]
              for e in energies}
    last = {e: abs(c[-1] - 0.38197) for e, c in curves.items()}
    checks = {f"E={e:g}": d < 0.01 for e, d in last.items()}
    return _result(4, "rapid-passage limit for E in {-1, 0, 1}", checks,
                   {"rates": list(rates), "P": curves, "deviation_at_top": last}, t0)


# -- 5 ----------------------------------------------------------------------

FIG8_RATES = tuple(float(f"{x:.6g}") for x in np.geomspace(0.05, 500, 13))


def criterion_5(small=0.05, tiny=1e-3, rates=FIG8_RATES):
    """Rectangular limits in E-bar and v-bar (single Sturmian with M2, TDSE check)."""
    t0 = time.perf_counter()
    meth = "reflection-single+M2"
    m = {}
    checks = {}
    for e in (-4.0, -2.0):
        p = evaluate_point("rectangular", meth, 0, e, small)[0]
        q = evaluate_point("rectangular", "tdse", 0, e, small)[0]
        m[f"E={e:g},v={small:g}"] = {"reflection": p, "tdse": q}
        checks[f"adiabatic E={e:g}"] = p > 0.95 and q > 0.95
    p0 = evaluate_point("rectangular", meth, 0, 0.0, tiny)[0]
    m[f"E=0,v={tiny:g}"] = p0
    checks["threshold E=0"] = abs(p0 - P38) < 0.01
    for e in (2.0, 4.0):
        p = evaluate_point("rectangular", meth, 0, e, small)[0]
        m[f"E={e:g},v={small:g}"] = p
        checks[f"escape E={e:g}"] = p < 0.05
    top = [v for v in rates if v >= rates[-1] / 10]
    for e in (-4.0, -2.0, 0.0, 2.0, 4.0):
        P = [evaluate_point("rectangular", meth, 0, e, v)[0] for v in top]
        m[f"E={e:g},upper_decade"] = dict(zip(top, P))
        checks[f"fast E={e:g}"] = bool(np.all(np.diff(P) > 0)) and P[-1] > 0.9
    return _result(5, "rectangular-well limits", checks, m, t0)


# -- 6 ----------------------------------------------------------------------

def criterion_6(rates=FIG8_RATES, energies=(-4.0, -2.0, 0.0, 2.0, 4.0), band=0.03):
    """Single Sturmian within 0.03 of TDSE for v-bar <= 40, outside somewhere for >= 80."""
    t0 = time.perf_counter()
    rows = []
    for e in energies:
        for v in rates:
            s = evaluate_point("rectangular", "reflection-single+M2", 0, e, v)[0]
            x = evaluate_point("rectangular", "tdse", 0, e, v)[0]
            rows.append((e, v, s, x, abs(s - x)))
    low = max(r[4] for r in rows if r[1] <= 40)
    high = max(r[4] for r in rows if r[1] >= 80)
    checks = {"agree v<=40": low < band, "depart v>=80": high > band}
    return _result(6, "single-Sturmian validity band", checks,
                   {"rows(E,v,single,tdse,diff)": rows, "max_diff_low": low,
                    "max_diff_high": high}, t0)


# -- 7 ----------------------------------------------------------------------

def criterion_7(lo=1e-4, hi=1e-2, n=9):
    """Threshold exponents of the coupling matrices from log-log fits."""
    from .sturmian import RectangularBasis

    t0 = time.perf_counter()
    basis = RectangularBasis((0, 1, 2))
    w = np.geomspace(lo, hi, n)
    pts = [basis.at(x) for x in w]
    M2_00 = [p.M2[0, 0] for p in pts]
    M1_10 = [p.M1[1, 0] for p in pts]
    M1_12 = [p.M1[1, 2] for p in pts]
    slopes = {"M2_00": _log_fit(w, M2_00), "M1_10": _log_fit(w, M1_10),
              "M1_12": _log_fit(w, M1_12)}
    checks = {
        "M2_00 slope -1.50": abs(slopes["M2_00"] + 1.5) < 0.05,
        "M1_m0 slope -0.75": abs(slopes["M1_10"] + 0.75) < 0.05,
        "M1_mn slope -0.50": abs(slopes["M1_12"] + 0.5) < 0.05,
    }
    return _result(7, "coupling-matrix threshold exponents", checks, slopes, t0)


# -- 8 ----------------------------------------------------------------------

def criterion_8(tiny=1e-3, states=(0, 1, 2, 3), moderate=(0.1, 1.0, 10.0),
                slow=(1e-2, 1e-3, 1e-4, 1e-5)):
    """Universality across shapes and excited states; the E = -0.015 curve."""
    from .threshold import threshold_strength

    t0 = time.perf_counter()
    meth = "reflection-single+M2"
    m = {}
    checks = {}
    par = evaluate_point("parabolic", "tdse", 0, 0.0, tiny)[0]
    m["parabolic_tdse"] = par
    checks["parabolic"] = abs(par - P38) < 0.01
    for j in states:
        p = evaluate_point("rectangular", meth, j, threshold_strength("rectangular", j), tiny)[0]
        m[f"P_{j}{j}"] = p
        checks[f"state {j}"] = abs(p - P38) < 0.01
    track = {}
    for v in moderate:
        a = evaluate_point("rectangular", meth, 0, -0.015, v)[0]
        b = evaluate_point("rectangular", meth, 0, 0.0, v)[0]
        track[v] = (a, b)
    rise = [evaluate_point("rectangular", meth, 0, -0.015, v)[0] for v in slow]
    m["E=-0.015 vs E=0 (moderate v)"] = track
    m["E=-0.015 (slow v)"] = dict(zip(slow, rise))
    checks["tracks at moderate v"] = all(abs(a - b) < 0.02 for a, b in track.values())
    checks["rises as v decreases"] = bool(np.all(np.diff(rise) > 0))
    checks["approaches 1"] = rise[-1] > 0.9
    return _result(8, "universality across shapes and states", checks, m, t0)


# -- 9 ----------------------------------------------------------------------

def wronskian_grid():
    """100 complex points: 10 moduli in [0.1, 60] times 10 arguments in [-pi/2, pi]."""
    r = np.geomspace(0.1, 60.0, 10)
    th = np.linspace(-0.5 * math.pi, math.pi, 12)[1:-1]
    return (r[:, None] * np.exp(1j * th[None, :])).ravel()


def criterion_9():
    from .threshold import connection_residual, wronskian_residual

    t0 = time.perf_counter()
    wr = max(wronskian_residual(THRESHOLD_ORDER, z) for z in wronskian_grid())
    conn = {rho: connection_residual(rho) for rho in (0.5, 2.0, 10.0)}
    checks = {"wronskian<1e-10": wr < 1e-10, "connection<1e-9": max(conn.values()) < 1e-9}
    return _result(9, "Hankel Wronskian and connection formula", checks,
                   {"wronskian_max": wr, "connection": conn}, t0)


# -- 10 ---------------------------------------------------------------------

PROPERTY_DIR = os.path.join("tests", "properties")


def criterion_10(root=None, limit=600.0):
    """Run the property suites standalone in a fresh interpreter."""
    t0 = time.perf_counter()
    root = root or _repo_root()
    target = os.path.join(root, PROPERTY_DIR)
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", target],
                          cwd=root, capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr[-500:]
    checks = {"all pass": proc.returncode == 0, "runtime<10min": elapsed < limit}
    return _result(10, "standalone property suites", checks,
                   {"summary": summary, "runtime_s": elapsed}, t0)


def _repo_root():
    here = os.path.dirname(os.path.abspath(__file__))
    return os.path.dirname(os.path.dirname(here))


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
            6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10}


def run_acceptance(selected=None, report=None, stream=sys.stdout):
    """Run the selected criteria; print one line each; optionally write a JSON report."""
    results = []
    for k in selected or sorted(CRITERIA):
        res = CRITERIA[k]()
        results.append(res)
        print(res.line(), file=stream, flush=True)
    if report:
        with open(report, "w") as fh:
            json.dump([asdict(r) for r in results], fh, indent=2)
    return results
