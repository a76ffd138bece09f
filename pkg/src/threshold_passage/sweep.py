"""Run configurations, parameter sweeps and figure presets.

A :class:`RunConfig` describes one experiment: the well shape, the methods to
compare and the sweep axes. Axes are in scaled units (gamma for the zero-range
well with rate 1, or E-bar and v-bar in box units). ``run`` evaluates every
(method, state, energy) curve over the rate axis (or the energy axis when the
rate axis has a single value), writes one CSV per curve plus a comparison
table and a JSON manifest. CSV content depends only on the configuration.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import yaml

from .errors import ConfigError
from .trap import PARABOLIC, RECTANGULAR, SHAPES, ZERO_RANGE, TrapSpec

CONFIG_VERSION = 1
METHODS = ("reflection-single", "reflection-single+M2", "reflection-coupled", "tdse",
           "analytic")
OUTPUT_ENV = "THRESHOLD_PASSAGE_OUTPUT"


@dataclass
class Tolerances:
    """Solver accuracy knobs; every value is recorded in the manifest."""

    wkb_tol: float = 5e-4
    rtol: float = 1e-10
    atol: float = 1e-14
    tdse_refine: float = 1.0
    tdse_time_refine: float = 1.0
    tdse_self_check: bool = False


@dataclass
class Axes:
    """Sweep axes; ``energy_reference='threshold'`` shifts E by rho0 of each state."""

    energy: list = field(default_factory=lambda: [0.0])
    rate: list = field(default_factory=lambda: [1.0])
    states: list = field(default_factory=lambda: [0])
    energy_reference: str = "absolute"


@dataclass
class RunConfig:
    experiment: str
    shape: str = ZERO_RANGE
    methods: list = field(default_factory=lambda: ["reflection-single"])
    channels: int = 4
    axes: Axes = field(default_factory=Axes)
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: str = "results"
    workers: int = 1
    version: int = CONFIG_VERSION

    # -- serialisation ----------------------------------------------------

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("<root>", "expected a mapping")
        top = _take(data, cls, "", nested={"axes": Axes, "tolerances": Tolerances})
        cfg = cls(**top)
        cfg.validate()
        return cfg

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def from_yaml(cls, text):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError("<root>", f"not valid YAML ({exc})") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_yaml(fh.read())

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_yaml())

    # -- validation -------------------------------------------------------

    def validate(self):
        if not isinstance(self.experiment, str) or not self.experiment:
            raise ConfigError("experiment", "must be a non-empty string")
        if self.shape not in SHAPES:
            raise ConfigError("shape", f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if not self.methods:
            raise ConfigError("methods", "at least one method is required")
        for i, m in enumerate(self.methods):
            if m not in METHODS:
                raise ConfigError(f"methods[{i}]", f"unknown method {m!r}; expected one of {METHODS}")
            if m.startswith("reflection") and self.shape == PARABOLIC:
                raise ConfigError(f"methods[{i}]", "Sturmian reflection needs a zero-range or rectangular well")
            if m == "reflection-coupled" and self.shape != RECTANGULAR:
                raise ConfigError(f"methods[{i}]", "coupled channels need a rectangular well")
        if not isinstance(self.channels, int) or not 1 <= self.channels <= 8:
            raise ConfigError("channels", "must be an integer in [1, 8]")
        ax = self.axes
        for name in ("energy", "rate", "states"):
            vals = getattr(ax, name)
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"axes.{name}", "must be a non-empty list")
        for i, e in enumerate(ax.energy):
            if not _is_real(e):
                raise ConfigError(f"axes.energy[{i}]", "must be a finite number")
        for i, v in enumerate(ax.rate):
            if not _is_real(v) or not v > 0:
                raise ConfigError(f"axes.rate[{i}]", "must be a positive number")
        for i, m in enumerate(ax.states):
            if not isinstance(m, int) or m < 0:
                raise ConfigError(f"axes.states[{i}]", "must be a non-negative integer")
            if self.shape == ZERO_RANGE and m != 0:
                raise ConfigError(f"axes.states[{i}]", "the zero-range well has only state 0")
            if "reflection-coupled" in self.methods and m >= self.channels:
                raise ConfigError(f"axes.states[{i}]", f"state {m} needs more than {self.channels} channels")
        if ax.energy_reference not in ("absolute", "threshold"):
            raise ConfigError("axes.energy_reference", "must be 'absolute' or 'threshold'")
        if "analytic" in self.methods:
            if self.shape != ZERO_RANGE or any(e != 0 for e in ax.energy):
                raise ConfigError("methods", "the analytic solution covers the zero-range well at E = 0 only")
        tol = self.tolerances
        for name in ("wkb_tol", "rtol", "atol", "tdse_refine", "tdse_time_refine"):
            val = getattr(tol, name)
            if not _is_real(val) or not val > 0:
                raise ConfigError(f"tolerances.{name}", "must be a positive number")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", "must be a positive integer")
        if self.version != CONFIG_VERSION:
            raise ConfigError("version", f"unsupported config version {self.version}")
        return self


def _is_real(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _take(data, cls, prefix, nested=None):
    """Check keys of ``data`` against the dataclass ``cls``; recurse into ``nested``."""
    names = {f.name for f in fields(cls)}
    out = {}
    for key, val in data.items():
        path = f"{prefix}{key}"
        if key not in names:
            raise ConfigError(path, "unknown field")
        sub = (nested or {}).get(key)
        if sub is not None:
            if not isinstance(val, dict):
                raise ConfigError(path, "expected a mapping")
            val = sub(**_take(val, sub, f"{path}."))
        out[key] = val
    if "experiment" in names and "experiment" not in out:
        raise ConfigError(f"{prefix}experiment", "missing required field")
    return out


# -- presets ----------------------------------------------------------------

def _log_grid(lo, hi, per_decade):
    n = int(round(per_decade * math.log10(hi / lo))) + 1
    return [float(f"{x:.6g}") for x in np.geomspace(lo, hi, n)]


def preset(name, high_accuracy=False):
    """Fixed configurations that regenerate the figure data."""
    if name == "fig3":
        cfg = RunConfig(
            "fig3", ZERO_RANGE, ["reflection-single", "tdse"],
            axes=Axes(energy=[round(-4 + 0.25 * i, 2) for i in range(33)], rate=[1.0]))
    elif name == "fig4":
        cfg = RunConfig(
            "fig4", ZERO_RANGE, ["reflection-single"],
            axes=Axes(energy=[-1.0, 0.0, 1.0], rate=_log_grid(1e-2, 1e3, 2)))
    elif name == "fig8":
        cfg = RunConfig(
            "fig8", RECTANGULAR, ["tdse", "reflection-single", "reflection-single+M2"],
            axes=Axes(energy=[-4.0, -2.0, 0.0, 2.0, 4.0], rate=_log_grid(0.05, 500, 3)))
    elif name == "fig10a":
        cfg = RunConfig(
            "fig10a", PARABOLIC, ["tdse"],
            axes=Axes(energy=[0.0], rate=_log_grid(1e-3, 10, 2)))
    elif name == "fig10b":
        cfg = RunConfig(
            "fig10b", RECTANGULAR, ["reflection-single+M2"],
            axes=Axes(energy=[0.0, -0.015], rate=_log_grid(1e-5, 10, 2), states=[0, 1, 2, 3],
                      energy_reference="threshold"))
    else:
        raise ConfigError("preset", f"unknown preset {name!r}; expected one of {PRESETS}")
    if high_accuracy:
        cfg.tolerances = Tolerances(wkb_tol=1e-4, tdse_refine=2.0, tdse_time_refine=2.0,
                                    tdse_self_check=True)
    return cfg.validate()


PRESETS = ("fig3", "fig4", "fig8", "fig10a", "fig10b")


# -- evaluation -------------------------------------------------------------

def _spec(shape, energy, rate):
    if shape == ZERO_RANGE:
        return TrapSpec(ZERO_RANGE, 1.0, float(energy), float(rate))
    return TrapSpec(shape, 1.0, float(energy), float(rate), 0.5)


def evaluate_point(shape, method, m, energy, rate, channels=4, tolerances=None):
    """P_stay[m][m] and diagnostics for one sweep point."""
    from .reflection import solve_coupled, solve_single_sturmian
    from .tdse import GridConfig, evolve
    from .threshold import universal_constant

    tol = tolerances or Tolerances()
    spec = _spec(shape, energy, rate)
    kw = dict(wkb_tol=tol.wkb_tol, rtol=tol.rtol, atol=tol.atol)
    if method == "analytic":
        return universal_constant(), {}
    if method in ("reflection-single", "reflection-single+M2"):
        res = solve_single_sturmian(spec, m, with_M2=method.endswith("M2"), **kw)
    elif method == "reflection-coupled":
        res = solve_coupled(spec, m, channels, **kw)
    elif method == "tdse":
        grid = GridConfig(refine=tol.tdse_refine, time_refine=tol.tdse_time_refine)
        _, res = evolve(spec, m, config=grid, self_check=tol.tdse_self_check)
    else:
        raise ConfigError("methods", f"unknown method {method!r}")
    diag = {k: v for k, v in res.diagnostics.items() if np.isscalar(v)}
    return res.probability(m, m), diag


def _point_task(args):
    t0 = time.perf_counter()
    p, diag = evaluate_point(*args)
    return p, diag, time.perf_counter() - t0


def _curves(cfg):
    """(method, state, energy) for each curve and the (energy, rate) points on it."""
    from .threshold import threshold_strength

    ax = cfg.axes
    vary_rate = len(ax.rate) > 1 or len(ax.energy) == 1
    out = []
    if vary_rate:
        for method, m, e in itertools.product(cfg.methods, ax.states, ax.energy):
            shift = threshold_strength(cfg.shape, m) if ax.energy_reference == "threshold" else 0.0
            out.append(((method, m, e), "rate", [(shift + e, v) for v in ax.rate], ax.rate))
    else:
        for method, m, v in itertools.product(cfg.methods, ax.states, ax.rate):
            shift = threshold_strength(cfg.shape, m) if ax.energy_reference == "threshold" else 0.0
            out.append(((method, m, v), "energy", [(shift + e, v) for e in ax.energy], ax.energy))
    return out


def _curve_name(cfg, key, axis):
    method, m, fixed = key
    tag = "E" if axis == "rate" else "v"
    return f"{cfg.experiment}_{method.replace('+', '_')}_m{m}_{tag}{fixed:g}.csv"


def run(cfg, output=None):
    """Evaluate ``cfg``; returns the manifest dict (also written to disk)."""
    cfg.validate()
    out_dir = output or os.environ.get(OUTPUT_ENV) or cfg.output
    os.makedirs(out_dir, exist_ok=True)
    curves = _curves(cfg)
    tasks = [(cfg.shape, key[0], key[1], e, v, cfg.channels, cfg.tolerances)
             for key, _, pts, _ in curves for e, v in pts]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_point_task, tasks))
    else:
        results = [_point_task(t) for t in tasks]

    header = dict(experiment=cfg.experiment, shape=cfg.shape, channels=cfg.channels,
                  energy_reference=cfg.axes.energy_reference, config_version=cfg.version,
                  **{f"tol_{k}": v for k, v in asdict(cfg.tolerances).items()})
    files, runtimes, diagnostics = [], [], []
    table = {}
    i = 0
    for key, axis, pts, xs in curves:
        method, m, fixed = key
        name = _curve_name(cfg, key, axis)
        rows = []
        for x in xs:
            p, diag, dt = results[i]
            i += 1
            rows.append((x, p))
            table.setdefault((m, fixed, x), {})[method] = p
            runtimes.append(dict(curve=name, x=x, seconds=round(dt, 3)))
            diagnostics.append(dict(curve=name, x=x, **_jsonable(diag)))
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="") as fh:
            meta = dict(header, method=method, state=m,
                        **({"energy": fixed} if axis == "rate" else {"rate": fixed}))
            for k, v in meta.items():
                fh.write(f"# {k}={v}\n")
            w = csv.writer(fh)
            w.writerow([axis, f"P_stay_{m}_{m}"])
            for x, p in rows:
                w.writerow([f"{x:.10g}", f"{p:.12e}"])
        files.append(name)

    comp = f"{cfg.experiment}_comparison.csv"
    fixed_name = "energy" if len(cfg.axes.rate) > 1 or len(cfg.axes.energy) == 1 else "rate"
    x_name = "rate" if fixed_name == "energy" else "energy"
    with open(os.path.join(out_dir, comp), "w", newline="") as fh:
        for k, v in header.items():
            fh.write(f"# {k}={v}\n")
        w = csv.writer(fh)
        w.writerow(["state", fixed_name, x_name] + list(cfg.methods))
        for (m, fixed, x), vals in table.items():
            w.writerow([m, f"{fixed:.10g}", f"{x:.10g}"]
                       + [f"{vals[meth]:.12e}" for meth in cfg.methods])
    files.append(comp)

    manifest = dict(config=cfg.to_dict(), files=files, tolerances=_all_tolerances(cfg),
                    versions=_versions(), runtimes=runtimes, diagnostics=diagnostics)
    with open(os.path.join(out_dir, f"{cfg.experiment}_manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2)
    return manifest


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, (np.floating, np.integer)):
            v = v.item()
        if isinstance(v, complex):
            v = [v.real, v.imag]
        out[k] = v
    return out


def _all_tolerances(cfg):
    """Every numeric tolerance in force for this run, including module constants."""
    from . import reflection, tdse, threshold

    tol = asdict(cfg.tolerances)
    tol.update(
        coupling_tol=reflection.COUPLING_TOL, decay_target=reflection.DECAY_TARGET,
        piece_growth=reflection.PIECE_GROWTH, fit_wavelengths=reflection.FIT_WAVELENGTHS,
        fit_samples=reflection.FIT_SAMPLES, window_shift=reflection.WINDOW_SHIFT,
        window_tol=reflection.WINDOW_TOL, fit_tol=reflection.FIT_TOL,
        tdse_step_phase=tdse.STEP_PHASE, tdse_steps_per_time_scale=tdse.STEPS_PER_TIME_SCALE,
        tdse_core_nodes=tdse.CORE_NODES_PER_WELL, tdse_absorber_wavelengths=tdse.ABSORBER_WAVELENGTHS,
        tdse_self_check_tol=tdse.SELF_CHECK_TOL, hankel_series_radius=threshold.SERIES_RADIUS,
        hankel_asymptotic_radius=threshold.ASYMPTOTIC_RADIUS,
    )
    return tol


def _versions():
    import scipy

    from . import __version__

    return dict(package=__version__, numpy=np.__version__, scipy=scipy.__version__,
                python=platform.python_version())
