"""Declarative parameter grids, their execution, and the figure scenarios.

A :class:`SweepSpec` holds base parameters, one or two axes and a list of
measure names. Measure names:

* ``stable``, ``max_re`` -- stability flag and largest real part of eig(M)
* ``g_minus``, ``g_plus`` -- hybrid optical couplings (magnitudes)
* ``EN_<a>_<b>`` -- logarithmic negativity between two modes
* ``Rmin_<a>`` -- minimum residual contangle of ``(a, m1, m2)``
* ``Rmin_<a>_<b>_<c>`` -- minimum residual contangle of an explicit triple

with mode tokens ``h``, ``v``, ``m1``, ``m2``.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import math
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from omentangle.darkmode import hybridized_couplings
from omentangle.errors import MonogamyWarning, NumericalError
from omentangle.gaussian import ENTANGLED_TOL, MONOGAMY_TOL, Mode, log_negativity, min_residual_contangle
from omentangle.lyapunov import solve_steady_covariance
from omentangle.model import SystemParams, build_diffusion_matrix, build_drift_matrix, check_stability

AXIS_NAMES = ("phi", "theta", "J_m", "G_m", "n_th", "n_th1", "n_th2", "delta_h", "delta_v")
ANGLE_AXES = ("phi", "theta")
ANGLE_POINTS = 361
RATE_POINTS = 101

DEFAULT_TOLERANCES = {"entangled": ENTANGLED_TOL, "monogamy": MONOGAMY_TOL}


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}; choose from {', '.join(AXIS_NAMES)}")
        if self.spacing not in ("linear", "log"):
            raise ValueError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.count < 1 or (self.count == 1 and self.start != self.stop):
            raise ValueError("axis needs count >= 2 (count = 1 only with start == stop)")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("log spacing requires positive endpoints")

    def values(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class Measure:
    name: str
    kind: str
    modes: tuple = ()

    @property
    def needs_covariance(self) -> bool:
        return self.kind in ("EN", "Rmin")

    @classmethod
    def parse(cls, name: str) -> "Measure":
        name = name.strip()
        if name in ("stable", "max_re", "g_minus", "g_plus"):
            return cls(name, name)
        head, _, rest = name.partition("_")
        tokens = rest.split("_") if rest else []
        try:
            modes = tuple(Mode.parse(t) for t in tokens)
        except ValueError as exc:
            raise ValueError(f"bad measure {name!r}: {exc}") from None
        if head == "EN" and len(modes) == 2 and modes[0] != modes[1]:
            return cls(name, "EN", modes)
        if head == "Rmin" and len(modes) == 1:
            if modes[0] in (Mode.M1, Mode.M2):
                raise ValueError(f"bad measure {name!r}: Rmin_<a> needs an optical mode")
            return cls(name, "Rmin", (modes[0], Mode.M1, Mode.M2))
        if head == "Rmin" and len(modes) == 3 and len(set(modes)) == 3:
            return cls(name, "Rmin", modes)
        raise ValueError(
            f"bad measure {name!r}; expected stable, max_re, g_minus, g_plus, "
            "EN_<a>_<b>, Rmin_<a> or Rmin_<a>_<b>_<c>"
        )


@dataclass(frozen=True)
class SweepSpec:
    base: SystemParams
    axes: tuple
    measures: tuple
    name: str = ""
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValueError("a sweep has one or two axes")
        if len({a.name for a in self.axes}) != len(self.axes):
            raise ValueError("duplicate sweep axes")
        if not self.measures:
            raise ValueError("no measures requested")
        for m in self.measures:
            Measure.parse(m)

    def grid(self):
        """Row-major list of ``(coords, params)`` grid points."""
        names = [a.name for a in self.axes]
        out = []
        for combo in itertools.product(*(a.values() for a in self.axes)):
            coords = dict(zip(names, (float(x) for x in combo)))
            out.append((coords, self.base.replace(**coords)))
        return out

    @property
    def shape(self):
        return tuple(a.count for a in self.axes)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "base": self.base.to_dict(),
            "axes": [dataclasses.asdict(a) for a in self.axes],
            "measures": list(self.measures),
            "tolerances": dict(self.tolerances),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        return cls(
            base=SystemParams.from_dict(data["base"]),
            axes=tuple(Axis(**a) for a in data["axes"]),
            measures=tuple(data["measures"]),
            name=data.get("name", ""),
            tolerances={**DEFAULT_TOLERANCES, **data.get("tolerances", {})},
        )


@dataclass
class SweepRecord:
    coords: dict
    values: dict
    nu: dict
    stable: bool | None
    max_re: float | None
    monogamy_ok: bool | None
    wall_time: float
    error: str | None = None


def evaluate_point(params: SystemParams, measures, tolerances=None, coords=None) -> SweepRecord:
    """Evaluate ``measures`` at one parameter point; never raises for
    numerical trouble (it is recorded in ``error``)."""
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    parsed = [Measure.parse(m) for m in measures]
    t0 = time.perf_counter()
    values = {m.name: None for m in parsed}
    nu = {}
    errors = []
    stable = max_re = monogamy_ok = None

    try:
        report = check_stability(build_drift_matrix(params))
        stable, max_re = bool(report.stable), report.max_real_part
    except NumericalError as exc:
        errors.append(str(exc))

    for m in parsed:
        if m.kind == "stable":
            values[m.name] = stable
        elif m.kind == "max_re":
            values[m.name] = max_re
        elif m.kind in ("g_minus", "g_plus"):
            try:
                rep = hybridized_couplings(params)
                values[m.name] = abs(rep.g_minus) if m.kind == "g_minus" else rep.g_plus
            except ValueError as exc:
                errors.append(str(exc))

    cov_measures = [m for m in parsed if m.needs_covariance]
    if cov_measures and stable:
        try:
            v = solve_steady_covariance(build_drift_matrix(params), build_diffusion_matrix(params))
        except NumericalError as exc:
            errors.append(str(exc))
            v = None
        if v is not None:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", MonogamyWarning)
                for m in cov_measures:
                    try:
                        if m.kind == "EN":
                            res = log_negativity(v, *m.modes, tol=tol["entangled"])
                        else:
                            res = min_residual_contangle(
                                v, m.modes, tol=tol["entangled"], monogamy_tol=tol["monogamy"]
                            )
                            ok = res.meta["monogamy_ok"]
                            monogamy_ok = ok if monogamy_ok is None else (monogamy_ok and ok)
                    except NumericalError as exc:
                        errors.append(f"{m.name}: {exc}")
                        continue
                    values[m.name] = res.value
                    nu[m.name] = res.nu_min

    return SweepRecord(
        coords=dict(coords or {}),
        values=values,
        nu=nu,
        stable=stable,
        max_re=max_re,
        monogamy_ok=monogamy_ok,
        wall_time=time.perf_counter() - t0,
        error="; ".join(errors) or None,
    )


def _eval_task(args):
    coords, params, measures, tolerances = args
    return evaluate_point(params, measures, tolerances, coords)


def run_sweep(spec: SweepSpec, workers: int = 1) -> list:
    """Evaluate every grid point of ``spec`` in row-major order.

    With ``workers > 1`` points are farmed out to a process pool; the
    returned order and values do not depend on the worker count.
    """
    tasks = [(c, p, spec.measures, spec.tolerances) for c, p in spec.grid()]
    if workers <= 1 or len(tasks) < 2:
        return [_eval_task(t) for t in tasks]
    chunk = max(1, len(tasks) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_eval_task, tasks, chunksize=chunk))


# ---------------------------------------------------------------- output

def csv_columns(spec: SweepSpec) -> list:
    cols = [a.name for a in spec.axes] + list(spec.measures)
    cols += [f"nu_{m}" for m in spec.measures if Measure.parse(m).needs_covariance]
    cols += [c for c in ("stable", "monogamy_ok", "error") if c not in spec.measures]
    return cols


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def record_row(spec: SweepSpec, rec: SweepRecord) -> dict:
    row = dict(rec.coords)
    row.update(rec.values)
    row.update({f"nu_{k}": v for k, v in rec.nu.items()})
    row.setdefault("stable", rec.stable)
    row["monogamy_ok"] = rec.monogamy_ok
    row["error"] = rec.error
    return row


def to_csv(spec: SweepSpec, records) -> str:
    """CSV text: header row, axis columns, then measures; nulls are empty.

    Wall times are left out so that reruns are byte-identical.
    """
    buf = io.StringIO()
    cols = csv_columns(spec)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for rec in records:
        row = record_row(spec, rec)
        writer.writerow([_fmt(row.get(c)) for c in cols])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def to_structured(spec: SweepSpec, records, metadata=None) -> dict:
    rows = []
    for rec in records:
        row = {k: _jsonable(v) for k, v in record_row(spec, rec).items()}
        row["wall_time"] = rec.wall_time
        rows.append(row)
    return {"metadata": dict(metadata or {}), "spec": spec.to_dict(), "records": rows}


# ---------------------------------------------------------------- analysis

def measure_grid(spec: SweepSpec, records, measure: str) -> np.ndarray:
    """Values of ``measure`` reshaped to the grid; nulls become NaN."""
    vals = [rec.values.get(measure) for rec in records]
    arr = np.array([np.nan if v is None else float(v) for v in vals])
    return arr.reshape(spec.shape)


def first_positive_crossing(xs, ys):
    """First ``x`` at which ``y > 0`` scanning in order (NaNs skipped)."""
    for x, y in zip(xs, ys):
        if y is not None and not np.isnan(y) and y > 0:
            return float(x)
    return None


def local_maxima(xs, ys, *, periodic: bool = False):
    """Grid positions of strict-or-plateau local maxima with ``y > 0``."""
    ys = np.asarray(ys, dtype=float)
    n = len(ys)
    found = []
    for i in range(n):
        y = ys[i]
        if np.isnan(y) or y <= 0:
            continue
        if periodic:
            left, right = ys[(i - 1) % n], ys[(i + 1) % n]
        else:
            left = ys[i - 1] if i > 0 else -np.inf
            right = ys[i + 1] if i < n - 1 else -np.inf
        left = -np.inf if np.isnan(left) else left
        right = -np.inf if np.isnan(right) else right
        if y > left and y >= right:
            found.append(float(xs[i]))
    return found


def summarize(spec: SweepSpec, records) -> dict:
    """Extrema and first-positive-crossing thresholds per numeric measure.

    The threshold scan runs along the first axis; for 2-axis grids the
    earliest crossing over all columns of the second axis is reported.
    """
    out = {}
    ax0 = spec.axes[0]
    xs = ax0.values()
    for name in spec.measures:
        m = Measure.parse(name)
        if m.kind == "stable":
            grid = measure_grid(spec, records, name)
            out[name] = {"stable_fraction": float(np.nanmean(grid))}
            continue
        grid = measure_grid(spec, records, name)
        info = {}
        if np.all(np.isnan(grid)):
            out[name] = {"max": None}
            continue
        flat = int(np.nanargmax(grid))
        idx = np.unravel_index(flat, grid.shape)
        info["max"] = float(grid[idx])
        info["argmax"] = {a.name: float(a.values()[i]) for a, i in zip(spec.axes, idx)}
        if grid.ndim == 1:
            span = ax0.stop - ax0.start
            periodic = ax0.name in ANGLE_AXES and math.isclose(span, 2 * math.pi)
            ys = grid[:-1] if periodic else grid
            info["local_maxima"] = local_maxima(xs[: len(ys)], ys, periodic=periodic)
            info["onset"] = first_positive_crossing(xs, grid)
        else:
            onsets = [first_positive_crossing(xs, grid[:, j]) for j in range(grid.shape[1])]
            found = [o for o in onsets if o is not None]
            info["onset"] = min(found) if found else None
        info["onset_axis"] = ax0.name
        out[name] = info
    return out


# ---------------------------------------------------------------- scenarios

PI = math.pi
_FOUR_EN = ("EN_h_m1", "EN_h_m2", "EN_v_m1", "EN_v_m2")
_RMIN = ("Rmin_h", "Rmin_v")


def _base(**kw) -> SystemParams:
    defaults = dict(omega_1=1.0, omega_2=1.0, kappa=0.2, gamma_m=1e-5, delta_h=-1.0, delta_v=-1.0)
    defaults.update(kw)
    n = defaults.pop("n_th", 0.0)
    return SystemParams(n_th1=n, n_th2=n, **defaults)


def _phi():
    return Axis("phi", 0.0, 2 * PI, ANGLE_POINTS)


def _theta():
    return Axis("theta", 0.0, 2 * PI, ANGLE_POINTS)


def _jm(stop=0.25):
    return Axis("J_m", 0.0, stop, RATE_POINTS)


def _nth():
    return Axis("n_th", 1.0, 1e4, RATE_POINTS, "log")


_SCENARIOS = {
    "fig2": ("stability vs (G_m, J_m)", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.2, phi=PI / 4, theta=PI / 2),
        (Axis("G_m", 0.0, 0.5, RATE_POINTS), Axis("J_m", 0.0, 0.5, RATE_POINTS)),
        ("stable", "max_re"), "fig2")),
    "fig3": ("|G_-| vs phi, non-degenerate detunings", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.0, delta_h=-(1 + 1e-3), delta_v=-1.0, phi=0.0, theta=PI / 2),
        (_phi(),), ("g_minus", "g_plus"), "fig3")),
    "fig4": ("bipartite E_N vs phi at J_m = 0", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.0, n_th=100, phi=0.0, theta=PI / 2),
        (_phi(),), _FOUR_EN, "fig4")),
    "fig5a": ("E_N(v-M1/M2) vs (J_m, phi), theta = pi/2", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.2, n_th=100, phi=0.0, theta=PI / 2),
        (_jm(), _phi()), ("EN_v_m1", "EN_v_m2"), "fig5a")),
    "fig5b": ("E_N(h-M1/M2) vs (J_m, phi), theta = pi/2", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.2, n_th=100, phi=0.0, theta=PI / 2),
        (_jm(), _phi()), ("EN_h_m1", "EN_h_m2"), "fig5b")),
    "fig5c": ("bipartite E_N vs theta (polar), phi = pi/4, J_m = 0.2", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.2, n_th=100, phi=PI / 4, theta=0.0),
        (_theta(),), _FOUR_EN, "fig5c")),
    "fig5d": ("bipartite E_N vs theta, phi = pi/4, J_m = 0.2", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.2, n_th=100, phi=PI / 4, theta=0.0),
        (_theta(),), _FOUR_EN, "fig5d")),
    "fig6": ("bipartite E_N vs (phi, theta)", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.2, n_th=100, phi=0.0, theta=0.0),
        (_phi(), _theta()), _FOUR_EN, "fig6")),
    "fig7": ("E_N(h,v-M1) vs (J_m, n_th)", lambda: SweepSpec(
        _base(G_m=0.2, J_m=0.2, n_th=100, phi=PI / 4, theta=PI / 2),
        (_jm(), _nth()), ("EN_h_m1", "EN_v_m1"), "fig7")),
    "fig8a": ("R_min vs (J_m, G_m)", lambda: SweepSpec(
        _base(G_m=0.3, J_m=0.2, n_th=100, phi=PI / 4, theta=PI / 2),
        (_jm(), Axis("G_m", 0.0, 0.3, RATE_POINTS)), _RMIN, "fig8a")),
    "fig8b": ("R_min vs (J_m, theta)", lambda: SweepSpec(
        _base(G_m=0.3, J_m=0.2, n_th=100, phi=PI / 4, theta=PI / 2),
        (_jm(), _theta()), _RMIN, "fig8b")),
    "fig9a": ("R_min vs theta, phi = pi/4", lambda: SweepSpec(
        _base(G_m=0.3, J_m=0.08, n_th=100, phi=PI / 4, theta=0.0),
        (_theta(),), _RMIN, "fig9a")),
    "fig9b": ("R_min vs phi, theta = pi/2", lambda: SweepSpec(
        _base(G_m=0.3, J_m=0.08, n_th=100, phi=0.0, theta=PI / 2),
        (_phi(),), _RMIN, "fig9b")),
    "fig10": ("R_min vs (phi, theta)", lambda: SweepSpec(
        _base(G_m=0.3, J_m=0.08, n_th=100, phi=0.0, theta=0.0),
        (_phi(), _theta()), _RMIN, "fig10")),
    "fig11": ("R_min vs (n_th, J_m)", lambda: SweepSpec(
        _base(G_m=0.3, J_m=0.2, n_th=100, phi=PI / 4, theta=PI / 2),
        (_nth(), _jm()), _RMIN, "fig11")),
    "tri_hv": ("R_min of (h, v, M_j) vs phi; no published counterpart", lambda: SweepSpec(
        _base(G_m=0.3, J_m=0.08, n_th=100, phi=0.0, theta=PI / 2),
        (_phi(),), ("Rmin_h_v_m1", "Rmin_h_v_m2"), "tri_hv")),
}


def list_scenarios() -> dict:
    """Scenario name -> one-line description."""
    return {name: desc for name, (desc, _) in _SCENARIOS.items()}


def scenario(name: str) -> SweepSpec:
    """The sweep reproducing a named figure (``fig2`` ... ``fig11``)."""
    try:
        return _SCENARIOS[name][1]()
    except KeyError:
        raise KeyError(
            f"unknown scenario {name!r}; available: {', '.join(_SCENARIOS)}"
        ) from None
