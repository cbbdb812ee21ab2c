"""Command-line front end.

Subcommands::

    omentangle point [CONFIG] [--set key=value ...]
    omentangle scenario NAME [--set key=value ...] [--out PATH]
    omentangle sweep CONFIG [--set key=value ...] [--out PATH]
    omentangle list-scenarios

Angles (``phi``, ``theta`` and the endpoints of angle axes) are read in
units of pi, so ``phi=0.25`` means pi/4. ``--radians`` (or
``angle_unit = rad`` in the config) switches to raw radians.

Exit codes: 0 ok, 2 config error, 3 unstable point, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from omentangle import __version__
from omentangle.darkmode import hybridized_couplings
from omentangle.errors import NumericalError
from omentangle.gaussian import Mode, log_negativity, min_residual_contangle, symplectic_eigenvalues
from omentangle.lyapunov import lyapunov_residual, solve_steady_covariance
from omentangle.model import SystemParams, build_diffusion_matrix, build_drift_matrix, check_stability
from omentangle.sweep import (
    ANGLE_AXES,
    DEFAULT_TOLERANCES,
    Axis,
    Measure,
    SweepSpec,
    list_scenarios,
    run_sweep,
    scenario,
    summarize,
    to_csv,
    to_structured,
)

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_NUMERICAL = 0, 2, 3, 4

PARAM_KEYS = tuple(f.name for f in dataclasses.fields(SystemParams)) + ("G_m_imag", "n_th", "delta")
ANGLE_PARAMS = ("phi", "theta")
AXIS_FIELDS = ("start", "stop", "count", "spacing")
FORMATS = ("csv", "structured")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce a run, in user units (angles in pi
    unless ``angle_unit == 'rad'``)."""

    scenario: str | None = None
    params: dict = field(default_factory=dict)
    axes: tuple = ()
    measures: tuple = ()
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    tolerances: dict = field(default_factory=dict)
    angle_unit: str = "pi"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.angle_unit not in ("pi", "rad"):
            raise ConfigError(f"angle_unit must be 'pi' or 'rad', got {self.angle_unit!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")
        if self.scenario is not None and self.scenario not in list_scenarios():
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; available: {', '.join(list_scenarios())}"
            )
        for key in self.params:
            if key not in PARAM_KEYS:
                raise ConfigError(f"unknown parameter {key!r}")
        for key in self.tolerances:
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {key!r}; known: {', '.join(DEFAULT_TOLERANCES)}")
        for m in self.measures:
            try:
                Measure.parse(m)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        for ax in self.axes:
            self._axis(ax)
        # physical validation of the base point
        self.system_params()

    # -- unit conversion ------------------------------------------------
    def _angle(self, x: float) -> float:
        return x * math.pi if self.angle_unit == "pi" else x

    def _axis(self, ax: dict) -> Axis:
        missing = [f for f in ("name", "start", "stop", "count") if f not in ax]
        if missing:
            raise ConfigError(f"axis {ax.get('name', '?')!r} missing {', '.join(missing)}")
        extra = set(ax) - set(AXIS_FIELDS) - {"name"}
        if extra:
            raise ConfigError(f"unknown axis field(s) {sorted(extra)}")
        start, stop = float(ax["start"]), float(ax["stop"])
        if ax["name"] in ANGLE_AXES:
            start, stop = self._angle(start), self._angle(stop)
        try:
            return Axis(ax["name"], start, stop, int(ax["count"]), ax.get("spacing", "linear"))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def system_params(self) -> SystemParams:
        base = scenario(self.scenario).base if self.scenario else SystemParams()
        changes = {}
        for key, value in self.params.items():
            changes[key] = self._angle(value) if key in ANGLE_PARAMS else value
        imag = changes.pop("G_m_imag", None)
        try:
            params = base.replace(**changes)
            if imag is not None:
                params = params.replace(G_m=complex(complex(params.G_m).real, imag))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid parameters: {exc}") from None
        return params

    def sweep_spec(self) -> SweepSpec:
        seed = scenario(self.scenario) if self.scenario else None
        if self.axes:
            axes = tuple(self._axis(a) for a in self.axes)
        elif seed is not None:
            axes = seed.axes
        else:
            raise ConfigError("no sweep axes: give [axis.*] sections or a scenario")
        measures = self.measures or (seed.measures if seed else ())
        if not measures:
            raise ConfigError("no measures requested")
        tol = {**DEFAULT_TOLERANCES, **(seed.tolerances if seed else {}), **self.tolerances}
        try:
            return SweepSpec(self.system_params(), axes, tuple(measures),
                             name=self.scenario or "custom", tolerances=tol)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def materialize_axes(self):
        """Copy the scenario's axes into the config (in user units)."""
        if self.axes or not self.scenario:
            return
        out = []
        for a in scenario(self.scenario).axes:
            start, stop = a.start, a.stop
            if a.name in ANGLE_AXES and self.angle_unit == "pi":
                start, stop = start / math.pi, stop / math.pi
            out.append({"name": a.name, "start": start, "stop": stop,
                        "count": a.count, "spacing": a.spacing})
        self.axes = tuple(out)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["axes"] = [dict(a) for a in self.axes]
        d["measures"] = list(self.measures)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        data["axes"] = tuple(dict(a) for a in data.get("axes", ()))
        data["measures"] = tuple(data.get("measures", ()))
        return cls(**data)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        run = {"angle_unit": self.angle_unit}
        if self.scenario:
            run["scenario"] = self.scenario
        if self.measures:
            run["measures"] = ", ".join(self.measures)
        cp["run"] = run
        if self.params:
            cp["params"] = {k: repr(v) for k, v in self.params.items()}
        for a in self.axes:
            cp[f"axis.{a['name']}"] = {k: (repr(v) if isinstance(v, float) else str(v))
                                       for k, v in a.items() if k != "name"}
        output = {"format": self.format, "workers": str(self.workers)}
        if self.out:
            output["out"] = self.out
        cp["output"] = output
        if self.tolerances:
            cp["tolerances"] = {k: repr(v) for k, v in self.tolerances.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
        cp.optionxform = str
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        kw = {}
        axes = []
        for section in cp.sections():
            items = dict(cp[section])
            if section == "run":
                _take(items, kw, "scenario", str)
                _take(items, kw, "angle_unit", str)
                if "measures" in items:
                    kw["measures"] = tuple(m.strip() for m in items.pop("measures").split(",") if m.strip())
            elif section == "params":
                kw["params"] = {k: _number(k, v) for k, v in items.items()}
                items = {}
            elif section.startswith("axis."):
                ax = {"name": section[5:]}
                for k, v in items.items():
                    if k not in AXIS_FIELDS:
                        raise ConfigError(f"unknown key {k!r} in [{section}]")
                    ax[k] = v if k == "spacing" else (_int(k, v) if k == "count" else _number(k, v))
                axes.append(ax)
                items = {}
            elif section == "output":
                _take(items, kw, "out", str)
                _take(items, kw, "format", str)
                _take(items, kw, "workers", lambda s: _int("workers", s))
            elif section == "tolerances":
                kw["tolerances"] = {k: _number(k, v) for k, v in items.items()}
                items = {}
            else:
                raise ConfigError(f"unknown config section [{section}]")
            if items:
                raise ConfigError(f"unknown key(s) {sorted(items)} in [{section}]")
        kw["axes"] = tuple(axes)
        return cls(**kw)

    def apply_override(self, assignment: str):
        """Apply one ``key=value`` override (``--set``)."""
        key, sep, value = assignment.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"override must look like key=value, got {assignment!r}")
        if key in PARAM_KEYS:
            self.params = {**self.params, key: _number(key, value)}
        elif "." in key and key.split(".", 1)[0] in ("tol", "tolerances"):
            name = key.split(".", 1)[1]
            self.tolerances = {**self.tolerances, name: _number(name, value)}
        elif "." in key:
            axis, fld = key.split(".", 1)
            if fld not in AXIS_FIELDS:
                raise ConfigError(f"unknown axis field {fld!r}")
            self.materialize_axes()
            axes = [dict(a) for a in self.axes]
            matches = [a for a in axes if a["name"] == axis]
            if not matches:
                raise ConfigError(f"no axis named {axis!r} in this run")
            matches[0][fld] = value if fld == "spacing" else (
                _int(fld, value) if fld == "count" else _number(fld, value))
            self.axes = tuple(axes)
        elif key == "measures":
            self.measures = tuple(m.strip() for m in value.split(",") if m.strip())
        elif key == "workers":
            self.workers = _int(key, value)
        elif key in ("format", "out", "angle_unit", "scenario"):
            setattr(self, key, value)
        else:
            raise ConfigError(f"unknown key {key!r}")
        self.validate()


def _take(items, kw, key, conv):
    if key in items:
        kw[key] = conv(items.pop(key))


def _number(key, text):
    if isinstance(text, (int, float)):
        return float(text)
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _int(key, text):
    try:
        return int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


# ---------------------------------------------------------------- commands

def _fmt_c(z: complex) -> str:
    return f"{z.real:+.6g}{z.imag:+.6g}j"


def point_report(params: SystemParams, tolerances=None) -> tuple[dict, int]:
    """Analyse one parameter point. Returns ``(report, exit_code)``."""
    tol = {**DEFAULT_TOLERANCES, **(tolerances or {})}
    m = build_drift_matrix(params)
    d = build_diffusion_matrix(params)
    stab = check_stability(m)
    report = {
        "params": params.to_dict(),
        "stability": {
            "stable": bool(stab.stable),
            "marginal": bool(stab.marginal),
            "max_real_part": stab.max_real_part,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in stab.eigenvalues],
        },
    }
    try:
        dm = hybridized_couplings(params)
        report["dark_mode"] = {
            "g_plus": dm.g_plus,
            "g_minus": [dm.g_minus.real, dm.g_minus.imag],
            "omega_plus": [dm.omega_plus.real, dm.omega_plus.imag],
            "omega_minus": [dm.omega_minus.real, dm.omega_minus.imag],
            "optical_regime": dm.optical_regime,
            "mechanical_dark_broken": dm.mechanical_dark_broken,
        }
    except ValueError as exc:
        report["dark_mode"] = {"error": str(exc)}
    if not stab.stable:
        return report, EXIT_UNSTABLE

    v = solve_steady_covariance(m, d)
    report["covariance"] = {
        "lyapunov_residual": lyapunov_residual(m, d, v),
        "symplectic_spectrum": [float(x) for x in symplectic_eigenvalues(v)],
    }
    pairs = [(Mode.H, Mode.M1), (Mode.H, Mode.M2), (Mode.V, Mode.M1), (Mode.V, Mode.M2),
             (Mode.H, Mode.V), (Mode.M1, Mode.M2)]
    bip = {}
    for a, b in pairs:
        res = log_negativity(v, a, b, tol=tol["entangled"])
        bip[f"{a.label}-{b.label}"] = {"E_N": res.value, "nu_min": res.nu_min}
    report["bipartite"] = bip
    tri = {}
    for opt in (Mode.H, Mode.V):
        res = min_residual_contangle(v, (opt, Mode.M1, Mode.M2), tol=tol["entangled"],
                                     monogamy_tol=tol["monogamy"])
        tri[opt.label] = {"R_min": res.value, "nu_min": res.nu_min,
                          "monogamy_ok": res.meta["monogamy_ok"]}
    report["tripartite"] = tri
    return report, EXIT_OK


def format_point_report(report: dict) -> str:
    lines = []
    st = report["stability"]
    lines.append(f"stable: {'true' if st['stable'] else 'false'}"
                 + ("  (marginal)" if st["marginal"] else ""))
    lines.append(f"max real part: {st['max_real_part']:.6e}")
    if not st["stable"]:
        lines.append("eigenvalues of M:")
        for re, im in st["eigenvalues"]:
            lines.append(f"  {_fmt_c(complex(re, im))}")
    if "covariance" in report:
        cov = report["covariance"]
        lines.append(f"Lyapunov residual: {cov['lyapunov_residual']:.3e}")
        lines.append("symplectic spectrum: " + ", ".join(f"{x:.6g}" for x in cov["symplectic_spectrum"]))
        lines.append("bipartite log-negativity:")
        for pair, r in report["bipartite"].items():
            lines.append(f"  E_N[{pair}] = {r['E_N']:.6g}   (nu_min = {r['nu_min']:.6g})")
        lines.append("minimum residual contangle:")
        for opt, r in report["tripartite"].items():
            flag = "" if r["monogamy_ok"] else "  MONOGAMY VIOLATED"
            lines.append(f"  R_min[{opt}|m1|m2] = {r['R_min']:.6g}{flag}")
    dm = report["dark_mode"]
    if "error" in dm:
        lines.append(f"dark mode: {dm['error']}")
    else:
        lines.append(f"dark mode: G+ = {dm['g_plus']:.6g}, "
                     f"G- = {_fmt_c(complex(*dm['g_minus']))}, "
                     f"omega+ = {_fmt_c(complex(*dm['omega_plus']))}, "
                     f"omega- = {_fmt_c(complex(*dm['omega_minus']))}")
        lines.append(f"  optical regime: {dm['optical_regime']}, "
                     f"mechanical dark mode broken: {str(dm['mechanical_dark_broken']).lower()}")
    return "\n".join(lines)


def _format_summary(spec: SweepSpec, summary: dict) -> str:
    lines = [f"scenario {spec.name}: {len(spec.axes)}-axis grid {' x '.join(map(str, spec.shape))}"]
    for name, info in summary.items():
        if "stable_fraction" in info:
            lines.append(f"  {name}: stable fraction {info['stable_fraction']:.3f}")
            continue
        if info.get("max") is None:
            lines.append(f"  {name}: no values")
            continue
        where = ", ".join(f"{k}={_pretty(k, v)}" for k, v in info["argmax"].items())
        lines.append(f"  {name}: max {info['max']:.6g} at {where}")
        if info.get("local_maxima"):
            ax = info["onset_axis"]
            lines.append("    local maxima at " + ", ".join(_pretty(ax, x) for x in info["local_maxima"]))
        if info.get("onset") is not None:
            ax = info["onset_axis"]
            lines.append(f"    first positive along {ax}: {_pretty(ax, info['onset'])}")
        else:
            lines.append(f"    never positive along {info['onset_axis']}")
    return "\n".join(lines)


def _pretty(axis: str, value: float) -> str:
    if axis in ANGLE_AXES:
        return f"{value / math.pi:.4g}pi"
    return f"{value:.6g}"


def _write_outputs(cfg: RunConfig, spec: SweepSpec, records, summary, elapsed) -> list:
    out = Path(cfg.out or f"{spec.name}.{'csv' if cfg.format == 'csv' else 'json'}")
    meta = {
        "library": "omentangle",
        "version": __version__,
        "scenario": spec.name,
        "config": cfg.to_dict(),
        "spec": spec.to_dict(),
        "timing": {
            "total_seconds": elapsed,
            "points": len(records),
            "mean_point_seconds": float(np.mean([r.wall_time for r in records])) if records else 0.0,
        },
        "summary": summary,
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    if cfg.format == "csv":
        out.write_text(to_csv(spec, records), encoding="utf-8")
        side = out.with_name(out.name + ".meta.json")
        side.write_text(json.dumps(meta, indent=2), encoding="utf-8")
        return [out, side]
    out.write_text(json.dumps(to_structured(spec, records, meta), indent=1), encoding="utf-8")
    return [out]


def _run_grid(cfg: RunConfig) -> int:
    spec = cfg.sweep_spec()
    t0 = time.perf_counter()
    records = run_sweep(spec, workers=cfg.workers)
    elapsed = time.perf_counter() - t0
    summary = summarize(spec, records)
    paths = _write_outputs(cfg, spec, records, summary, elapsed)
    print(_format_summary(spec, summary))
    print(f"wrote {', '.join(map(str, paths))} ({len(records)} points, {elapsed:.2f} s)")
    return EXIT_OK


def cmd_point(cfg: RunConfig) -> int:
    report, code = point_report(cfg.system_params(), cfg.tolerances)
    if cfg.format == "structured":
        text = json.dumps(report, indent=2)
    else:
        text = format_point_report(report)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return code


def cmd_scenario(name: str, overrides, cfg: RunConfig | None = None) -> int:
    cfg = cfg or RunConfig()
    cfg.scenario = name
    for ov in overrides:
        cfg.apply_override(ov)
    cfg.validate()
    return _run_grid(cfg)


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path")
    common.add_argument("--format", choices=FORMATS, help="output format")
    common.add_argument("--workers", type=int, help="parallel worker processes")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config value (repeatable)")
    common.add_argument("--radians", action="store_true", help="read angles in radians, not units of pi")

    p = argparse.ArgumentParser(prog="omentangle", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    pp = sub.add_parser("point", parents=[common], help="analyse one parameter point")
    pp.add_argument("config", nargs="?", help="optional config file")
    ps = sub.add_parser("scenario", parents=[common], help="run a named figure scenario")
    ps.add_argument("name")
    pw = sub.add_parser("sweep", parents=[common], help="run a sweep from a config file")
    pw.add_argument("config")
    sub.add_parser("list-scenarios", help="list the named scenarios")
    return p


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = RunConfig.from_ini(text)
    if args.radians:
        cfg.angle_unit = "rad"
    if args.out:
        cfg.out = args.out
    if args.format:
        cfg.format = args.format
    if args.workers is not None:
        cfg.workers = args.workers
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        for name, desc in list_scenarios().items():
            print(f"{name:8s} {desc}")
        return EXIT_OK
    try:
        cfg = _load_config(args)
        if args.command == "scenario":
            if args.name not in list_scenarios():
                raise ConfigError(
                    f"unknown scenario {args.name!r}; available: {', '.join(list_scenarios())}"
                )
            return cmd_scenario(args.name, args.overrides, cfg)
        for ov in args.overrides:
            cfg.apply_override(ov)
        if args.command == "point":
            return cmd_point(cfg)
        return _run_grid(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
