"""``sea`` command-line front end.

Exit codes: 0 success (or passive), 1 usage/IO/parse error,
2 analyzed and not passive, 3 a reproduction assertion failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PoleOnAxis, SeakitError
from .experiments import (
    FIG3_MASSES,
    SWEEP_CAP,
    SweepSpec,
    reproduce_fig3,
    reproduce_fig4,
    reproduce_stiffness_study,
    run_sweep,
    tune_gains,
)
from .lti import freq_response
from .model import ConfigPreset, apply_overrides, make_preset, parse_config, stiffness_tf
from .passivity import closed_form_condition, config_passivity
from .simulator import (
    DEFAULT_DT,
    DEFAULT_DURATION,
    ExternalForce,
    PlantState,
    SimScenario,
    metrics,
    rendered_stiffness_step,
    simulate,
)
from .svg import line_plot

EXIT_OK, EXIT_ERROR, EXIT_NOT_PASSIVE, EXIT_ASSERTION = 0, 1, 2, 3

DEFAULT_STIFFNESS_CONFIG = {"m": 1.0, "b": 10.0, "k1": 1000.0, "b1": 10.0, "kd": 1000.0, "bd": 25.0}
DEFAULT_STIFFNESS_FORCES = (2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which collides with "not passive"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _finite_or_none(v):
    return None if v is None or not math.isfinite(v) else v


def parse_overrides(items) -> dict[str, float]:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep or not key:
            raise UsageError(f"override must look like path=value, got {item!r}")
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise UsageError(f"override value for {key} is not a number: {val!r}") from None
    return out


def load_config(args):
    if not args.config:
        raise UsageError("--config is required")
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc.strerror}: {args.config}") from None
    config = parse_config(text)
    return apply_overrides(config, parse_overrides(args.override))


def _emit(args, name: str, text: str) -> Path | None:
    if args.out is None:
        return None
    path = Path(args.out) / name
    write_atomic(path, text)
    return path


# -- subcommands --------------------------------------------------------------


def cmd_analyze(args) -> int:
    config = load_config(args)
    verdict = config_passivity(config)
    doc = {"passivity": verdict.to_dict(), "closed_form": closed_form_condition(config).to_dict()}
    text = dumps(doc)
    _emit(args, "analysis.json", text)
    sys.stdout.write(text)
    return EXIT_OK if verdict.passive else EXIT_NOT_PASSIVE


def bode_rows(config, omega_min: float, omega_max: float, points: int):
    tf = stiffness_tf(config)
    rows = []
    for w in np.geomspace(omega_min, omega_max, points):
        try:
            h = freq_response(tf, [w])[0]
        except PoleOnAxis:
            rows.append((float(w), None, None))
            continue
        rows.append((float(w), float(abs(h)), float(np.degrees(np.angle(h)))))
    return rows


def cmd_bode(args) -> int:
    if not (0 < args.omega_min < args.omega_max) or not math.isfinite(args.omega_max):
        raise UsageError("need 0 < --omega-min < --omega-max")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    rows = bode_rows(load_config(args), args.omega_min, args.omega_max, args.points)
    lines = ["omega,magnitude,phase_deg"]
    for w, mag, ph in rows:
        lines.append(",".join("" if v is None else repr(v) for v in (w, mag, ph)))
    text = "\n".join(lines) + "\n"
    if _emit(args, "bode.csv", text) is None:
        sys.stdout.write(text)
    else:
        print(f"bode: {len(rows)} rows written to {Path(args.out) / 'bode.csv'}")
    if args.svg:
        svg = line_plot([r[0] for r in rows], [r[1] for r in rows], title="rendered stiffness",
                        xlabel="omega [rad/s]", ylabel="|F_L/X_L| [N/m]", logx=True, logy=True)
        _emit(args, "bode.svg", svg)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = load_config(args)
    force = ExternalForce() if not args.force else ExternalForce.step(args.force)
    scenario = SimScenario(config, args.mass, initial=PlantState(x_L=args.step),
                           external_force=force, duration=args.duration, dt=args.dt)
    traj = simulate(scenario)
    m = metrics(traj)
    _emit(args, "trajectory.csv", traj.to_csv())
    _emit(args, "metrics.json", dumps(m.to_dict()))
    if args.svg:
        _emit(args, "trajectory.svg", line_plot(traj.times, traj.x_L, title="load position",
                                                xlabel="t [s]", ylabel="x_L [m]"))
    final = traj.x_L[-1]
    ts = m.to_dict()["settling_time"]
    print(f"simulate: {len(traj)} samples, final x_L={final:.6g} m, settling_time={ts}")
    return EXIT_OK


def cmd_stiffness(args) -> int:
    config = load_config(args)
    force = args.force if args.force else 10.0
    value = rendered_stiffness_step(config, args.mass, force, dt=args.dt)
    tf = stiffness_tf(config)
    d0 = tf.den.coeffs[0] if tf.den.coeffs else 0.0
    dc = math.inf if d0 == 0 else (tf.num.coeffs[0] if tf.num.coeffs else 0.0) / d0
    doc = {"force": force, "load_mass": args.mass, "rendered_stiffness": _finite_or_none(value),
           "dc_prediction": _finite_or_none(dc)}
    _emit(args, "stiffness.json", dumps(doc))
    print(f"stiffness: rendered {value:.6g} N/m, transfer function at s=0 {dc:.6g} N/m")
    return EXIT_OK


def _float_list(text: str, flag: str) -> list[float]:
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            return [float(v) for v in np.linspace(float(lo), float(hi), int(n))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{flag} expects a,b,c or lo:hi:n, got {text!r}") from None


def cmd_sweep(args) -> int:
    config = load_config(args)
    if not args.param:
        raise UsageError("--param is required")
    values = _float_list(args.values, "--values") if args.values else []
    masses = _float_list(args.masses, "--masses") if args.masses else [args.mass]
    spec = SweepSpec(config, args.param, tuple(values), tuple(masses), x0=args.step,
                     duration=args.duration if args.duration is not None else SWEEP_CAP, dt=args.dt)
    report = run_sweep(spec)
    report.timestamp = os.environ.get("SOURCE_DATE_EPOCH")
    _emit(args, "sweep.csv", report.to_csv())
    _emit(args, "sweep.json", report.to_json() + "\n")
    if args.svg:
        for mass in spec.load_masses:
            rows = report.rows_for(mass)
            _emit(args, f"sweep_m{mass:g}.svg", line_plot(
                [r.value for r in rows],
                [r.metrics.settling_time if r.settled else None for r in rows],
                title=f"settling time, load {mass:g} kg", xlabel=args.param, ylabel="t_s [s]"))
    bad = sum(1 for r in report.rows if not r.settled)
    print(f"sweep: {len(report.rows)} rows, {bad} did not settle")
    return EXIT_OK


def _parse_bounds(items) -> dict[str, tuple[float, float]]:
    bounds = {}
    for item in items or ():
        key, sep, rng = item.partition("=")
        lo, sep2, hi = rng.partition(":")
        try:
            if not (sep and sep2):
                raise ValueError
            bounds[key] = (float(lo), float(hi))
        except ValueError:
            raise UsageError(f"--gain expects path=lo:hi, got {item!r}") from None
    if not bounds:
        raise UsageError("at least one --gain path=lo:hi is required")
    return bounds


def cmd_tune(args) -> int:
    config = load_config(args)
    bounds = _parse_bounds(args.gain)
    duration = args.duration if args.duration is not None else DEFAULT_DURATION
    res = tune_gains(config, bounds, args.mass, points=args.points, x0=args.step,
                     duration=duration, dt=args.dt)
    _emit(args, "tune.json", dumps(res.to_dict()))
    gains = ", ".join(f"{k}={v:.6g}" for k, v in res.best_gains.items())
    print(f"tune: {gains}; settling time {res.objective_value:.4f} s")
    return EXIT_OK


def _reproduce_fig3(args) -> int:
    res = reproduce_fig3(points=args.points)
    _emit(args, "fig3_summary.json", dumps(res.to_dict()))
    for name, rep in res.reports.items():
        _emit(args, f"fig3_{name}.csv", rep.to_csv())
    if args.svg:
        for name, tuned in res.tuned.items():
            for mass in FIG3_MASSES:
                sc = SimScenario(tuned.config, mass, initial=PlantState(x_L=0.5), duration=10.0)
                traj = simulate(sc)
                step = max(1, len(traj) // 2000)
                _emit(args, f"fig3_{name}_m{mass:g}.svg", line_plot(
                    traj.times[::step], traj.x_L[::step], title=f"{name}, load {mass:g} kg",
                    xlabel="t [s]", ylabel="x_L [m]"))
    sys.stdout.write(dumps(res.summary.assertions))
    return EXIT_OK if res.summary.passed else EXIT_ASSERTION


def _reproduce_fig4(args) -> int:
    res = reproduce_fig4()
    _emit(args, "fig4_summary.json", dumps({k: v for k, v in res.to_dict().items() if k != "reports"}))
    for name, rep in res.reports.items():
        _emit(args, f"fig4_{name}.csv", rep.to_csv())
        if args.svg:
            for mass in rep.spec.load_masses:
                rows = rep.rows_for(mass)
                _emit(args, f"fig4_{name}_m{mass:g}.svg", line_plot(
                    [r.value for r in rows],
                    [r.metrics.settling_time if r.settled else None for r in rows],
                    title=f"{name}, load {mass:g} kg", xlabel="kd [N/m]", ylabel="t_s [s]"))
    sys.stdout.write(dumps(res.assertions))
    return EXIT_OK if res.passed else EXIT_ASSERTION


def _reproduce_stiffness(args) -> int:
    if args.config:
        config = load_config(args)
    else:
        config = apply_overrides(make_preset(ConfigPreset.COMBINED_APD, DEFAULT_STIFFNESS_CONFIG),
                                 parse_overrides(args.override))
    study = reproduce_stiffness_study(config, DEFAULT_STIFFNESS_FORCES, load_mass=args.mass)
    doc = study.to_dict()
    agree = math.isfinite(study.dc_prediction) and abs(study.mean - study.dc_prediction) <= 0.01 * abs(study.dc_prediction)
    doc["assertions"] = {"matches_dc_prediction_within_1pct": agree}
    _emit(args, "stiffness_study.json", dumps(doc))
    print(f"stiffness study: {study.mean:.6g} +/- {study.stdev:.3g} N/m "
          f"(transfer function at s=0: {study.dc_prediction:.6g} N/m)")
    return EXIT_OK if agree else EXIT_ASSERTION


REPRODUCTIONS = {"fig3": _reproduce_fig3, "fig4": _reproduce_fig4, "stiffness": _reproduce_stiffness}


def cmd_reproduce(args) -> int:
    return REPRODUCTIONS[args.study](args)


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sea", description="SEA passivity analysis and simulation")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--out", help="output directory (analyze/bode: stdout only; others: .)")
        p.add_argument("--override", action="append", metavar="PATH=VALUE",
                       help="replace a numeric config field, e.g. ca.kp=750")
        p.add_argument("--svg", action="store_true", help="also write SVG plots")

    def sim_flags(p, duration=None):
        p.add_argument("--mass", type=float, default=10.0, help="load mass [kg]")
        p.add_argument("--dt", type=float, default=DEFAULT_DT)
        p.add_argument("--duration", type=float, default=duration)
        p.add_argument("--step", type=float, default=0.5, help="initial load displacement [m]")
        p.add_argument("--force", type=float, default=0.0, help="external force step [N]")

    p = sub.add_parser("analyze", help="passivity verdict")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bode", help="frequency response of the rendered stiffness")
    common(p)
    p.add_argument("--omega-min", type=float, default=1e-2)
    p.add_argument("--omega-max", type=float, default=1e4)
    p.add_argument("--points", type=int, default=400)
    p.set_defaults(func=cmd_bode)

    p = sub.add_parser("simulate", help="load-step simulation")
    common(p)
    sim_flags(p, DEFAULT_DURATION)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stiffness", help="rendered stiffness from a force step")
    common(p)
    sim_flags(p)
    p.set_defaults(func=cmd_stiffness)

    p = sub.add_parser("sweep", help="settling time over a parameter sweep")
    common(p)
    sim_flags(p)
    p.add_argument("--param", help="dotted config path, e.g. ca.kp")
    p.add_argument("--values", help="a,b,c or lo:hi:n")
    p.add_argument("--masses", help="load masses a,b,c (default: --mass)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("tune", help="passivity-constrained gain search")
    common(p)
    sim_flags(p)
    p.add_argument("--gain", action="append", metavar="PATH=LO:HI", help="tunable gain and bounds")
    p.add_argument("--points", type=int, default=20, help="grid points per axis")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("reproduce", help="rerun a study and check its assertions")
    p.add_argument("study", choices=sorted(REPRODUCTIONS))
    common(p, config_required=False)
    p.add_argument("--points", type=int, default=20, help="tuning grid points per axis (fig3)")
    p.add_argument("--mass", type=float, default=0.6, help="load mass for the stiffness study [kg]")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out is None and args.command not in ("analyze", "bode"):
        args.out = "."
    try:
        return args.func(args)
    except (UsageError, SeakitError, OSError) as exc:
        msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"sea: error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
