"""Scripted studies: gain sweeps, passivity-constrained tuning and the
three-controller load-mass comparison.

Nothing here draws random numbers; every report is a deterministic function
of its inputs.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, InvariantError, NoFeasiblePoint, SchemaError, SimulationError
from .model import ConfigPreset, SEAConfig, config_to_dict, make_preset, stiffness_tf
from .passivity import PassivityVerdict, closed_form_condition, config_passivity
from .simulator import (
    DEFAULT_DT,
    Metrics,
    load_step_scenario,
    metrics,
    rendered_stiffness_step,
    simulate,
)

SWEEP_CAP = 2.0
BAND_FRACTION = 0.02
SSE_TOLERANCE = 1e-3
# grid points are evaluated in fixed-size batches; pruning uses the incumbent
# known at the start of a batch, so results do not depend on worker count
BATCH = 64

FIG3_CONSTANTS = {"m": 1.0, "b": 10.0, "k1": 1000.0}
FIG3_MASSES = (1.0, 10.0, 25.0)
FIG3_TUNE_MASS = 10.0
FIG3_X0 = 0.5
FIG3_HORIZON = 60.0
FIG3_BOUNDS = {
    "LP": (ConfigPreset.PURE_SPRING_LP, {"cl.kp": (1.0, 2000.0)}),
    "APD": (ConfigPreset.PURE_SPRING_APD, {"ca.kp": (1.0, 1e4), "ca.kv": (0.1, 1e3)}),
    "Ours": (ConfigPreset.COMBINED_APD,
             {"ca.kp": (1.0, 1e4), "ca.kv": (0.1, 1e3), "d1.c": (0.1, 1e3)}),
}

FIG4_CONSTANTS = {"m": 1.0, "b": 10.0, "k1": 1000.0, "b1": 10.0}
FIG4_MASSES = (0.1, 0.6)
FIG4_GAINS = tuple(float(v) for v in np.linspace(0.0, 2000.0, 41))
FIG4_BD = {"LP": 0.0, "Ours": 25.0}
# steady-state error treated as zero in the gain sweep, m
NEGLIGIBLE_ERROR = 1e-5


def _fmt(v: float | None) -> str:
    return "" if v is None else repr(float(v))


# -- sweeps -----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    base: SEAConfig
    parameter: str
    values: tuple[float, ...]
    load_masses: tuple[float, ...]
    x0: float = FIG3_X0
    duration: float = SWEEP_CAP
    dt: float = DEFAULT_DT

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "load_masses", tuple(float(v) for v in self.load_masses))
        if not self.values:
            raise InvariantError("sweep needs at least one value", "values")
        if not all(math.isfinite(v) for v in self.values):
            raise InvariantError("sweep values must be finite", "values")
        if not self.load_masses:
            raise InvariantError("sweep needs at least one load mass", "load_masses")
        if any(not math.isfinite(m) or m < 0 for m in self.load_masses):
            raise InvariantError("load masses must be finite and nonnegative", "load_masses")
        self.base.get(self.parameter)

    def to_dict(self) -> dict:
        return {
            "base": config_to_dict(self.base),
            "parameter": self.parameter,
            "values": list(self.values),
            "load_masses": list(self.load_masses),
            "x0": self.x0,
            "duration": self.duration,
            "dt": self.dt,
        }


@dataclass(frozen=True)
class SweepRow:
    value: float
    mass: float
    metrics: Metrics | None
    verdict: PassivityVerdict | None
    outcome: str = "ok"  # ok, diverged, or an error message

    @property
    def settled(self) -> bool:
        return self.metrics is not None and self.metrics.settled

    def csv_fields(self) -> list[str]:
        m = self.metrics
        ts = "did not settle" if not self.settled else _fmt(m.settling_time)
        return [
            _fmt(self.value), _fmt(self.mass), ts,
            _fmt(m.steady_state_error) if m else "",
            _fmt(m.overshoot) if m else "",
            str(m.oscillation_count) if m else "",
            "" if self.verdict is None else str(self.verdict.passive).lower(),
        ]

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "mass": self.mass,
            "outcome": self.outcome,
            "metrics": None if self.metrics is None else self.metrics.to_dict(),
            "passivity": None if self.verdict is None else self.verdict.to_dict(),
        }


@dataclass
class SweepReport:
    spec: SweepSpec
    rows: list[SweepRow]
    version: str = __version__
    timestamp: str | None = None

    def rows_for(self, mass: float) -> list[SweepRow]:
        return [r for r in self.rows if r.mass == mass]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["param", "mass", "settling_time", "sse", "overshoot", "oscillations", "passive"])
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def to_dict(self) -> dict:
        prov = {"spec": self.spec.to_dict(), "version": self.version}
        if self.timestamp is not None:
            prov["timestamp"] = self.timestamp
        return {"provenance": prov, "rows": [r.to_dict() for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _sweep_row(spec: SweepSpec, mass: float, value: float) -> SweepRow:
    try:
        config = spec.base.with_value(spec.parameter, value)
    except ConfigError as exc:
        return SweepRow(value, mass, None, None, outcome=str(exc))
    verdict = config_passivity(config)
    scenario = load_step_scenario(config, mass, spec.x0, spec.duration, spec.dt)
    try:
        traj = simulate(scenario)
    except SimulationError as exc:
        return SweepRow(value, mass, None, verdict, outcome=f"diverged: {exc}")
    return SweepRow(value, mass, metrics(traj, 0.0, BAND_FRACTION), verdict)


def run_sweep(spec: SweepSpec) -> SweepReport:
    """One row per (mass, value), ordered by mass then value.

    Runs that blow up are kept as "did not settle" rows; a bad parameter
    value only spoils its own row.
    """
    rows = [_sweep_row(spec, mass, v)
            for mass in sorted(spec.load_masses)
            for v in sorted(spec.values)]
    return SweepReport(spec, rows)


def gain_threshold(report: SweepReport, mass: float) -> float | None:
    """Smallest swept value after which no larger value settles, if any run fails."""
    rows = sorted(report.rows_for(mass), key=lambda r: r.value)
    last_ok = None
    for i, r in enumerate(rows):
        if r.settled:
            last_ok = i
    if last_ok is None or last_ok == len(rows) - 1:
        return None
    return rows[last_ok + 1].value


# -- tuning -----------------------------------------------------------------


@dataclass(frozen=True)
class TracePoint:
    gains: tuple[float, ...]
    status: str  # feasible, not passive, marginal, diverged, unsettled, sse, pruned
    settling_time: float | None = None
    steady_state_error: float | None = None

    def to_dict(self, paths: Sequence[str]) -> dict:
        return {
            "gains": dict(zip(paths, self.gains)),
            "status": self.status,
            "settling_time": self.settling_time,
            "steady_state_error": self.steady_state_error,
        }


@dataclass
class TuneResult:
    paths: tuple[str, ...]
    best_gains: dict[str, float]
    objective_value: float
    passivity_margin: str
    config: SEAConfig
    search_trace: list[TracePoint] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "best_gains": self.best_gains,
            "objective_value": self.objective_value,
            "passivity_margin": self.passivity_margin,
            "config": config_to_dict(self.config),
            "evaluated": len(self.search_trace),
            "search_trace": [p.to_dict(self.paths) for p in self.search_trace],
        }


@dataclass(frozen=True)
class _Job:
    template: SEAConfig
    paths: tuple[str, ...]
    load_mass: float
    x0: float
    duration: float
    dt: float
    sse_tol: float


def _apply(template: SEAConfig, paths: Sequence[str], gains: Sequence[float]) -> SEAConfig:
    config = template
    for p, g in zip(paths, gains):
        config = config.with_value(p, g)
    return config


def _evaluate(job: _Job, gains: tuple[float, ...], incumbent: float | None) -> TracePoint:
    config = _apply(job.template, job.paths, gains)
    verdict = config_passivity(config)
    if not verdict.passive:
        return TracePoint(gains, "not passive")
    if verdict.marginal:
        return TracePoint(gains, "marginal")
    scenario = load_step_scenario(config, job.load_mass, job.x0, job.duration, job.dt)
    band = BAND_FRACTION * abs(job.x0)
    try:
        traj = simulate(scenario, prune_after=incumbent, prune_band=band)
    except SimulationError:
        return TracePoint(gains, "diverged")
    if not traj.complete:
        return TracePoint(gains, "pruned")
    m = metrics(traj, 0.0, BAND_FRACTION)
    if not m.settled:
        return TracePoint(gains, "unsettled")
    if m.steady_state_error >= job.sse_tol:
        return TracePoint(gains, "sse", m.settling_time, m.steady_state_error)
    return TracePoint(gains, "feasible", m.settling_time, m.steady_state_error)


def _evaluate_star(args):
    return _evaluate(*args)


def _axis(lo: float, hi: float, n: int) -> np.ndarray:
    if lo > 0:
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _between(a: float, b: float, log: bool) -> float:
    return math.sqrt(a * b) if log else 0.5 * (a + b)


def _better(p: TracePoint, q: TracePoint | None) -> bool:
    if p.status != "feasible":
        return False
    if q is None:
        return True
    return (p.settling_time, p.gains) < (q.settling_time, q.gains)


def _search(job: _Job, points: list[tuple[float, ...]], best: TracePoint | None,
            trace: list[TracePoint], pool) -> TracePoint | None:
    for start in range(0, len(points), BATCH):
        chunk = points[start:start + BATCH]
        inc = None if best is None else best.settling_time
        args = [(job, g, inc) for g in chunk]
        results = list(pool.map(_evaluate_star, args, chunksize=4)) if pool else [_evaluate_star(a) for a in args]
        for r in results:
            trace.append(r)
            if _better(r, best):
                best = r
    return best


def tune_gains(template: SEAConfig, bounds: Mapping[str, tuple[float, float]], load_mass: float,
               points: int = 20, x0: float = FIG3_X0, duration: float = 10.0,
               dt: float = DEFAULT_DT, sse_tol: float = SSE_TOLERANCE,
               workers: int | None = None) -> TuneResult:
    """Minimize 2%-band settling time over a grid of passive gain settings.

    Each axis gets ``points`` values, log-spaced when its lower bound is
    positive. Only strictly (non-marginally) passive configs whose load
    returns with steady-state error below ``sse_tol`` qualify. The coarse
    optimum is then polished on a half-step grid around it. Ties go to the
    lexicographically smaller gain vector.
    """
    if not bounds:
        raise ValueError("no tunable gains given")
    paths = tuple(bounds)
    axes = []
    for p in paths:
        template.get(p)
        lo, hi = (float(v) for v in bounds[p])
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo < 0 or hi <= lo:
            raise SchemaError("bounds must be finite with 0 <= lo < hi", p)
        axes.append(_axis(lo, hi, points))
    job = _Job(template, paths, float(load_mass), x0, duration, dt, sse_tol)
    trace: list[TracePoint] = []
    pool = ProcessPoolExecutor(workers) if workers and workers > 1 else None
    try:
        grid = [tuple(float(v) for v in g) for g in itertools.product(*axes)]
        best = _search(job, grid, None, trace, pool)
        if best is None:
            raise NoFeasiblePoint(f"none of {len(grid)} grid points is passive and settles")
        local = []
        for ax, g in zip(axes, best.gains):
            j = int(np.argmin(np.abs(ax - g)))
            log = ax[0] > 0
            vals = [g]
            if j > 0:
                vals.insert(0, _between(ax[j - 1], g, log))
            if j < len(ax) - 1:
                vals.append(_between(g, ax[j + 1], log))
            local.append(vals)
        refine = [tuple(float(v) for v in g) for g in itertools.product(*local) if g != best.gains]
        best = _search(job, refine, best, trace, pool)
    finally:
        if pool:
            pool.shutdown()
    config = _apply(template, paths, best.gains)
    return TuneResult(
        paths=paths,
        best_gains=dict(zip(paths, best.gains)),
        objective_value=best.settling_time,
        passivity_margin=_margin_description(config),
        config=config,
        search_trace=trace,
    )


def _margin_description(config: SEAConfig) -> str:
    verdict = config_passivity(config)
    text = "numerically passive (strict)" if verdict.passive and not verdict.marginal else "not strictly passive"
    cf = closed_form_condition(config)
    if cf.applicable:
        state = "satisfied" if cf.satisfied else "violated"
        text += f"; closed-form bound {cf.bound_description} {state}"
    return text


# -- reference studies ---------------------------------------------------------


@dataclass
class ComparisonSummary:
    assertions: dict[str, bool]
    table: list[dict]

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def to_dict(self) -> dict:
        return {"assertions": self.assertions, "all_passed": self.passed, "table": self.table}


@dataclass
class Fig3Result:
    tuned: dict[str, TuneResult]
    reports: dict[str, SweepReport]
    summary: ComparisonSummary

    def to_dict(self) -> dict:
        return {
            "tuned": {k: {kk: vv for kk, vv in v.to_dict().items() if kk != "search_trace"}
                      for k, v in self.tuned.items()},
            "reports": {k: v.to_dict() for k, v in self.reports.items()},
            "summary": self.summary.to_dict(),
        }


def fig3_template(name: str) -> SEAConfig:
    preset, bounds = FIG3_BOUNDS[name]
    params = dict(FIG3_CONSTANTS)
    for slot in ("kd", "bd", "b1"):
        if slot in _slots(preset):
            params[slot] = 0.0
    return make_preset(preset, params)


def _slots(preset: ConfigPreset) -> set[str]:
    from .model import PRESET_SLOTS

    return set(PRESET_SLOTS[preset])


def _evaluate_at_masses(config: SEAConfig, parameter: str, masses: Sequence[float],
                        duration: float) -> SweepReport:
    spec = SweepSpec(config, parameter, (config.get(parameter),), tuple(masses),
                     x0=FIG3_X0, duration=duration)
    return run_sweep(spec)


def compare_controllers(reports: Mapping[str, SweepReport], masses: Sequence[float]) -> ComparisonSummary:
    table = []
    for name, rep in reports.items():
        for r in rep.rows:
            m = r.metrics
            table.append({
                "controller": name,
                "mass": r.mass,
                "settling_time": None if not r.settled else m.settling_time,
                "steady_state_error": None if m is None else m.steady_state_error,
                "oscillations": None if m is None else m.oscillation_count,
            })

    def get(name, mass):
        return next(r for r in reports[name].rows if r.mass == mass)

    sse_ok = all(r.settled and r.metrics.steady_state_error < SSE_TOLERANCE
                 for rep in reports.values() for r in rep.rows)
    fastest = True
    for mass in masses:
        ours = get("Ours", mass)
        for base in ("LP", "APD"):
            other = get(base, mass)
            if not ours.settled:
                fastest = False
            elif other.settled and not ours.metrics.settling_time < other.metrics.settling_time:
                fastest = False
    light = min(masses)
    ours = get("Ours", light)
    fewer = ours.metrics is not None and all(
        get(b, light).metrics is not None
        and ours.metrics.oscillation_count <= get(b, light).metrics.oscillation_count
        for b in ("LP", "APD"))
    return ComparisonSummary(
        assertions={
            "steady_state_error_below_1e-3_everywhere": sse_ok,
            "ours_settles_fastest_at_every_mass": fastest,
            "ours_oscillates_least_at_lightest_mass": fewer,
        },
        table=table,
    )


def reproduce_fig3(points: int = 20, horizon: float = FIG3_HORIZON,
                   workers: int | None = None) -> Fig3Result:
    """Tune LP, APD and Ours at 10 kg, then compare all three at 1, 10 and 25 kg."""
    tuned, reports = {}, {}
    for name, (_, bounds) in FIG3_BOUNDS.items():
        res = tune_gains(fig3_template(name), bounds, FIG3_TUNE_MASS, points=points,
                         x0=FIG3_X0, duration=horizon, workers=workers)
        tuned[name] = res
        reports[name] = _evaluate_at_masses(res.config, res.paths[0], FIG3_MASSES, horizon)
    return Fig3Result(tuned, reports, compare_controllers(reports, FIG3_MASSES))


@dataclass
class Fig4Result:
    reports: dict[str, SweepReport]
    thresholds: dict[str, dict[float, float | None]]
    assertions: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.assertions.values())

    def to_dict(self) -> dict:
        return {
            "thresholds": {k: {repr(m): t for m, t in v.items()} for k, v in self.thresholds.items()},
            "assertions": self.assertions,
            "all_passed": self.passed,
            "reports": {k: v.to_dict() for k, v in self.reports.items()},
        }


def fig4_base(name: str) -> tuple[SEAConfig, str]:
    c = FIG4_CONSTANTS
    if name == "LP":
        cfg = make_preset(ConfigPreset.PARALLEL_SPRING_DAMPER_LP, {**c, "kd": 0.0})
        return cfg, "cl.kp"
    cfg = make_preset(ConfigPreset.COMBINED_APD, {**c, "kd": 0.0, "bd": FIG4_BD[name]})
    return cfg, "ca.kp"


def reproduce_fig4(gains: Sequence[float] = FIG4_GAINS, masses: Sequence[float] = FIG4_MASSES,
                   cap: float = SWEEP_CAP) -> Fig4Result:
    """Settling time and steady-state error against controller stiffness."""
    reports = {}
    for name in FIG4_BD:
        base, path = fig4_base(name)
        reports[name] = run_sweep(SweepSpec(base, path, tuple(gains), tuple(masses), duration=cap))
    thresholds = {name: {m: gain_threshold(rep, m) for m in masses} for name, rep in reports.items()}
    ours = reports["Ours"]
    top = max(gains)
    shrinks = True
    for mass in masses:
        rows = ours.rows_for(mass)
        high = [r for r in rows if r.value >= 0.75 * top]
        low = [r for r in rows if r.value <= 0.25 * top]
        if not all(r.settled for r in high + low):
            shrinks = False
            continue
        sse_high = max(r.metrics.steady_state_error for r in high)
        sse_low = max(r.metrics.steady_state_error for r in low)
        shrinks &= sse_high <= sse_low and sse_high < NEGLIGIBLE_ERROR
    assertions = {
        "lp_has_finite_instability_gain": any(t is not None for t in thresholds["LP"].values()),
        "ours_settles_across_range": all(r.settled for r in ours.rows),
        "ours_error_vanishes_at_high_gain": shrinks,
    }
    return Fig4Result(reports, thresholds, assertions)


@dataclass
class StiffnessStudy:
    forces: tuple[float, ...]
    values: tuple[float, ...]
    mean: float
    stdev: float
    dc_prediction: float

    def to_dict(self) -> dict:
        return {
            "forces": list(self.forces),
            "values": list(self.values),
            "mean": self.mean,
            "stdev": self.stdev,
            "dc_prediction": self.dc_prediction,
        }


def reproduce_stiffness_study(config: SEAConfig, forces: Sequence[float],
                              load_mass: float = FIG4_MASSES[1]) -> StiffnessStudy:
    """Rendered stiffness from several force steps, against the transfer function at s=0."""
    if not forces:
        raise InvariantError("need at least one force", "forces")
    vals = tuple(rendered_stiffness_step(config, load_mass, f) for f in forces)
    tf = stiffness_tf(config)
    d0 = tf.den.coeffs[0] if tf.den.coeffs else 0.0
    n0 = tf.num.coeffs[0] if tf.num.coeffs else 0.0
    dc = math.inf if d0 == 0 else n0 / d0
    sd = statistics.stdev(vals) if len(vals) > 1 else 0.0
    return StiffnessStudy(tuple(float(f) for f in forces), vals, statistics.fmean(vals), sd, dc)
