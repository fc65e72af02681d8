"""Time-domain simulation of the SEA driving a pure load mass.

Force convention: the port force ``f_L = D1(x_L - x_A) + D2 x_L`` acts on the
actuator (``m a_A = f_A - b v_A + f_L``) and, with opposite sign, on the load
(``m_L a_L = f_ext - f_L``). Both controllers push on the actuator. Setting
``load_mass = 0`` replaces the load equation by the static balance
``f_L = f_ext``.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _backend
from ._kernel_py import N_PARAMS, _deriv
from .errors import (
    DidNotSettle,
    Diverged,
    EmptyTrajectory,
    InvariantError,
    MasslessLoad,
    NonFiniteState,
)
from .model import SEAConfig, stiffness_tf

DIVERGENCE_LIMIT = 1e6
DEFAULT_DT = 1e-4
DEFAULT_DURATION = 10.0
# sign changes smaller than this fraction of the initial displacement are noise
OSCILLATION_DEADBAND = 1e-6

STATE_FIELDS = ("x_A", "v_A", "x_L", "v_L", "e_int_A", "e_int_L")
CSV_HEADER = ("t", "x_A", "v_A", "x_L", "v_L", "f_actuator", "f_transmission")


class UnreliableResult(RuntimeWarning):
    """Emitted when a time-domain measurement is taken on a non-passive config."""


@dataclass(frozen=True)
class PlantState:
    x_A: float = 0.0
    v_A: float = 0.0
    x_L: float = 0.0
    v_L: float = 0.0
    e_int_A: float = 0.0
    e_int_L: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in STATE_FIELDS], dtype=float)

    @classmethod
    def from_array(cls, values: Sequence[float]) -> "PlantState":
        return cls(*(float(v) for v in values))


@dataclass(frozen=True)
class ExternalForce:
    """Piecewise-constant force: ``value`` holds from its time until the next breakpoint.

    Before the first breakpoint the force is zero.
    """

    breakpoints: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        pts = tuple((float(t), float(v)) for t, v in self.breakpoints)
        times = [t for t, _ in pts]
        if any(not (math.isfinite(t) and math.isfinite(v)) for t, v in pts):
            raise InvariantError("breakpoints must be finite", "external_force")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvariantError("breakpoint times must be strictly increasing", "external_force")
        object.__setattr__(self, "breakpoints", pts)

    @classmethod
    def step(cls, value: float, at: float = 0.0) -> "ExternalForce":
        return cls(((at, value),))

    def __call__(self, t: float) -> float:
        val = 0.0
        for bt, bv in self.breakpoints:
            if bt <= t:
                val = bv
            else:
                break
        return val

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.breakpoints:
            return np.zeros(1), np.zeros(1)
        t, v = zip(*self.breakpoints)
        return np.array(t, dtype=float), np.array(v, dtype=float)


@dataclass(frozen=True)
class SimScenario:
    config: SEAConfig
    load_mass: float
    theta_A: float = 0.0
    theta_L: float = 0.0
    initial: PlantState = field(default_factory=PlantState)
    external_force: ExternalForce = field(default_factory=ExternalForce)
    duration: float = DEFAULT_DURATION
    dt: float = DEFAULT_DT

    def __post_init__(self):
        for name in ("load_mass", "theta_A", "theta_L", "duration", "dt"):
            if not math.isfinite(getattr(self, name)):
                raise InvariantError("must be finite", name)
        if self.load_mass < 0:
            raise InvariantError("load mass must be nonnegative", "load_mass")
        if self.duration <= 0:
            raise InvariantError("duration must be positive", "duration")
        if not 0 < self.dt <= self.duration:
            raise InvariantError("need 0 < dt <= duration", "dt")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.duration / self.dt)))

    def params(self) -> np.ndarray:
        c = self.config
        p = np.array([
            c.m, c.b, c.d1.k, c.d1.c, c.d2.k, c.d2.c,
            c.ca.kp, c.ca.kv, c.ca.ki, c.cl.kp, c.cl.kv, c.cl.ki,
            self.theta_A, self.theta_L, self.load_mass,
        ], dtype=float)
        assert p.size == N_PARAMS
        return p


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n, 6) in STATE_FIELDS order
    actuator_force: np.ndarray
    transmission_force: np.ndarray
    complete: bool = True  # False when integration was cut short on purpose

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        return self.states[:, STATE_FIELDS.index(name)]

    @property
    def x_A(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def x_L(self) -> np.ndarray:
        return self.states[:, 2]

    def state(self, i: int) -> PlantState:
        return PlantState.from_array(self.states[i])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        cols = np.column_stack([self.times, self.states[:, :4],
                                self.actuator_force, self.transmission_force])
        for row in cols:
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()


def derivative(state: PlantState, t: float, scenario: SimScenario) -> PlantState:
    """Time-derivative of ``state``; only defined for a load with mass."""
    if scenario.load_mass == 0:
        raise MasslessLoad("load mass is zero; simulate() uses the algebraic variant")
    out = [0.0] * 6
    _deriv(list(scenario.params()), list(state.as_array()),
           scenario.external_force(t), out)
    return PlantState.from_array(out)


def simulate(scenario: SimScenario, *, prune_after: float | None = None,
             prune_band: float = 0.0, prune_ref: float = 0.0) -> Trajectory:
    """Classical RK4 at fixed step ``scenario.dt`` over ``scenario.duration``.

    With ``prune_after`` set, integration stops once ``t > prune_after`` and
    ``|x_L - prune_ref| > prune_band``; the truncated trajectory comes back
    with ``complete=False``. Search loops use this to drop candidates that
    cannot beat an incumbent.
    """
    ft, fv = scenario.external_force.arrays()
    n = scenario.n_steps
    states, forces, done, status = _backend.integrate(
        scenario.params(), scenario.initial.as_array(), ft, fv,
        scenario.dt, n, DIVERGENCE_LIMIT, prune_ref, prune_band,
        -1.0 if prune_after is None else float(prune_after))
    if status == _backend.DIVERGED:
        raise Diverged(f"state exceeded {DIVERGENCE_LIMIT:g} at t={done * scenario.dt:.4f} s")
    if status == _backend.NONFINITE:
        raise NonFiniteState(f"non-finite state at t={done * scenario.dt:.4f} s")
    k = done + 1
    if k < len(states):
        # drop the untouched tail of the output buffers
        states, forces = states[:k].copy(), forces[:k].copy()
    return Trajectory(
        times=np.arange(k) * scenario.dt,
        states=states,
        actuator_force=forces[:, 0],
        transmission_force=forces[:, 1],
        complete=status == _backend.OK,
    )


@dataclass(frozen=True)
class Metrics:
    settling_time: float | None
    steady_state_error: float | None
    overshoot: float
    oscillation_count: int

    @property
    def settled(self) -> bool:
        return self.settling_time is not None

    def to_dict(self) -> dict:
        return {
            "settling_time": "did not settle" if self.settling_time is None else self.settling_time,
            "steady_state_error": self.steady_state_error,
            "overshoot": self.overshoot,
            "oscillation_count": self.oscillation_count,
        }


def settling_time(times: np.ndarray, error: np.ndarray, band: float) -> float | None:
    """First time after which ``|error| <= band`` for the rest of the record."""
    outside = np.flatnonzero(np.abs(error) > band)
    if outside.size == 0:
        return 0.0
    k = outside[-1] + 1
    return float(times[k]) if k < len(times) else None


def count_sign_changes(error: np.ndarray, deadband: float) -> int:
    signs = np.where(error > deadband, 1, np.where(error < -deadband, -1, 0))
    signs = signs[signs != 0]
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def metrics(traj: Trajectory, reference: float = 0.0, band_fraction: float = 0.02,
            deadband_fraction: float = OSCILLATION_DEADBAND) -> Metrics:
    """Settling, steady-state error, overshoot and oscillations of ``x_L``.

    The band is ``band_fraction`` times the initial displacement from
    ``reference``; when the load starts on the reference, the peak excursion
    is used instead.
    """
    if not 0 < band_fraction < 1:
        raise ValueError("band_fraction must lie in (0, 1)")
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    err = traj.x_L - reference
    scale = float(abs(err[0]))
    sign0 = 1.0 if err[0] >= 0 else -1.0
    if scale == 0.0:
        scale = float(np.max(np.abs(err)))
        sign0 = 0.0
    if scale == 0.0:
        return Metrics(0.0, 0.0, 0.0, 0)
    ts = settling_time(traj.times, err, band_fraction * scale) if traj.complete else None
    sse = None
    if ts is not None:
        tail = max(1, int(math.ceil(0.05 * len(err))))
        sse = float(np.mean(np.abs(err[-tail:])))
    over = max(0.0, float(np.max(-sign0 * err))) / scale if sign0 else 0.0
    osc = count_sign_changes(err, deadband_fraction * scale)
    return Metrics(ts, sse, over, osc)


def load_step_scenario(config: SEAConfig, load_mass: float, x0: float = 0.5,
                       duration: float = DEFAULT_DURATION, dt: float = DEFAULT_DT) -> SimScenario:
    """Load displaced by ``x0`` with every other state and setpoint at zero."""
    return SimScenario(config, load_mass, initial=PlantState(x_L=x0), duration=duration, dt=dt)


def _dc_value(config: SEAConfig) -> float:
    tf = stiffness_tf(config)
    d0 = tf.den.coeffs[0] if tf.den.coeffs else 0.0
    n0 = tf.num.coeffs[0] if tf.num.coeffs else 0.0
    return math.inf if d0 == 0 else n0 / d0


def rendered_stiffness_step(config: SEAConfig, load_mass: float, force: float,
                            dt: float = DEFAULT_DT, duration: float = 2.0,
                            max_duration: float = 256.0, rtol: float = 1e-5) -> float:
    """Static stiffness ``force / x_L`` measured from a simulated force step.

    The horizon doubles until ``x_L`` is flat to ``rtol`` over the final
    fifth. Configs that hold the load at zero deflection (load-side integral
    action) return ``inf`` without simulating.
    """
    if force == 0 or not math.isfinite(force):
        raise ValueError("force must be finite and nonzero")
    from .passivity import config_passivity

    verdict = config_passivity(config)
    if not verdict.passive or verdict.marginal:
        warnings.warn(f"config is not strictly passive; stiffness of {config.label or 'config'} "
                      "may be meaningless", UnreliableResult, stacklevel=2)
    if math.isinf(_dc_value(config)):
        return math.inf
    T = duration
    while T <= max_duration:
        sc = SimScenario(config, load_mass, external_force=ExternalForce.step(force),
                         duration=T, dt=dt)
        traj = simulate(sc)
        x = traj.x_L
        tail = x[-max(2, len(x) // 5):]
        xs = float(np.mean(x[-max(1, len(x) // 20):]))
        if xs != 0.0 and float(np.max(np.abs(tail - xs))) <= rtol * abs(xs):
            return force / xs
        T *= 2
    raise DidNotSettle(f"load deflection still drifting after {max_duration:g} s")
