import math

import numpy as np
import pytest

from seakit.errors import DidNotSettle, Diverged, EmptyTrajectory, InvariantError, MasslessLoad
from seakit.model import PRESET_SLOTS, ConfigPreset, make_preset
from seakit.passivity import config_passivity
from seakit.simulator import (
    CSV_HEADER,
    ExternalForce,
    PlantState,
    SimScenario,
    Trajectory,
    derivative,
    load_step_scenario,
    metrics,
    rendered_stiffness_step,
    settling_time,
    simulate,
)

P = ConfigPreset
BASE = {"m": 1.0, "b": 10.0, "k1": 1000.0}


def lp(kd=500.0):
    return make_preset(P.PURE_SPRING_LP, {**BASE, "kd": kd})


def bisect(f, a, b):
    for _ in range(200):
        c = 0.5 * (a + b)
        if (f(a) > 0) == (f(c) > 0):
            a = c
        else:
            b = c
    return 0.5 * (a + b)


def test_derivative_hand_example():
    sc = SimScenario(lp(), 10.0)
    d = derivative(PlantState(x_L=0.5), 0.0, sc)
    assert d.v_A == 250.0
    assert d.v_L == -50.0
    assert d.x_A == 0.0 and d.x_L == 0.0
    assert d.e_int_L == -0.5


def test_derivative_equilibrium_and_massless():
    sc = SimScenario(lp(), 10.0)
    assert derivative(PlantState(), 0.0, sc) == PlantState()
    with pytest.raises(MasslessLoad):
        derivative(PlantState(), 0.0, SimScenario(lp(), 0.0))


def test_zero_trajectory():
    tr = simulate(SimScenario(lp(), 10.0, duration=0.1))
    assert len(tr) == 1001
    assert not np.any(tr.states) and not np.any(tr.actuator_force)


def test_undamped_oscillator_conserves_amplitude():
    cfg = make_preset(P.PURE_SPRING_LP, {"m": 1.0, "b": 0.0, "k1": 1000.0, "kd": 0.0})
    w = math.sqrt(1000.0)
    T = 10 * 2 * math.pi / w
    tr = simulate(SimScenario(cfg, 1e9, initial=PlantState(x_A=0.1), duration=T, dt=1e-4))
    energy = 0.5 * tr.column("v_A") ** 2 + 0.5 * 1000.0 * (tr.x_A - tr.x_L) ** 2
    assert np.max(np.abs(energy / energy[0] - 1)) < 1e-3
    last = tr.x_A[-int(2 * math.pi / w / 1e-4):]
    assert np.max(np.abs(last)) == pytest.approx(0.1, rel=1e-3)


def ap_sdof(omega, zeta_b=0.0):
    return make_preset(P.PURE_SPRING_AP, {"m": 1.0, "b": zeta_b, "k1": 1000.0, "kd": omega**2})


def test_fourth_order_convergence():
    errs = []
    for dt in (4e-4, 2e-4, 1e-4):
        tr = simulate(SimScenario(ap_sdof(100.0), 0.0, initial=PlantState(x_A=0.5, x_L=0.5),
                                  duration=0.5, dt=dt))
        errs.append(np.max(np.abs(tr.x_A - 0.5 * np.cos(100.0 * tr.times))))
    assert 14 < errs[0] / errs[1] < 18
    assert 14 < errs[1] / errs[2] < 18


def test_critically_damped_settling_time():
    cfg = ap_sdof(1.0, 2.0)  # m=1, k=1, b=2
    dt = 1e-3
    tr = simulate(SimScenario(cfg, 0.0, initial=PlantState(x_A=0.5, x_L=0.5), duration=12.0, dt=dt))
    t_star = bisect(lambda t: (1 + t) * math.exp(-t) - 0.02, 1.0, 10.0)
    m = metrics(tr)
    assert abs(m.settling_time - t_star) <= dt
    assert m.overshoot == 0.0 and m.oscillation_count == 0


def test_metrics_on_constant_and_empty():
    t = np.linspace(0, 1, 11)
    flat = Trajectory(t, np.zeros((11, 6)), np.zeros(11), np.zeros(11))
    m = metrics(flat)
    assert m.settling_time == 0.0 and m.steady_state_error == 0.0
    with pytest.raises(EmptyTrajectory):
        metrics(Trajectory(t[:0], np.zeros((0, 6)), t[:0], t[:0]))
    with pytest.raises(ValueError):
        metrics(flat, band_fraction=1.5)


def test_settling_time_helper():
    t = np.arange(6.0)
    assert settling_time(t, np.array([1, 0.5, 0.01, 0.3, 0.01, 0.0]), 0.1) == 4.0
    assert settling_time(t, np.array([1, 1, 1, 1, 1, 1.0]), 0.1) is None
    assert settling_time(t, np.zeros(6), 0.1) == 0.0


def test_load_step_converges_and_counts_oscillations():
    tr = simulate(load_step_scenario(lp(), 1.0, duration=10.0))
    m = metrics(tr)
    assert m.settled and m.steady_state_error < 1e-3
    assert m.oscillation_count > 0
    assert 0 < m.overshoot < 1


def test_linearity():
    a = simulate(load_step_scenario(lp(), 10.0, x0=0.5, duration=1.0))
    b = simulate(load_step_scenario(lp(), 10.0, x0=1.0, duration=1.0))
    assert np.allclose(b.x_L, 2 * a.x_L, rtol=1e-9, atol=1e-15)


def test_determinism():
    sc = load_step_scenario(lp(), 10.0, duration=1.0)
    a, b = simulate(sc), simulate(sc)
    assert np.array_equal(a.states, b.states)
    assert metrics(a) == metrics(b)


def test_force_step_transmits_external_force():
    sc = SimScenario(lp(), 1.0, external_force=ExternalForce.step(10.0), duration=10.0)
    tr = simulate(sc)
    assert tr.transmission_force[-1] == pytest.approx(10.0, rel=1e-4)
    assert tr.x_L[-1] == pytest.approx(10.0 / 500.0, rel=1e-4)


def test_external_force_validation():
    f = ExternalForce(((0.0, 1.0), (1.0, -2.0)))
    assert f(-1.0) == 0.0 and f(0.5) == 1.0 and f(1.0) == -2.0
    with pytest.raises(InvariantError):
        ExternalForce(((1.0, 0.0), (0.5, 1.0)))


def test_scenario_validation():
    with pytest.raises(InvariantError):
        SimScenario(lp(), -1.0)
    with pytest.raises(InvariantError):
        SimScenario(lp(), 1.0, dt=0.0)
    with pytest.raises(InvariantError):
        SimScenario(lp(), 1.0, duration=float("nan"))


def test_divergence_raises():
    # load-side PD with a large damping gain is not passive and blows up on a light load
    cfg = make_preset(P.PURE_SPRING_LPD, {**BASE, "kd": 500.0, "bd": 200.0})
    with pytest.raises(Diverged):
        simulate(load_step_scenario(cfg, 0.1, duration=20.0))


@pytest.mark.parametrize("preset", list(P))
def test_passive_configs_never_diverge(preset):
    rng = np.random.default_rng(500 + list(P).index(preset))
    tried = 0
    while tried < 3:
        p = {s: float(rng.uniform(1.0, 50.0)) for s in PRESET_SLOTS[preset]}
        p.update(m=1.0, b=10.0, k1=1000.0)
        if "kd" in p:
            p["kd"] = float(rng.uniform(0, 1500))
        cfg = make_preset(preset, p)
        v = config_passivity(cfg)
        if not v.passive or v.marginal:
            if preset in (P.PURE_SPRING_LPD, P.PURE_SPRING_LPI, P.PURE_SPRING_API):
                return  # never passive
            continue
        tried += 1
        for mass in (0.1, 1.0, 10.0, 25.0, 100.0):
            tr = simulate(load_step_scenario(cfg, mass, duration=3.0))
            assert np.all(np.isfinite(tr.states))


def test_massless_load_follows_algebraic_balance():
    cfg = make_preset(P.PARALLEL_SPRING_DAMPER_LP, {**BASE, "b1": 10.0, "kd": 500.0})
    sc = SimScenario(cfg, 0.0, external_force=ExternalForce.step(5.0), duration=5.0)
    tr = simulate(sc)
    assert tr.transmission_force[-1] == pytest.approx(5.0, rel=1e-6)
    assert tr.x_L[-1] == pytest.approx(5.0 / 500.0, rel=1e-4)


def test_csv_header_and_precision():
    tr = simulate(load_step_scenario(lp(), 10.0, duration=0.001))
    lines = tr.to_csv().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == len(tr) + 1
    assert float(lines[-1].split(",")[3]) == tr.x_L[-1]


def test_rendered_stiffness():
    assert rendered_stiffness_step(lp(), 0.6, 10.0) == pytest.approx(500.0, rel=1e-4)
    comb = make_preset(P.COMBINED_APD, {**BASE, "b1": 10.0, "kd": 1000.0, "bd": 25.0})
    assert rendered_stiffness_step(comb, 0.6, -5.0) == pytest.approx(500.0, rel=1e-4)
    free = make_preset(P.PURE_SPRING_LP, {**BASE, "kd": 0.0})
    with pytest.raises(DidNotSettle):
        rendered_stiffness_step(free, 0.6, 10.0, max_duration=8.0)
    with pytest.raises(ValueError):
        rendered_stiffness_step(lp(), 0.6, 0.0)
