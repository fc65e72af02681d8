import math

import numpy as np
import pytest

from seakit.errors import NotPassiveAtLow
from seakit.lti import Polynomial, RationalTF
from seakit.model import (
    PRESET_SLOTS,
    ComplianceElement,
    ConfigPreset,
    LinearController,
    SEAConfig,
    impedance_tf,
    make_preset,
    stiffness_tf,
)
from seakit.passivity import (
    catalog_realpart,
    check_positive_real,
    closed_form_condition,
    config_passivity,
    max_passive_gain,
    realpart_poly,
)

P = ConfigPreset
BASE = {"m": 1.0, "b": 10.0, "k1": 1000.0}


def rp_of(cfg):
    return realpart_poly(impedance_tf(stiffness_tf(cfg)))


def test_pure_spring_lp_realpart():
    rp = rp_of(make_preset(P.PURE_SPRING_LP, {**BASE, "kd": 500.0}))
    assert rp.coeffs == pytest.approx((0.0, 5.0e6))


def test_combined_realpart_at_the_bound_violating_example():
    cfg = make_preset(P.COMBINED_APD, {**BASE, "b1": 50.0, "kd": 2000.0, "bd": 25.0})
    rp = rp_of(cfg)
    assert rp.coeffs == pytest.approx((0.0, 2.35e8, -51250.0, 50.0))
    z = impedance_tf(stiffness_tf(cfg))
    for w in np.geomspace(0.1, 1e4, 100):
        num, den = z.num(1j * w), z.den(-1j * w)
        assert rp(w * w) == pytest.approx((num * den).real, rel=1e-9, abs=1e-6 * rp.scale())


def test_combined_realpart_kd_1000():
    rp = rp_of(make_preset(P.COMBINED_APD, {**BASE, "b1": 50.0, "kd": 1000.0, "bd": 25.0}))
    assert rp.coeffs == pytest.approx((0.0, 8.5e7, 48750.0, 50.0))


def test_num_equals_den_gives_modulus_squared():
    d = Polynomial([3.0, 2.0, 1.0])
    rp = realpart_poly(RationalTF(d, d))
    for w in (0.0, 0.5, 2.0, 10.0):
        assert rp(w * w) == pytest.approx(abs(d(1j * w)) ** 2)


@pytest.mark.parametrize("preset", list(P))
def test_catalog_matches_numeric_realpart(preset):
    rng = np.random.default_rng(list(P).index(preset))
    for _ in range(50):
        p = {s: float(rng.uniform(0.5, 50.0)) for s in PRESET_SLOTS[preset]}
        p["k1"] = float(rng.uniform(100, 5000))
        rp = rp_of(make_preset(preset, p))
        want = catalog_realpart(preset, p)
        n = max(len(rp.coeffs), len(want.coeffs))
        a = list(rp.coeffs) + [0.0] * (n - len(rp.coeffs))
        b = list(want.coeffs) + [0.0] * (n - len(want.coeffs))
        bound = list(rp.bound) + [0.0] * (n - len(rp.bound))
        for x, y, z in zip(a, b, bound):
            assert abs(x - y) <= 1e-12 * max(abs(x), abs(y), z)


def test_verdict_examples():
    assert config_passivity(make_preset(P.PURE_SPRING_LP, {**BASE, "kd": 500.0})).passive
    v = config_passivity(make_preset(P.PURE_SPRING_LP, {**BASE, "kd": 1500.0}))
    assert not v.passive and v.violation_band is not None
    assert v.violation_band[0] == 0.0 and math.isinf(v.violation_band[1])
    v = config_passivity(make_preset(P.PURE_SPRING_LPD, {**BASE, "kd": 500.0, "bd": 1.0}))
    assert not v.passive and not v.condition3_nonnegative_real_part
    assert config_passivity(make_preset(P.PURE_SPRING_AP, {**BASE, "kd": 1e4})).passive
    assert config_passivity(
        make_preset(P.COMBINED_APD, {**BASE, "b1": 50.0, "kd": 2000.0, "bd": 25.0})).passive


def test_boundary_is_passive_and_marginal():
    v = config_passivity(make_preset(P.PURE_SPRING_LP, {**BASE, "kd": 1000.0}))
    assert v.passive and v.marginal


def test_double_axis_pole_fails_condition1():
    tf = RationalTF(Polynomial([1.0]), Polynomial([0.0, 0.0, 1.0]))
    v = check_positive_real(tf)
    assert not v.condition1_simple_imaginary_poles and not v.passive


def test_unstable_den_fails_condition2():
    tf = RationalTF(Polynomial([1.0, 1.0]), Polynomial([-1.0, 1.0]))
    v = check_positive_real(tf)
    assert not v.condition2_stable and not v.passive


def test_closed_form_examples():
    cf = closed_form_condition(make_preset(P.PURE_SPRING_LP, {**BASE, "kd": 1000.0}))
    assert cf.applicable and cf.satisfied and cf.numeric_bound == 1000.0
    cf = closed_form_condition(make_preset(P.COMBINED_APD, {**BASE, "b1": 50.0, "kd": 0.0, "bd": 25.0}))
    assert cf.numeric_bound == pytest.approx(1487.5)
    odd = SEAConfig(m=1.0, b=10.0, d1=ComplianceElement(1000.0), d2=ComplianceElement(100.0, 5.0),
                    cl=LinearController(kp=100.0, ki=10.0))
    cf = closed_form_condition(odd)
    assert not cf.applicable and cf.satisfied is None


def draw(rng, preset):
    p = {s: float(np.exp(rng.uniform(np.log(0.1), np.log(1e3)))) for s in PRESET_SLOTS[preset]}
    p["k1"] = float(np.exp(rng.uniform(np.log(10), np.log(1e4))))
    p["m"] = float(np.exp(rng.uniform(np.log(0.1), np.log(10))))
    if "kd" in p:
        p["kd"] = float(rng.uniform(0, 3 * p["k1"]))
    return p


@pytest.mark.parametrize("preset", list(P))
def test_closed_form_sufficient(preset):
    rng = np.random.default_rng(100 + list(P).index(preset))
    for _ in range(1000):
        cfg = make_preset(preset, draw(rng, preset))
        cf = closed_form_condition(cfg)
        if not cf.satisfied:
            continue
        if cf.numeric_bound and math.isfinite(cf.numeric_bound):
            if abs(cfg.get(_kd_path(preset)) - cf.numeric_bound) <= 1e-6 * cf.numeric_bound:
                continue
        assert config_passivity(cfg).passive


def _kd_path(preset):
    return PRESET_SLOTS[preset]["kd"]


@pytest.mark.parametrize("preset", [P.PURE_SPRING_LP, P.SPRING_SPRING_LP, P.PURE_SPRING_AP,
                                    P.PURE_SPRING_APD])
def test_single_term_conditions_are_exact(preset):
    rng = np.random.default_rng(200 + list(P).index(preset))
    for _ in range(500):
        cfg = make_preset(preset, draw(rng, preset))
        cf = closed_form_condition(cfg)
        b = cf.numeric_bound
        if b and math.isfinite(b) and abs(cfg.get(_kd_path(preset)) - b) <= 1e-6 * b:
            continue
        assert cf.satisfied == config_passivity(cfg).passive


def test_even_polynomial_invariant():
    rng = np.random.default_rng(7)
    for _ in range(200):
        num = Polynomial(rng.normal(size=int(rng.integers(1, 6))))
        den = Polynomial(rng.normal(size=int(rng.integers(2, 7))))
        if den.is_zero:
            continue
        realpart_poly(RationalTF(num, den))  # raises if odd powers survive


@pytest.mark.parametrize("preset", list(P))
def test_scaling_invariance_and_perturbation(preset):
    rng = np.random.default_rng(300 + list(P).index(preset))
    for _ in range(100):
        z = impedance_tf(stiffness_tf(make_preset(preset, draw(rng, preset))))
        v = check_positive_real(z)
        c = float(np.exp(rng.uniform(-5, 5)))
        scaled = RationalTF(Polynomial(np.array(z.num.coeffs) * c), Polynomial(np.array(z.den.coeffs) * c))
        assert check_positive_real(scaled).passive == v.passive
        if v.marginal:
            continue
        bump = lambda p: Polynomial(np.array(p.coeffs) * (1 + 1e-10 * rng.choice([-1, 1], len(p.coeffs))))  # noqa: E731
        assert check_positive_real(RationalTF(bump(z.num), bump(z.den))).passive == v.passive


def test_max_passive_gain():
    lp = make_preset(P.PURE_SPRING_LP, {**BASE, "kd": 0.0})
    assert max_passive_gain(lp, "cl.kp", (0.0, 5000.0)) == pytest.approx(1000.0, rel=1e-3)
    ap = make_preset(P.PURE_SPRING_AP, {**BASE, "kd": 0.0})
    assert math.isinf(max_passive_gain(ap, "ca.kp", (0.0, 1e6)))
    comb = make_preset(P.COMBINED_APD, {**BASE, "b1": 50.0, "kd": 0.0, "bd": 25.0})
    assert max_passive_gain(comb, "ca.kp", (0.0, 1e5)) >= 1487.5
    with pytest.raises(NotPassiveAtLow):
        max_passive_gain(lp, "cl.kp", (2000.0, 5000.0))
