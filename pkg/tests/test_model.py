import json

import pytest

from seakit.errors import (
    ExtraParameter,
    InvariantError,
    MissingParameter,
    NegativeParameter,
    ParseError,
    SchemaError,
)
from seakit.model import (
    PRESET_SLOTS,
    ConfigPreset,
    apply_overrides,
    config_to_dict,
    make_preset,
    match_preset,
    parse_config,
    preset_params,
    serialize_config,
    stiffness_tf,
)

BASE = {"m": 1.0, "b": 10.0, "k1": 1000.0}
EXTRA = {"k2": 300.0, "b1": 20.0, "b2": 5.0, "kd": 500.0, "bd": 25.0, "id": 40.0}


def params_for(preset):
    return {s: BASE.get(s, EXTRA.get(s)) for s in PRESET_SLOTS[preset]}


@pytest.mark.parametrize("preset", list(ConfigPreset))
def test_preset_round_trip(preset):
    cfg = make_preset(preset, params_for(preset))
    assert match_preset(cfg) is preset
    assert preset_params(preset, cfg) == params_for(preset)
    again = parse_config(serialize_config(cfg))
    assert again == cfg


@pytest.mark.parametrize("preset", list(ConfigPreset))
def test_serialization_is_deterministic(preset):
    cfg = make_preset(preset, params_for(preset))
    assert serialize_config(cfg) == serialize_config(parse_config(serialize_config(cfg)))


def test_dc_stiffness_of_common_presets():
    def dc(preset, **kw):
        tf = stiffness_tf(make_preset(preset, {**BASE, **kw}))
        return tf.num.coeffs[0] / tf.den.coeffs[0]

    assert dc("PureSpring-LP", kd=500.0) == pytest.approx(500.0)
    assert dc("SpringSpring-LP", k2=300.0, kd=500.0) == pytest.approx(500.0)
    assert dc("PureSpring-AP", kd=500.0) == pytest.approx(1000 * 500 / 1500)
    assert dc("Combined-APD", b1=10.0, kd=1000.0, bd=25.0) == pytest.approx(500.0)


def test_stiffness_tf_no_control_is_spring_behind_mass():
    cfg = make_preset("PureSpring-LP", {**BASE, "kd": 0.0})
    tf = stiffness_tf(cfg)
    s = 3.0j
    alpha = 1.0 * s**2 + 10.0 * s
    assert tf(s) == pytest.approx(1000 * alpha / (alpha + 1000))


def test_integral_tf_is_cleared_by_s():
    tf = stiffness_tf(make_preset("PureSpring-API", {**BASE, "kd": 500.0, "id": 40.0}))
    s = 2.0 + 1.0j
    alpha = s * s + 10 * s
    ca = 500 + 40 / s
    assert tf(s) == pytest.approx(1000 * (alpha + ca) / (alpha + ca + 1000))


def test_preset_errors():
    with pytest.raises(MissingParameter) as exc:
        make_preset("PureSpring-LP", BASE)
    assert exc.value.path == "kd"
    with pytest.raises(ExtraParameter):
        make_preset("PureSpring-LP", {**BASE, "kd": 1.0, "bd": 1.0})
    with pytest.raises(NegativeParameter):
        make_preset("PureSpring-LP", {**BASE, "kd": -1.0})
    with pytest.raises(ValueError):
        make_preset("NoSuchPreset", BASE)


def test_config_invariants():
    with pytest.raises(InvariantError):
        make_preset("PureSpring-LP", {**BASE, "m": 0.0, "kd": 1.0})
    with pytest.raises(InvariantError):
        make_preset("PureSpring-LP", {**BASE, "k1": 0.0, "kd": 1.0})


def doc():
    return config_to_dict(make_preset("PureSpring-LP", {**BASE, "kd": 500.0}))


def test_parse_errors_carry_paths():
    with pytest.raises(ParseError):
        parse_config("{not json")
    d = doc()
    del d["d1"]["k"]
    with pytest.raises(SchemaError) as exc:
        parse_config(json.dumps(d))
    assert exc.value.path == "d1.k"
    d = doc()
    d["cl"]["kp"] = "fast"
    with pytest.raises(SchemaError) as exc:
        parse_config(json.dumps(d))
    assert exc.value.path == "cl.kp"
    d = doc()
    d["extra"] = 1
    with pytest.raises(SchemaError):
        parse_config(json.dumps(d))
    d = doc()
    d["ca"]["kv"] = -1
    with pytest.raises(InvariantError) as exc:
        parse_config(json.dumps(d))
    assert exc.value.path == "ca.kv"


def test_overrides():
    cfg = make_preset("PureSpring-LP", {**BASE, "kd": 500.0})
    out = apply_overrides(cfg, {"cl.kp": 700.0, "b": 5.0})
    assert out.cl.kp == 700.0 and out.b == 5.0
    with pytest.raises(SchemaError):
        apply_overrides(cfg, {"cl.nope": 1.0})
    with pytest.raises(SchemaError):
        apply_overrides(cfg, {"cl": 1.0})
    with pytest.raises(InvariantError):
        apply_overrides(cfg, {"cl.kp": -1.0})
