"""Physical and controller parameterization of a 1-DoF series elastic actuator.

The actuator (mass ``m``, viscous damping ``b``) drives the load through the
transmission ``d1``; ``d2`` optionally ties the load to ground. ``ca`` acts on
the actuator position error, ``cl`` on the load position error, and both
forces are applied by the actuator. All quantities are SI.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass, replace
from typing import Any, Mapping

from .errors import (
    ExtraParameter,
    InvariantError,
    MissingParameter,
    NegativeParameter,
    ParseError,
    SchemaError,
)
from .lti import S, Polynomial, RationalTF


def _check_gain(value: float, path: str) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvariantError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise InvariantError("must be finite", path)
    if value < 0:
        raise InvariantError("must be nonnegative", path)


@dataclass(frozen=True)
class ComplianceElement:
    """Spring-damper ``D(s) = k + c*s``; ``k == c == 0`` means no connection."""

    k: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        _check_gain(self.k, "k")
        _check_gain(self.c, "c")

    @property
    def is_zero(self) -> bool:
        return self.k == 0 and self.c == 0

    def poly(self) -> Polynomial:
        return Polynomial((self.k, self.c))


@dataclass(frozen=True)
class LinearController:
    """PID law ``C(s) = kp + kv*s + ki/s`` on a position error."""

    kp: float = 0.0
    kv: float = 0.0
    ki: float = 0.0

    def __post_init__(self):
        _check_gain(self.kp, "kp")
        _check_gain(self.kv, "kv")
        _check_gain(self.ki, "ki")

    @property
    def is_zero(self) -> bool:
        return self.kp == 0 and self.kv == 0 and self.ki == 0

    def poly_times_s(self) -> Polynomial:
        """``s * C(s)``, a polynomial even when ``ki > 0``."""
        return Polynomial((self.ki, self.kp, self.kv))

    def poly(self) -> Polynomial:
        if self.ki:
            raise ValueError("controller with integral gain is not polynomial")
        return Polynomial((self.kp, self.kv))


NO_CONTROL = LinearController()
NO_CONNECTION = ComplianceElement()


@dataclass(frozen=True)
class SEAConfig:
    m: float
    b: float
    d1: ComplianceElement
    d2: ComplianceElement = NO_CONNECTION
    ca: LinearController = NO_CONTROL
    cl: LinearController = NO_CONTROL
    label: str = ""

    def __post_init__(self):
        for name in ("m", "b"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise InvariantError("must be a finite number", name)
        if self.m <= 0:
            raise InvariantError("actuator mass must be positive", "m")
        if self.b < 0:
            raise InvariantError("actuator damping must be nonnegative", "b")
        if self.d1.is_zero:
            raise InvariantError("transmission must not be the zero element", "d1")

    @property
    def has_integral(self) -> bool:
        return self.ca.ki > 0 or self.cl.ki > 0

    def get(self, path: str) -> float:
        """Numeric field by dotted path, e.g. ``"ca.kp"`` or ``"m"``."""
        obj: Any = self
        for part in path.split("."):
            if not hasattr(obj, part) or part == "label":
                raise SchemaError("unknown parameter path", path)
            obj = getattr(obj, part)
        if isinstance(obj, (ComplianceElement, LinearController)):
            raise SchemaError("path does not name a numeric field", path)
        return obj

    def with_value(self, path: str, value: float) -> "SEAConfig":
        """Copy with one numeric field replaced (invariants re-checked)."""
        self.get(path)
        parts = path.split(".")
        try:
            if len(parts) == 1:
                return replace(self, **{parts[0]: value})
            head, leaf = parts
            return replace(self, **{head: replace(getattr(self, head), **{leaf: value})})
        except InvariantError as exc:
            raise InvariantError(str(exc).split(": ", 1)[-1], path) from None


NUMERIC_PATHS = (
    "m", "b",
    "d1.k", "d1.c", "d2.k", "d2.c",
    "ca.kp", "ca.kv", "ca.ki", "cl.kp", "cl.kv", "cl.ki",
)


def stiffness_tf(config: SEAConfig) -> RationalTF:
    """Rendered stiffness ``F_L/X_L`` at the load port.

    ``((D1+D2)(alpha+C_A) + D1*C_L) / (alpha + C_A + D1)`` with
    ``alpha = m s^2 + b s``. When either controller has an integral gain the
    numerator and denominator are both multiplied by ``s`` once.
    """
    alpha = Polynomial((0.0, config.b, config.m))
    d1 = config.d1.poly()
    d2 = config.d2.poly()
    if config.has_integral:
        ca = config.ca.poly_times_s()
        cl = config.cl.poly_times_s()
        alpha, d1s = alpha * S, d1 * S
    else:
        ca = config.ca.poly()
        cl = config.cl.poly()
        d1s = d1
    num = (d1 + d2) * (alpha + ca) + d1 * cl
    den = alpha + ca + d1s
    return RationalTF(num, den)


def impedance_tf(stiffness: RationalTF) -> RationalTF:
    """``Z_L(s) = (1/s) * F_L/X_L``; the denominator gains a factor ``s``."""
    return RationalTF(stiffness.num, stiffness.den * S)


class ConfigPreset(str, enum.Enum):
    PURE_SPRING_LP = "PureSpring-LP"
    SPRING_SPRING_LP = "SpringSpring-LP"
    PARALLEL_SPRING_DAMPER_LP = "ParallelSpringDamper-LP"
    DISJOINTED_SPRING_DAMPER_LP = "DisjointedSpringDamper-LP"
    PURE_SPRING_LPD = "PureSpring-LPD"
    PURE_SPRING_LPI = "PureSpring-LPI"
    PURE_SPRING_AP = "PureSpring-AP"
    PURE_SPRING_APD = "PureSpring-APD"
    PURE_SPRING_API = "PureSpring-API"
    COMBINED_APD = "Combined-APD"


_BASE = {"m": "m", "b": "b", "k1": "d1.k"}

PRESET_SLOTS: dict[ConfigPreset, dict[str, str]] = {
    ConfigPreset.PURE_SPRING_LP: {**_BASE, "kd": "cl.kp"},
    ConfigPreset.SPRING_SPRING_LP: {**_BASE, "k2": "d2.k", "kd": "cl.kp"},
    ConfigPreset.PARALLEL_SPRING_DAMPER_LP: {**_BASE, "b1": "d1.c", "kd": "cl.kp"},
    ConfigPreset.DISJOINTED_SPRING_DAMPER_LP: {**_BASE, "b2": "d2.c", "kd": "cl.kp"},
    ConfigPreset.PURE_SPRING_LPD: {**_BASE, "kd": "cl.kp", "bd": "cl.kv"},
    ConfigPreset.PURE_SPRING_LPI: {**_BASE, "kd": "cl.kp", "id": "cl.ki"},
    ConfigPreset.PURE_SPRING_AP: {**_BASE, "kd": "ca.kp"},
    ConfigPreset.PURE_SPRING_APD: {**_BASE, "kd": "ca.kp", "bd": "ca.kv"},
    ConfigPreset.PURE_SPRING_API: {**_BASE, "kd": "ca.kp", "id": "ca.ki"},
    ConfigPreset.COMBINED_APD: {**_BASE, "b1": "d1.c", "kd": "ca.kp", "bd": "ca.kv"},
}


def make_preset(preset: ConfigPreset | str, params: Mapping[str, float]) -> SEAConfig:
    """Build the config for a named structural pattern.

    ``params`` must supply exactly the preset's slots, e.g. ``m, b, k1, kd``
    for ``PureSpring-LP``.
    """
    preset = ConfigPreset(preset)
    slots = PRESET_SLOTS[preset]
    missing = [s for s in slots if s not in params]
    if missing:
        raise MissingParameter(f"{preset.value} needs {', '.join(missing)}", missing[0])
    extra = [s for s in params if s not in slots]
    if extra:
        raise ExtraParameter(f"{preset.value} does not take {', '.join(extra)}", extra[0])
    values: dict[str, dict[str, float]] = {"d1": {}, "d2": {}, "ca": {}, "cl": {}}
    top: dict[str, float] = {}
    for slot, path in slots.items():
        v = params[slot]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise InvariantError("must be a finite number", slot)
        if v < 0:
            raise NegativeParameter("must be nonnegative", slot)
        if "." in path:
            head, leaf = path.split(".")
            values[head][leaf] = float(v)
        else:
            top[path] = float(v)
    return SEAConfig(
        m=top["m"],
        b=top["b"],
        d1=ComplianceElement(**values["d1"]),
        d2=ComplianceElement(**values["d2"]),
        ca=LinearController(**values["ca"]),
        cl=LinearController(**values["cl"]),
        label=preset.value,
    )


def preset_params(preset: ConfigPreset | str, config: SEAConfig) -> dict[str, float]:
    """Read a preset's slot values back out of a config."""
    return {slot: config.get(path) for slot, path in PRESET_SLOTS[ConfigPreset(preset)].items()}


def match_preset(config: SEAConfig) -> ConfigPreset | None:
    """First preset whose slots cover every nonzero field of ``config``.

    Presets are tried from fewest to most slots, so a config with all gains
    zero matches ``PureSpring-LP`` with ``kd = 0``.
    """
    nonzero = {p for p in NUMERIC_PATHS if p not in ("m", "b") and config.get(p) != 0}
    for preset in sorted(ConfigPreset, key=lambda p: len(PRESET_SLOTS[p])):
        if nonzero <= set(PRESET_SLOTS[preset].values()):
            return preset
    return None


_SCHEMA = {
    "d1": ("k", "c"),
    "d2": ("k", "c"),
    "ca": ("kp", "kv", "ki"),
    "cl": ("kp", "kv", "ki"),
}


def _number(doc: Mapping, key: str, path: str) -> float:
    if key not in doc:
        raise SchemaError("required field missing", path)
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"expected a number, got {type(v).__name__}", path)
    return float(v)


def config_from_dict(doc: Any) -> SEAConfig:
    if not isinstance(doc, dict):
        raise SchemaError("config must be a JSON object", "")
    allowed = {"m", "b", "label", *_SCHEMA}
    for key in doc:
        if key not in allowed:
            raise SchemaError("unknown key", str(key))
    m = _number(doc, "m", "m")
    b = _number(doc, "b", "b")
    parts = {}
    for name, keys in _SCHEMA.items():
        if name not in doc:
            raise SchemaError("required field missing", name)
        sub = doc[name]
        if not isinstance(sub, dict):
            raise SchemaError("expected an object", name)
        for key in sub:
            if key not in keys:
                raise SchemaError("unknown key", f"{name}.{key}")
        vals = {k: _number(sub, k, f"{name}.{k}") for k in keys}
        for k, v in vals.items():
            if not math.isfinite(v):
                raise InvariantError("must be finite", f"{name}.{k}")
            if v < 0:
                raise InvariantError("must be nonnegative", f"{name}.{k}")
        parts[name] = vals
    label = doc.get("label", "")
    if not isinstance(label, str):
        raise SchemaError("expected a string", "label")
    return SEAConfig(
        m=m,
        b=b,
        d1=ComplianceElement(**parts["d1"]),
        d2=ComplianceElement(**parts["d2"]),
        ca=LinearController(**parts["ca"]),
        cl=LinearController(**parts["cl"]),
        label=label,
    )


def parse_config(text: str) -> SEAConfig:
    """Parse the JSON config document; errors carry the offending path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg} (line {exc.lineno})") from None
    return config_from_dict(doc)


def config_to_dict(config: SEAConfig) -> dict:
    doc = asdict(config)
    if not doc["label"]:
        del doc["label"]
    return doc


def serialize_config(config: SEAConfig) -> str:
    return json.dumps(config_to_dict(config), indent=2, sort_keys=True) + "\n"


def apply_overrides(config: SEAConfig, overrides: Mapping[str, float]) -> SEAConfig:
    for path, value in overrides.items():
        config = config.with_value(path, value)
    return config
