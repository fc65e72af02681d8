"""Passivity analysis and simulation of series elastic actuators."""

__version__ = "0.1.0"

from .lti import Polynomial, RationalTF, freq_response, routh_hurwitz_stable  # noqa: E402
from .model import (  # noqa: E402
    ComplianceElement,
    ConfigPreset,
    LinearController,
    SEAConfig,
    make_preset,
    parse_config,
    serialize_config,
    stiffness_tf,
)
from .passivity import check_positive_real, config_passivity, max_passive_gain  # noqa: E402

__all__ = [
    "ComplianceElement",
    "ConfigPreset",
    "LinearController",
    "Polynomial",
    "RationalTF",
    "SEAConfig",
    "check_positive_real",
    "config_passivity",
    "freq_response",
    "make_preset",
    "max_passive_gain",
    "parse_config",
    "routh_hurwitz_stable",
    "serialize_config",
    "stiffness_tf",
]
