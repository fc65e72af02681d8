"""Interaction passivity of an SEA: exact positive-real test on the impedance
``Z_L = num/den`` and the closed-form per-configuration conditions.

``Z_L`` is positive real when its imaginary-axis poles are simple, it is
otherwise stable, and ``Re(num(jw) den(-jw)) >= 0`` for every real ``w``. The
last polynomial is even in ``w``, so it is handled as a polynomial in
``u = w**2`` on ``[0, inf)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateInput, NotPassiveAtLow
from .lti import (
    ZERO_TOL,
    Polynomial,
    RationalTF,
    _axis_candidates,
    axis_multiplicity,
    imaginary_axis_poles,
    routh_hurwitz_stable,
)
from .model import ConfigPreset, SEAConfig, impedance_tf, match_preset, preset_params, stiffness_tf
from .roots import positive_roots

MARGIN_TOL = 1e-9
# Real-part coefficients smaller than this fraction of the products that
# formed them are cancellation residue. It sits above the 1e-10 relative
# coefficient noise the verdict must be immune to.
CANCEL_TOL = 1e-9


@dataclass(frozen=True)
class RealPartPolynomial:
    """``Re(num(jw) den(-jw))`` as a polynomial in ``u = w**2``.

    ``bound`` holds, per coefficient, the sum of magnitudes of the products
    that formed it; it sets the cancellation-aware tolerances.
    """

    poly_in_u: Polynomial
    source_tf: RationalTF
    bound: tuple[float, ...] = field(repr=False, default=())

    def __call__(self, u: float) -> float:
        return self.poly_in_u(u).real

    @property
    def coeffs(self) -> tuple[float, ...]:
        return self.poly_in_u.coeffs

    def scale(self) -> float:
        return max(self.bound, default=0.0)


def realpart_poly(tf: RationalTF) -> RealPartPolynomial:
    n = np.array(tf.num.coeffs or (0.0,), dtype=float)
    d = np.array(tf.den.coeffs, dtype=float)
    jpow = np.array([1j**k for k in range(max(len(n), len(d)))])
    # num(jw) and den(-jw) as complex polynomials in w
    num_w = n * jpow[: len(n)]
    den_w = d * np.conj(jpow[: len(d)])
    prod = np.convolve(num_w, den_w)
    bound = np.convolve(np.abs(n), np.abs(d))
    odd = np.abs(prod.real[1::2])
    if odd.size and odd.max() > ZERO_TOL * max(bound.max(), 1e-300):
        raise AssertionError("real part of num(jw)den(-jw) has odd powers of w")
    even = prod.real[0::2].copy()
    even_bound = bound[0::2]
    even[np.abs(even) <= CANCEL_TOL * even_bound] = 0.0
    return RealPartPolynomial(Polynomial(even), tf, tuple(float(x) for x in even_bound))


@dataclass(frozen=True)
class PassivityVerdict:
    passive: bool
    condition1_simple_imaginary_poles: bool
    condition2_stable: bool
    condition3_nonnegative_real_part: bool
    violation_band: tuple[float, float] | None
    realpart: RealPartPolynomial
    marginal: bool = False
    imaginary_poles: tuple[tuple[float, int], ...] = ()

    def to_dict(self) -> dict:
        band = None
        if self.violation_band is not None:
            band = [self.violation_band[0], None if math.isinf(self.violation_band[1]) else self.violation_band[1]]
        return {
            "passive": self.passive,
            "conditions": {
                "simple_poles": self.condition1_simple_imaginary_poles,
                "stable": self.condition2_stable,
                "nonneg_real": self.condition3_nonnegative_real_part,
            },
            "violation_band": band,
            "marginal": self.marginal,
            "realpart_coeffs_u": list(self.realpart.coeffs),
        }


def _nonnegative_on_halfline(rp: RealPartPolynomial) -> tuple[bool, tuple[float, float] | None, bool]:
    p = rp.poly_in_u
    if p.is_zero:
        return True, None, True
    roots = positive_roots(p)
    edges = [0.0, *roots]
    spans = [(a, b, 0.5 * (a + b)) for a, b in zip(edges, edges[1:])]
    last = roots[-1] if roots else 0.0
    spans.append((last, math.inf, 2.0 * last + 1.0))
    scale = rp.scale()
    marginal = False
    band = None
    for a, b, u in spans:
        val = rp(u)
        eps = MARGIN_TOL * scale * max(1.0, u) ** max(p.degree, 0)
        if val < -eps:
            if band is None:
                band = (math.sqrt(a), math.sqrt(b) if math.isfinite(b) else math.inf)
        elif abs(val) <= eps:
            marginal = True
    return band is None, band, marginal


def check_positive_real(tf: RationalTF) -> PassivityVerdict:
    """Decide whether the impedance ``tf`` is positive real.

    Condition 3 isolates the positive real roots of the real-part polynomial
    and samples its sign between them, so no frequency band is missed.
    ``marginal`` is set when a decision sits within tolerance of a boundary.
    """
    if tf.den.is_zero:
        raise DegenerateInput("denominator is identically zero")
    poles = imaginary_axis_poles(tf)
    cond1 = all(mult == 1 for _, mult in poles)

    reduced = tf.den
    for w in _axis_candidates(tf.den):
        k = axis_multiplicity(reduced, w)
        for _ in range(k):
            if w == 0.0:
                reduced = Polynomial(reduced.coeffs[1:])
            else:
                reduced = divmod(reduced, Polynomial((w * w, 0.0, 1.0)))[0]
    marginal = False
    if reduced.degree >= 1:
        routh = routh_hurwitz_stable(reduced)
        cond2 = routh.stable
        marginal = routh.marginal
    else:
        cond2 = True

    rp = realpart_poly(tf)
    cond3, band, marg3 = _nonnegative_on_halfline(rp)
    return PassivityVerdict(
        passive=cond1 and cond2 and cond3,
        condition1_simple_imaginary_poles=cond1,
        condition2_stable=cond2,
        condition3_nonnegative_real_part=cond3,
        violation_band=band,
        realpart=rp,
        marginal=marginal or marg3,
        imaginary_poles=tuple(poles),
    )


def config_passivity(config: SEAConfig) -> PassivityVerdict:
    return check_positive_real(impedance_tf(stiffness_tf(config)))


# Closed-form real-part polynomials in u, per preset, in the same
# num/den representation stiffness_tf builds (integral rows carry an extra u).
def _rp_lp(p):
    return [0.0, p["b"] * p["k1"] * (p["k1"] - p["kd"])]


def _rp_ss(p):
    return [0.0, p["b"] * p["k1"] * (p["k1"] + p["k2"] - p["kd"])]


def _rp_psd(p):
    m, b, k1, b1, kd = p["m"], p["b"], p["k1"], p["b1"], p["kd"]
    return [0.0, b * k1 * (k1 - kd), b1 * (b * b + b * b1 - m * kd), b1 * m * m]


def _rp_dsd(p):
    m, b, k1, b2, kd = p["m"], p["b"], p["k1"], p["b2"], p["kd"]
    return [0.0, b * k1 * (k1 - kd), b2 * (b * b - m * k1), b2 * m * m]


def _rp_lpd(p):
    m, b, k1, kd, bd = p["m"], p["b"], p["k1"], p["kd"], p["bd"]
    return [0.0, k1 * (b * k1 + bd * k1 - b * kd), -bd * k1 * m]


def _rp_lpi(p):
    m, b, k1, kd, i = p["m"], p["b"], p["k1"], p["kd"], p["id"]
    return [0.0, -i * k1 * k1, k1 * (b * k1 - b * kd + i * m)]


def _rp_ap(p):
    return [0.0, p["b"] * p["k1"] ** 2]


def _rp_apd(p):
    return [0.0, p["k1"] ** 2 * (p["b"] + p["bd"])]


def _rp_api(p):
    return [0.0, -p["id"] * p["k1"] ** 2, p["b"] * p["k1"] ** 2]


def _rp_combined(p):
    m, b, k1, b1, kd, bd = p["m"], p["b"], p["k1"], p["b1"], p["kd"], p["bd"]
    return [
        0.0,
        b1 * kd * kd + b * k1 * k1 + bd * k1 * k1,
        b1 * ((b + bd) ** 2 + b * b1 + b1 * bd - 2 * m * kd),
        b1 * m * m,
    ]


CATALOG_REALPART: dict[ConfigPreset, Callable[[dict], list[float]]] = {
    ConfigPreset.PURE_SPRING_LP: _rp_lp,
    ConfigPreset.SPRING_SPRING_LP: _rp_ss,
    ConfigPreset.PARALLEL_SPRING_DAMPER_LP: _rp_psd,
    ConfigPreset.DISJOINTED_SPRING_DAMPER_LP: _rp_dsd,
    ConfigPreset.PURE_SPRING_LPD: _rp_lpd,
    ConfigPreset.PURE_SPRING_LPI: _rp_lpi,
    ConfigPreset.PURE_SPRING_AP: _rp_ap,
    ConfigPreset.PURE_SPRING_APD: _rp_apd,
    ConfigPreset.PURE_SPRING_API: _rp_api,
    ConfigPreset.COMBINED_APD: _rp_combined,
}


def catalog_realpart(preset: ConfigPreset | str, params: dict) -> Polynomial:
    return Polynomial(CATALOG_REALPART[ConfigPreset(preset)](params))


def combined_apd_kd_bound(m: float, b: float, b1: float, bd: float) -> float:
    """Largest actuator-side stiffness keeping the ``u**2`` coefficient of the
    damped-transmission, actuator-PD real part nonnegative."""
    return ((b + bd) ** 2 + b * b1 + b1 * bd) / (2.0 * m)


@dataclass(frozen=True)
class ClosedFormVerdict:
    applicable: bool
    satisfied: bool | None = None
    bound_description: str = ""
    numeric_bound: float | None = None
    bound_units: str = ""
    preset: ConfigPreset | None = None

    def to_dict(self) -> dict:
        bound = self.numeric_bound
        if bound is not None and math.isinf(bound):
            bound = None
        return {
            "applicable": self.applicable,
            "satisfied": self.satisfied,
            "preset": self.preset.value if self.preset else None,
            "bound_description": self.bound_description,
            "numeric_bound": bound,
            "bound_units": self.bound_units,
        }


def closed_form_condition(config: SEAConfig) -> ClosedFormVerdict:
    """Evaluate the cataloged parameter bounds for the config's structure.

    The bounds are sufficient for passivity. For single-term real parts they
    are also necessary.
    """
    preset = match_preset(config)
    if preset is None:
        return ClosedFormVerdict(applicable=False, bound_description="configuration not in catalog")
    p = preset_params(preset, config)
    P = ConfigPreset
    if preset is P.PURE_SPRING_LP:
        return ClosedFormVerdict(True, p["kd"] <= p["k1"], "kd <= k1", p["k1"], "N/m", preset)
    if preset is P.SPRING_SPRING_LP:
        bound = p["k1"] + p["k2"]
        return ClosedFormVerdict(True, p["kd"] <= bound, "kd <= k1 + k2", bound, "N/m", preset)
    if preset is P.PARALLEL_SPRING_DAMPER_LP:
        bound = min(p["k1"], (p["b"] ** 2 + p["b"] * p["b1"]) / p["m"])
        return ClosedFormVerdict(
            True, p["kd"] <= bound, "kd <= k1 and kd <= (b^2 + b*b1)/m", bound, "N/m", preset
        )
    if preset is P.DISJOINTED_SPRING_DAMPER_LP:
        ok = p["kd"] <= p["k1"] and p["k1"] <= p["b"] ** 2 / p["m"]
        return ClosedFormVerdict(True, ok, "kd <= k1 and k1 <= b^2/m", p["k1"], "N/m", preset)
    if preset is P.PURE_SPRING_LPD:
        return ClosedFormVerdict(
            True, False, "needs -bd*k1*m >= 0: infeasible for bd > 0", None, "", preset
        )
    if preset is P.PURE_SPRING_LPI:
        return ClosedFormVerdict(
            True, False, "needs -id*k1^2 >= 0 at low frequency: infeasible for id > 0", None, "", preset
        )
    if preset is P.PURE_SPRING_AP:
        return ClosedFormVerdict(True, True, "b*k1^2 >= 0: passive for every kd", math.inf, "N/m", preset)
    if preset is P.PURE_SPRING_APD:
        return ClosedFormVerdict(
            True, True, "k1^2*(b + bd) >= 0: passive for every kd", math.inf, "N/m", preset
        )
    if preset is P.PURE_SPRING_API:
        return ClosedFormVerdict(
            True, False, "needs -id*k1^2 >= 0 at low frequency: infeasible for id > 0", None, "", preset
        )
    bound = combined_apd_kd_bound(p["m"], p["b"], p["b1"], p["bd"])
    return ClosedFormVerdict(
        True, p["kd"] <= bound, "kd <= ((b + bd)^2 + b*b1 + b1*bd) / (2m)", bound, "N/m", preset
    )


def max_passive_gain(
    config: SEAConfig,
    gain_slot: str,
    search_range: tuple[float, float],
    scan_points: int = 64,
    rtol: float = 1e-4,
) -> float:
    """Largest value of ``gain_slot`` in range keeping the config passive.

    Scans a mixed linear/geometric grid for the first non-passive value and
    bisects the transition. Returns ``math.inf`` if passive at the top of the
    range.
    """
    lo, hi = map(float, search_range)

    def passive(v: float) -> bool:
        return config_passivity(config.with_value(gain_slot, v)).passive

    if not passive(lo):
        raise NotPassiveAtLow(f"{gain_slot}={lo:g} is already not passive")
    grid = set(np.linspace(lo, hi, scan_points).tolist())
    grid.update(np.geomspace(max(lo, hi * 1e-6), hi, scan_points).tolist())
    prev = lo
    for v in sorted(grid):
        if v <= lo:
            continue
        if not passive(v):
            a, b = prev, v
            while b - a > rtol * 0.1 * b:
                mid = 0.5 * (a + b)
                if passive(mid):
                    a = mid
                else:
                    b = mid
            return a
        prev = v
    return math.inf
