"""Dense real polynomials in the Laplace variable ``s`` and their ratios.

Coefficients are stored in ascending degree, ``coeffs[k]`` multiplying ``s**k``.
Every constructor canonicalizes: coefficients with magnitude at or below
``ZERO_TOL`` times the largest one are replaced by exact zeros and trailing
zeros are dropped, so ``Polynomial([1, 2, 0])`` has degree 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInput, PoleOnAxis

ZERO_TOL = 1e-12
# relative distance from the imaginary axis below which a root counts as on it
AXIS_TOL = 1e-7
# relative residual accepted when deflating an imaginary-axis factor
DEFLATE_TOL = 1e-6
ROUTH_EPS = 1e-9


def _canonical(coeffs: Iterable[float]) -> tuple[float, ...]:
    c = [float(x) for x in coeffs]
    for x in c:
        if not math.isfinite(x):
            raise ValueError(f"non-finite polynomial coefficient {x!r}")
    scale = max((abs(x) for x in c), default=0.0)
    if scale == 0.0:
        return ()
    cut = ZERO_TOL * scale
    c = [0.0 if abs(x) <= cut else x for x in c]
    while c and c[-1] == 0.0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True, init=False)
class Polynomial:
    """Real polynomial with ascending coefficients.

    The zero polynomial has empty ``coeffs`` and degree -1.
    """

    coeffs: tuple[float, ...]

    def __init__(self, coeffs: Iterable[float] = ()):
        if isinstance(coeffs, (int, float)):
            coeffs = (coeffs,)
        object.__setattr__(self, "coeffs", _canonical(coeffs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> float:
        return self.coeffs[-1] if self.coeffs else 0.0

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=float)

    def scale(self) -> float:
        """Largest coefficient magnitude (0 for the zero polynomial)."""
        return max((abs(c) for c in self.coeffs), default=0.0)

    def __call__(self, z):
        return poly_eval_complex(self, z)

    def __add__(self, other):
        return poly_add(self, _as_poly(other))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return poly_add(self, -_as_poly(other))

    def __rsub__(self, other):
        return poly_add(_as_poly(other), -self)

    def __mul__(self, other):
        return poly_mul(self, _as_poly(other))

    __rmul__ = __mul__

    def __divmod__(self, other):
        return poly_divmod(self, _as_poly(other))

    def flip(self) -> "Polynomial":
        return conjugate_flip(self)

    def derivative(self) -> "Polynomial":
        return Polynomial(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def roots(self) -> np.ndarray:
        if self.degree < 1:
            return np.array([], dtype=complex)
        return np.roots(self.coeffs[::-1])

    def __repr__(self) -> str:
        if self.is_zero:
            return "Polynomial(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0.0:
                continue
            if k == 0:
                terms.append(f"{c:g}")
            elif k == 1:
                terms.append(f"{c:g} s")
            else:
                terms.append(f"{c:g} s^{k}")
        return "Polynomial(" + " + ".join(terms) + ")"


def _as_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, float)):
        return Polynomial((x,))
    return Polynomial(x)


ZERO = Polynomial()
ONE = Polynomial((1.0,))
S = Polynomial((0.0, 1.0))


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    n = max(len(a.coeffs), len(b.coeffs))
    out = [0.0] * n
    for k, c in enumerate(a.coeffs):
        out[k] += c
    for k, c in enumerate(b.coeffs):
        out[k] += c
    return Polynomial(out)


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    if a.is_zero or b.is_zero:
        return ZERO
    return Polynomial(np.convolve(a.coeffs, b.coeffs))


def poly_eval_complex(p: Polynomial, z: complex) -> complex:
    """Horner evaluation; returns a Python complex."""
    acc = 0j
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return complex(acc)


def conjugate_flip(p: Polynomial) -> Polynomial:
    """Return ``q(s) = p(-s)``; for real ``p``, ``q(jw) = conj(p(jw))``."""
    return Polynomial(-c if k % 2 else c for k, c in enumerate(p.coeffs))


def poly_divmod(a: Polynomial, b: Polynomial) -> tuple[Polynomial, Polynomial]:
    if b.is_zero:
        raise ZeroDivisionError("polynomial division by zero")
    if a.degree < b.degree:
        return ZERO, a
    rem = list(a.coeffs)
    lead = b.coeffs[-1]
    nb = len(b.coeffs)
    quot = [0.0] * (len(rem) - nb + 1)
    for i in range(len(quot) - 1, -1, -1):
        q = rem[i + nb - 1] / lead
        quot[i] = q
        for j, bc in enumerate(b.coeffs):
            rem[i + j] -= q * bc
        rem[i + nb - 1] = 0.0
    # canonicalize the remainder against the dividend's scale, not its own
    cut = ZERO_TOL * a.scale()
    rem = [0.0 if abs(r) <= cut else r for r in rem[: nb - 1]]
    return Polynomial(quot), Polynomial(rem)


def _monic(p: Polynomial) -> Polynomial:
    return Polynomial(c / p.leading for c in p.coeffs)


def poly_gcd(a: Polynomial, b: Polynomial, rtol: float = 1e-9) -> Polynomial:
    """Approximate monic GCD by the Euclidean algorithm.

    A remainder whose coefficients are all below ``rtol`` times the dividend
    scale is treated as zero. Returns ``ONE`` when the inputs are coprime.
    """
    if a.is_zero and b.is_zero:
        return ZERO
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero:
        _, r = poly_divmod(a, b)
        if r.scale() <= rtol * a.scale():
            r = ZERO
        a, b = _monic(b), (_monic(r) if not r.is_zero else r)
    return _monic(a)


@dataclass(frozen=True)
class RationalTF:
    """``num(s) / den(s)``; never simplified unless :meth:`normalize` is called."""

    num: Polynomial
    den: Polynomial

    def __post_init__(self):
        if not isinstance(self.num, Polynomial):
            object.__setattr__(self, "num", Polynomial(self.num))
        if not isinstance(self.den, Polynomial):
            object.__setattr__(self, "den", Polynomial(self.den))
        if self.den.is_zero:
            raise DegenerateInput("transfer function denominator is identically zero")

    def __call__(self, s: complex) -> complex:
        return self.num(s) / self.den(s)

    def normalize(self, rtol: float = 1e-9) -> "RationalTF":
        """Cancel approximate common factors and make the denominator monic."""
        num, den = self.num, self.den
        if not num.is_zero:
            g = poly_gcd(num, den, rtol)
            if g.degree >= 1:
                num = poly_divmod(num, g)[0]
                den = poly_divmod(den, g)[0]
        lead = den.leading
        return RationalTF(
            Polynomial(c / lead for c in num.coeffs),
            Polynomial(c / lead for c in den.coeffs),
        )


def _axis_scale(p: Polynomial, omega: float) -> float:
    w = abs(omega)
    return sum(abs(c) * w**k for k, c in enumerate(p.coeffs))


def freq_response(tf: RationalTF, omegas: Sequence[float]) -> np.ndarray:
    """Evaluate ``tf(j*omega)`` for each omega, in input order.

    Raises :class:`PoleOnAxis` when the denominator is numerically zero at a
    sample, i.e. the grid hit an imaginary-axis pole.
    """
    out = np.empty(len(omegas), dtype=complex)
    for i, w in enumerate(omegas):
        z = 1j * float(w)
        d = tf.den(z)
        if abs(d) <= ZERO_TOL * _axis_scale(tf.den, w):
            raise PoleOnAxis(float(w))
        out[i] = tf.num(z) / d
    return out


@dataclass(frozen=True)
class RouthResult:
    stable: bool
    first_column: tuple[float, ...]
    marginal: bool = False
    sign_changes: int = 0

    def __bool__(self) -> bool:
        return self.stable


def routh_hurwitz_stable(p: Polynomial) -> RouthResult:
    """Routh-Hurwitz test for strict stability (all roots in Re < 0).

    A zero pivot is replaced by a small epsilon; a vanishing row is replaced by
    the derivative of the auxiliary polynomial. Either case marks the result
    ``marginal`` and not strictly stable.
    """
    if p.degree < 1:
        raise DegenerateInput("Routh-Hurwitz test needs a polynomial of degree >= 1")
    desc = list(p.coeffs[::-1])
    if desc[0] < 0:
        desc = [-c for c in desc]
    n = p.degree
    width = n // 2 + 1
    row0 = desc[0::2] + [0.0] * (width - len(desc[0::2]))
    row1 = desc[1::2] + [0.0] * (width - len(desc[1::2]))
    rows = [row0, row1]
    marginal = False
    tiny = ZERO_TOL * max(abs(c) for c in desc)

    for k in range(2, n + 1):
        prev, cur = rows[-2], rows[-1]
        if all(abs(c) <= tiny for c in cur):
            # zero row: use the derivative of the auxiliary polynomial from prev
            power = n - (k - 2)
            cur = [c * (power - 2 * i) for i, c in enumerate(prev)]
            rows[-1] = cur
            marginal = True
        if abs(cur[0]) <= tiny:
            eps = ROUTH_EPS * max(abs(r[0]) for r in rows)
            cur = [eps] + cur[1:]
            rows[-1] = cur
            marginal = True
        new = []
        for i in range(width - 1):
            new.append((cur[0] * prev[i + 1] - prev[0] * cur[i + 1]) / cur[0])
        new.append(0.0)
        rows.append(new)

    if all(abs(c) <= tiny for c in rows[n]) and n >= 1:
        # last row vanished: constant auxiliary polynomial means a root at 0
        marginal = True
    col = tuple(r[0] for r in rows[: n + 1])
    changes = sum(1 for a, b in zip(col, col[1:]) if (a > 0) != (b > 0))
    stable = not marginal and all(c > 0 for c in col)
    return RouthResult(stable=stable, first_column=col, marginal=marginal, sign_changes=changes)


def _count_origin(p: Polynomial) -> int:
    k = 0
    for c in p.coeffs:
        if c != 0.0:
            break
        k += 1
    return k


def _strip_origin(p: Polynomial, k: int) -> Polynomial:
    return Polynomial(p.coeffs[k:])


def axis_multiplicity(p: Polynomial, omega: float) -> int:
    """How many times the real factor for root ``j*omega`` divides ``p``.

    The factor is ``s`` when omega is 0 and ``s**2 + omega**2`` otherwise.
    """
    if p.is_zero:
        return 0
    if omega == 0.0:
        k = _count_origin(p)
        q = _strip_origin(p, k)
        while q.degree >= 1 and abs(q.coeffs[0]) <= DEFLATE_TOL * q.scale():
            k += 1
            q = Polynomial(q.coeffs[1:])
        return k
    factor = Polynomial((omega * omega, 0.0, 1.0))
    k = 0
    q = p
    while q.degree >= 2:
        quot, rem = poly_divmod(q, factor)
        r0 = rem.coeffs[0] if len(rem.coeffs) > 0 else 0.0
        r1 = rem.coeffs[1] if len(rem.coeffs) > 1 else 0.0
        if abs(r0) + abs(r1) * omega > DEFLATE_TOL * _axis_scale(q, omega):
            break
        k += 1
        q = quot
    return k


def _axis_candidates(p: Polynomial) -> list[float]:
    """Nonnegative frequencies of roots of ``p`` near the imaginary axis."""
    if p.degree < 1:
        return []
    k = _count_origin(p)
    out = [0.0] if k else []
    q = _strip_origin(p, k)
    for z in q.roots():
        mag = max(1.0, abs(z))
        if abs(z.real) <= AXIS_TOL * mag:
            w = abs(z.imag)
            out.append(0.0 if w <= AXIS_TOL * mag else float(w))
    out.sort()
    clusters: list[list[float]] = []
    for w in out:
        if clusters and abs(w - clusters[-1][-1]) <= 1e-6 * max(1.0, w):
            clusters[-1].append(w)
        else:
            clusters.append([w])
    return [0.0 if c[0] == 0.0 else float(np.mean(c)) for c in clusters]


def imaginary_axis_poles(tf: RationalTF) -> list[tuple[float, int]]:
    """Poles on the imaginary axis as ``(omega >= 0, multiplicity)`` pairs.

    Factors shared with the numerator are cancelled first. A conjugate pair
    ``+-j*omega`` is reported once.
    """
    poles = []
    for w in _axis_candidates(tf.den):
        mult = axis_multiplicity(tf.den, w) - axis_multiplicity(tf.num, w)
        if mult > 0:
            poles.append((w, mult))
    return poles


def remove_axis_factors(p: Polynomial, poles: Sequence[tuple[float, int]]) -> Polynomial:
    """Divide out ``s`` / ``s**2 + w**2`` factors for the given axis roots."""
    q = p
    for w, mult in poles:
        for _ in range(mult):
            if w == 0.0:
                q = Polynomial(q.coeffs[1:])
            else:
                q = poly_divmod(q, Polynomial((w * w, 0.0, 1.0)))[0]
    return q
