"""Real-root isolation on the positive half-line with Sturm sequences."""

from __future__ import annotations

import math

from .lti import ZERO_TOL, Polynomial, poly_divmod


def sturm_sequence(p: Polynomial) -> list[Polynomial]:
    seq = [p, p.derivative()]
    while seq[-1].degree >= 1:
        _, r = poly_divmod(seq[-2], seq[-1])
        if r.scale() <= 1e3 * ZERO_TOL * seq[-2].scale():
            break
        seq.append(-r)
    return seq


def _sign(x: float) -> int:
    return (x > 0) - (x < 0)


def _sign_at(p: Polynomial, x: float) -> int:
    if math.isinf(x):
        return _sign(p.leading) * (1 if x > 0 or p.degree % 2 == 0 else -1)
    return _sign(p(x).real)


def sign_variations(seq: list[Polynomial], x: float) -> int:
    signs = [s for s in (_sign_at(q, x) for q in seq) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots(seq: list[Polynomial], a: float, b: float) -> int:
    """Distinct real roots in ``(a, b]``."""
    return sign_variations(seq, a) - sign_variations(seq, b)


def cauchy_bound(p: Polynomial) -> float:
    lead = abs(p.leading)
    return 1.0 + max(abs(c) / lead for c in p.coeffs[:-1])


def positive_roots(p: Polynomial, rtol: float = 1e-13) -> list[float]:
    """Sorted distinct real roots of ``p`` in ``(0, inf)``.

    Roots are isolated by Sturm counts and then bisected down to ``rtol``
    relative width. A root at exactly zero is not reported.
    """
    if p.degree < 1:
        return []
    k = 0
    while p.coeffs[k] == 0.0:
        k += 1
    q = Polynomial(p.coeffs[k:])
    if q.degree < 1:
        return []
    seq = sturm_sequence(q)
    hi = cauchy_bound(q)
    stack = [(0.0, hi)]
    found = []
    while stack:
        a, b = stack.pop()
        n = count_roots(seq, a, b)
        if n == 0:
            continue
        if n == 1 or b - a <= rtol * max(b, 1e-300):
            found.append(_refine(seq, a, b, rtol))
            continue
        mid = 0.5 * (a + b)
        stack.append((mid, b))
        stack.append((a, mid))
    return sorted(found)


def _refine(seq: list[Polynomial], a: float, b: float, rtol: float) -> float:
    for _ in range(200):
        if b - a <= rtol * b:
            break
        mid = 0.5 * (a + b)
        if count_roots(seq, a, mid) > 0:
            b = mid
        else:
            a = mid
    return 0.5 * (a + b)
