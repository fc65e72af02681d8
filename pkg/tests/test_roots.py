import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from seakit.lti import Polynomial
from seakit.roots import count_roots, positive_roots, sturm_sequence


def from_roots(roots, lead=1.0):
    p = Polynomial([lead])
    for r in roots:
        p = p * Polynomial([-r, 1.0])
    return p


def test_known_positive_roots():
    p = from_roots([0.5, 2.0, -3.0, 7.0])
    assert positive_roots(p) == pytest.approx([0.5, 2.0, 7.0], rel=1e-12)


def test_root_at_zero_not_reported():
    assert positive_roots(from_roots([0.0, 0.0, 4.0])) == pytest.approx([4.0])


def test_no_real_roots():
    assert positive_roots(Polynomial([1.0, 0.0, 1.0])) == []
    assert positive_roots(Polynomial([5.0])) == []


def test_double_root_reported_once():
    assert positive_roots(from_roots([3.0, 3.0, 1.0])) == pytest.approx([1.0, 3.0], rel=1e-6)


def test_sturm_counts():
    p = from_roots([1.0, 2.0, 3.0])
    seq = sturm_sequence(p)
    assert count_roots(seq, 0.0, 10.0) == 3
    assert count_roots(seq, 1.5, 2.5) == 1


@settings(max_examples=200, derandomize=True)
@given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=6,
                unique_by=lambda x: round(x, 1)),
       st.floats(0.1, 10))
def test_matches_numpy_on_separated_roots(roots, lead):
    roots = [r for r in roots if abs(r) > 0.05]
    if not roots:
        return
    rs = sorted(roots)
    if any(b - a < 0.1 for a, b in zip(rs, rs[1:])):
        return
    got = positive_roots(from_roots(roots, lead))
    want = [r for r in rs if r > 0]
    assert got == pytest.approx(want, rel=1e-7, abs=1e-9)


def test_scale_invariance():
    p = from_roots([0.3, 12.0, -1.0])
    a = positive_roots(p)
    b = positive_roots(Polynomial(np.array(p.coeffs) * 1e6))
    assert a == pytest.approx(b, rel=1e-12)
