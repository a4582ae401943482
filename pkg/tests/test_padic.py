from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from padicprec.errors import NonUnitDenominator, PAdicDivisionByZero, PrecisionUnderflow
from padicprec.padic import INF, PAdic, from_rational, val_rational


def T(x, N, p=2):
    return PAdic.from_value(x, p, N)


def test_from_rational_exact():
    x = from_rational(12, 1, 2)
    assert x.is_exact and x.valuation == 2 and x.value == 12


def test_from_rational_capped():
    x = from_rational(1, 3, 2, 5)
    assert not x.is_exact
    assert (x.unit, x.valuation, x.precision) == (11, 0, 5)


def test_from_rational_zero_is_exact_zero():
    assert from_rational(0, 1, 2, 7).is_zero


def test_from_rational_errors():
    with pytest.raises(NonUnitDenominator):
        from_rational(1, 2, 2, 5)
    with pytest.raises(PAdicDivisionByZero):
        from_rational(1, 0, 2, 5)


def test_add_min_precision():
    # 2 + 6 = 8 is divisible by 2^3, so only the bound O(2^3) survives
    s = T(2, 5) + T(6, 3)
    assert s.is_inexact_zero and s.precision == 3
    assert s.contains(PAdic.exact(8, 2))


def test_add_keeps_leading_digits():
    s = T(1, 5) + T(6, 3)
    assert s == T(7, 3)


def test_mul_precision_rule():
    m = T(2, 5) * T(4, 6)
    assert m == T(8, 7)


def test_div_modular_inverse():
    assert T(1, 4) / T(3, 4) == T(11, 4)


def test_div_by_inexact_zero():
    with pytest.raises(PrecisionUnderflow):
        T(1, 4) / PAdic.inexact_zero(2, 3)
    with pytest.raises(PAdicDivisionByZero):
        T(1, 4) / PAdic.zero(2)


def test_valuations():
    assert PAdic.zero(2).valuation == INF
    assert PAdic.exact(12, 2).valuation == 2
    assert PAdic.tracked(2, 3, -1, 4).valuation == -1


def test_text_round_trip():
    for x in [PAdic.exact(Fraction(5, 3), 2), PAdic.tracked(2, 3, -1, 4),
              PAdic.inexact_zero(2, 6), PAdic.zero(2), PAdic.exact(-7, 3)]:
        assert PAdic.parse(str(x), x.p) == x


rationals = st.builds(Fraction, st.integers(-10**6, 10**6), st.integers(1, 10**4))


def _exact(q, p):
    # keep p out of the denominator for the sampled ring
    while q.denominator % p == 0:
        q = Fraction(q.numerator, q.denominator // p)
    return PAdic.exact(q, p)


@given(rationals, rationals, rationals, st.sampled_from([2, 3, 5]))
def test_exact_ring_laws(a, b, c, p):
    x, y, z = _exact(a, p), _exact(b, p), _exact(c, p)
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z


@given(rationals, rationals, st.sampled_from([2, 3]))
def test_ultrametric_and_multiplicative(a, b, p):
    x, y = _exact(a, p), _exact(b, p)
    s = (x + y).valuation
    assert s >= min(x.valuation, y.valuation)
    if x.valuation != y.valuation:
        assert s == min(x.valuation, y.valuation)
    assert (x * y).valuation == x.valuation + y.valuation


ops = st.lists(st.tuples(st.sampled_from("+-*/"), st.integers(-500, 500)), min_size=1, max_size=8)


@given(st.integers(-500, 500), ops, st.sampled_from([2, 3]), st.integers(4, 30))
def test_tracked_contains_exact(start, program, p, N):
    exact = PAdic.exact(start, p)
    tracked = exact.with_precision(N)
    for op, k in program:
        e = PAdic.exact(k, p)
        t = e.with_precision(N)
        if op == "/":
            if k == 0:
                continue
            exact, tracked = exact / e, tracked / t
        elif op == "+":
            exact, tracked = exact + e, tracked + t
        elif op == "-":
            exact, tracked = exact - e, tracked - t
        else:
            exact, tracked = exact * e, tracked * t
    assert tracked.contains(exact)
    if exact.is_exact and not exact.is_zero and tracked.is_nonzero:
        assert tracked.valuation == val_rational(exact.value, p)
