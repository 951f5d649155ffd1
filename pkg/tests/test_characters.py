from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from robba import Character, PAdicScalar
from robba.errors import DomainError, ParseError

UNITS3 = st.integers(1, 300).filter(lambda x: x % 3)


def test_chi_values():
    chi = Character.chi(3)
    assert chi(3).agrees(PAdicScalar.one(3))
    assert chi(2).agrees(PAdicScalar.of(3, 2))
    assert chi(Fraction(1, 9)).agrees(PAdicScalar.one(3))
    assert chi.weight.agrees(PAdicScalar.one(3))


def test_half_weight_squares_to_projection():
    # <2> = 2 / omega(2) = -2 for p = 3
    d = Character.of_weight(3, Fraction(1, 2))
    v = d(2)
    assert (v * v).agrees(PAdicScalar.of(3, -2))


def test_of_weight_integer_is_power():
    d = Character.of_weight(5, 3, at_p=2)
    assert d.power == 3 and d.weight_extra.is_zero()
    assert d(5).agrees(PAdicScalar.of(5, 2))
    assert d(10).agrees(PAdicScalar.of(5, 16))


@given(UNITS3, UNITS3, st.sampled_from([0, 1, 2, -1]), st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(3, 4)]))
def test_multiplicative(x, y, m, s):
    d = Character(3, PAdicScalar.of(3, 2), m, PAdicScalar.of(3, s))
    assert d(x * y).agrees(d(x) * d(y))
    assert d(3 * x).agrees(d(3) * d(x))


@given(UNITS3, st.sampled_from([0, 1, 3]))
def test_group_operations(x, m):
    d = Character(3, PAdicScalar.of(3, 3), m, PAdicScalar.of(3, Fraction(1, 2)))
    e = Character.chi(3)
    assert (d * e)(x).agrees(d(x) * e(x))
    assert (d / d)(x).agrees(PAdicScalar.one(3))
    assert (d * d.inverse()) == Character.trivial(3)


@pytest.mark.parametrize("text", ["3^0*1 | x^0", "3^1*2 | x^2<x>^1/2", "3^-1*5 | x^-1<x>^(1/2 + O(3^10))"])
def test_parse_format_round_trip(text):
    d = Character.parse(text, 3)
    assert Character.parse(str(d), 3) == d


def test_errors():
    with pytest.raises(DomainError):
        Character.trivial(2)
    with pytest.raises(DomainError):
        Character(3, PAdicScalar.one(3), 0, Fraction(1, 3))
    with pytest.raises(DomainError):
        Character.chi(3)(0)
    with pytest.raises(DomainError):
        Character(3, 0)
    with pytest.raises(ParseError):
        Character.parse("x^2", 3)
    with pytest.raises(ParseError):
        Character.parse("5^1*1 | x^0", 3)
