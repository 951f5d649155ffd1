import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from robba import LaurentSeries, PAdicScalar
from robba.errors import BoundError, DivisibilityError, DomainError
from robba.phigamma import random_series
from robba.series_ring import (format_series, from_t, one_plus_T_pow, parse_series, t_series,
                               to_t_expansion)

PRIMES = st.sampled_from([3, 5])
SEEDS = st.integers(0, 10 ** 6)


def rs(p, seed, trunc=24, **kw):
    return random_series(p, random.Random(seed), trunc, 20, **kw)


def laurent_poly(p, seed, lo=-3, hi=6):
    r = random.Random(seed)
    return LaurentSeries.from_coeffs(p, [r.randrange(-99, 100) for _ in range(hi - lo)], lo=lo)


def t_mono(p, k, c=1, trunc=None):
    return LaurentSeries.monomial(p, k, c, var="t", **({} if trunc is None else {"trunc": trunc}))


# --- phi -------------------------------------------------------------------------------

def test_phi_T_p2():
    assert format_series(parse_series("T", 2).apply_phi()) == "2*T + T^2"


@pytest.mark.parametrize("p", [3, 5])
def test_phi_t_is_p_t(p):
    t = t_series(p, 24)
    assert to_t_expansion(t.apply_phi()).agrees(t_mono(p, 1, p))
    assert to_t_expansion(t).agrees(t_mono(p, 1))


@given(PRIMES, SEEDS, SEEDS)
def test_phi_is_multiplicative(p, s1, s2):
    f, g = rs(p, s1), rs(p, s2)
    assert (f * g).apply_phi().agrees(f.apply_phi() * g.apply_phi())
    assert (f + g).apply_phi().agrees(f.apply_phi() + g.apply_phi())


def test_phi_of_principal_part_needs_tail_bound():
    with pytest.raises(BoundError):
        parse_series("T^-1", 3).apply_phi()
    g = parse_series("T^-1", 3, B=48).apply_phi()
    assert g.lo == -48 and g.tail >= 20


# --- sigma -----------------------------------------------------------------------------

@given(PRIMES, SEEDS)
def test_sigma_one_is_identity(p, s):
    f = rs(p, s)
    assert f.apply_sigma(1).agrees(f)


def test_sigma_two_of_T():
    assert format_series(parse_series("T", 3).apply_sigma(2)) == "2*T + T^2"


@pytest.mark.parametrize("p,a", [(3, 2), (3, Fraction(1, 2)), (5, 3), (5, -1)])
def test_sigma_t_is_a_t(p, a):
    got = to_t_expansion(t_series(p, 24).apply_sigma(PAdicScalar.of(p, a), trunc=24))
    assert got.agrees(t_mono(p, 1, PAdicScalar.of(p, a)))


@given(PRIMES, SEEDS, st.sampled_from([2, 4, 7, -1]))
def test_phi_commutes_with_sigma(p, s, a):
    if a % p == 0:
        return
    f = rs(p, s)
    assert f.apply_sigma(a).apply_phi().agrees(f.apply_phi().apply_sigma(a))


@given(PRIMES, SEEDS)
def test_sigma_group_law(p, s):
    f = rs(p, s)
    assert f.apply_sigma(2).apply_sigma(-1).agrees(f.apply_sigma(-2))


def test_sigma_rejects_non_units():
    with pytest.raises(DomainError):
        parse_series("T", 3).apply_sigma(3)


# --- (1+T)^b ---------------------------------------------------------------------------

def test_one_plus_T_pow_small_cases():
    assert one_plus_T_pow(0, 3).agrees(LaurentSeries.one(3))
    cube = one_plus_T_pow(3, 3)
    assert cube.is_polynomial and format_series(cube) == "1 + 3*T + 3*T^2 + T^3"


def test_one_plus_T_pow_half():
    h = one_plus_T_pow(PAdicScalar.of(3, Fraction(1, 2)), M=20)
    for k, q in enumerate([1, Fraction(1, 2), Fraction(-1, 8), Fraction(1, 16)]):
        assert h.coeff(k).agrees(q)
    assert min(h.coeff(k).valuation for k in range(20) if h.coeff(k).unit) >= 0
    assert (h * h).agrees(parse_series("1 + T", 3))


@given(PRIMES, st.integers(-50, 50), st.integers(-50, 50))
def test_one_plus_T_pow_is_additive(p, b, c):
    lhs = one_plus_T_pow(b + c, p, M=20)
    assert lhs.agrees(one_plus_T_pow(b, p, M=20) * one_plus_T_pow(c, p, M=20))


# --- nabla -----------------------------------------------------------------------------

def test_nabla_small_cases():
    assert LaurentSeries.one(3).nabla().is_zero()
    for j in range(-2, 6):
        assert t_mono(3, j).nabla().agrees(t_mono(3, j, j))
    want = parse_series("1 + T", 3) * t_series(3, 30)
    assert parse_series("T", 3).nabla().agrees(want)


@given(PRIMES, SEEDS, SEEDS)
def test_nabla_leibniz(p, s1, s2):
    f, g = rs(p, s1), rs(p, s2)
    assert (f * g).nabla().agrees(f.nabla() * g + f * g.nabla())


@given(PRIMES, SEEDS)
def test_nabla_commutes_with_phi(p, s):
    # nabla = t d/dt is invariant under t -> p t; the factor p belongs to d/dt
    f = rs(p, s)
    assert f.apply_phi().nabla().agrees(f.nabla().apply_phi())


@given(PRIMES, SEEDS)
def test_d_dt_phi_is_p_phi_d_dt(p, s):
    f = rs(p, s)
    dt = lambda g: g.derivative() + g.derivative().shift(1)  # (1+T) d/dT = d/dt
    assert dt(f.apply_phi()).agrees(dt(f).apply_phi().scale(p))


@given(PRIMES, SEEDS, st.sampled_from([2, -1, 4]))
def test_nabla_commutes_with_sigma(p, s, a):
    if a % p == 0:
        return
    f = rs(p, s)
    assert f.apply_sigma(a).nabla().agrees(f.nabla().apply_sigma(a))


def test_nabla_t_is_t():
    t = t_series(3, 30)
    assert t.nabla().agrees(t)


# --- division by t ---------------------------------------------------------------------

def test_div_t_small_cases():
    t = t_series(3, 30)
    assert t.div_t().agrees(LaurentSeries.one(3))
    T3 = parse_series("T^3", 3)
    assert (t * T3).div_t().agrees(T3)
    assert t_mono(3, 1).div_t().agrees(t_mono(3, 0))


def test_div_t_of_T_round_trips():
    q = parse_series("T", 3).div_t()
    assert q.coeff(0).agrees(1)
    assert q.mul_t().agrees(parse_series("T", 3))
    # T/t is the inverse of the unit t/T
    assert (q * t_series(3, 30).shift(-1)).agrees(LaurentSeries.one(3))


def test_div_t_reports_obstruction():
    with pytest.raises(DivisibilityError) as e:
        parse_series("1 + T", 3).div_t()
    assert e.value.degree == 0


@given(PRIMES, SEEDS)
def test_div_t_inverts_mul_t(p, s):
    f = rs(p, s)
    assert f.mul_t().div_t().agrees(f)


# --- t-expansion -----------------------------------------------------------------------

@given(PRIMES, SEEDS)
def test_t_expansion_round_trip(p, s):
    f = rs(p, s, trunc=16)
    assert from_t(to_t_expansion(f), 16).agrees(f)


# --- residues --------------------------------------------------------------------------

def test_residue_small_cases():
    assert LaurentSeries.one(3).residue("dT/(1+T)").is_zero()
    assert parse_series("1/T", 3).residue("dT/(1+T)").agrees(1)
    assert parse_series("T^-2", 3).residue("dT/(1+T)").agrees(-1)
    assert t_mono(3, -1, 5).residue("dt").agrees(5)


@given(PRIMES, SEEDS, st.sampled_from([2, -1, 4, 7]))
def test_residue_change_of_variables(p, s, a):
    if a % p == 0:
        return
    f = laurent_poly(p, s)
    lhs = f.apply_sigma(a, trunc=24).residue("dT/(1+T)")
    assert lhs.agrees(f.residue("dT/(1+T)") * PAdicScalar.of(p, Fraction(1, a)))


@given(PRIMES, SEEDS)
def test_residue_of_exact_form_vanishes(p, s):
    f = laurent_poly(p, s, lo=-5)
    assert f.derivative().residue("dT").is_zero()


def test_residue_needs_degree_minus_one():
    f = LaurentSeries.from_coeffs(3, [1], lo=-3, trunc=-2, prec=20)
    with pytest.raises(BoundError):
        f.residue("dT")


# --- ring axioms -----------------------------------------------------------------------

@given(PRIMES, SEEDS, SEEDS, SEEDS)
def test_ring_axioms(p, a, b, c):
    f, g, h = rs(p, a), rs(p, b), rs(p, c)
    assert ((f * g) * h).agrees(f * (g * h))
    assert (f * (g + h)).agrees(f * g + f * h)
    assert (f * g).agrees(g * f)
    assert (f - f).is_zero()


@given(PRIMES, SEEDS)
def test_laurent_ring_axioms(p, s):
    f, g = laurent_poly(p, s), laurent_poly(p, s + 1)
    assert ((f * g) * f).agrees(f * (g * f))


# --- text form -------------------------------------------------------------------------

@pytest.mark.parametrize("text", ["T", "3*T - T^2", "T^-1", "T + O(T^5)", "1/2 + 4*T^3", "(2 + O(3^5))*T"])
def test_format_parse_round_trip(text):
    f = parse_series(text, 3)
    assert parse_series(format_series(f), 3).agrees(f)


@given(PRIMES, SEEDS)
def test_format_parse_round_trip_random(p, s):
    f = rs(p, s, trunc=10)
    g = parse_series(format_series(f), p)
    assert g.agrees(f) and g.trunc == f.trunc
