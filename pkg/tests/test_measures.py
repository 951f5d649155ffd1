import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from robba import Character, PAdicScalar
from robba.errors import DomainError, NotAMeasure, ParseError, SupportError
from robba.measures import (Measure, ball_mass, format_measure, indicator_mahler_bound, inverse_amice,
                            measure_psi, measure_restrict, parse_measure, pushforward_affine, wD_integral,
                            wD_riemann)
from robba.psi_restriction import CompactOpenSubset, psi, restrict
from robba.series_ring import NEG_INF, LaurentSeries, one_plus_T_pow, parse_series

PRIMES = st.sampled_from([3, 5])
SEEDS = st.integers(0, 10 ** 6)


def atoms(p, seed, count=4, below=None, units=False):
    r = random.Random(seed)
    below = below or p ** 3
    out = []
    while len(out) < count:
        b = r.randrange(0, below)
        if not units or b % p:
            out.append((b, r.randrange(-9, 10) or 1))
    return out


def test_dirac_mahler_coefficients():
    mu = Measure.dirac(3, 4, M=8)
    assert [c.lift() for c in mu.mahler] == [math.comb(4, n) for n in range(8)]
    assert mu.total_mass().agrees(PAdicScalar.one(3))
    assert format_measure(Measure.dirac(3, 2, M=4)) == "mahler: 1,2,1,0"


def test_dirac_at_rational_point():
    # delta_{1/2}: Mahler coefficients C(1/2, n)
    mu = Measure.dirac(3, Fraction(1, 2), M=6)
    for n, c in enumerate(mu.mahler):
        want = Fraction(1)
        for i in range(n):
            want = want * (Fraction(1, 2) - i) / (i + 1)
        assert c.agrees(PAdicScalar.of(3, want))


def test_parse_measure_forms():
    mu = parse_measure("mahler: 1,(2 + O(3^5)),0", 3, bound=0)
    assert mu.M == 3 and mu.mahler[1].prec == 5
    assert parse_measure("dirac: 2, 5:3", 3).amice().agrees(
        one_plus_T_pow(2, 3) + one_plus_T_pow(5, 3).scale(3))
    assert parse_measure(format_measure(mu), 3, bound=0).agrees(mu)
    with pytest.raises(ParseError):
        parse_measure("1,2,3", 3)
    with pytest.raises(ParseError):
        parse_measure("mahler: 1,x", 3)


def test_not_a_measure():
    with pytest.raises(NotAMeasure):
        inverse_amice(parse_series("T^-1", 3))
    with pytest.raises(NotAMeasure):
        Measure(LaurentSeries.from_coeffs(3, [1, 1], trunc=4, bound=NEG_INF))
    with pytest.raises(SupportError):
        Measure.dirac(3, Fraction(1, 3))


@given(PRIMES, SEEDS, st.integers(1, 7), st.integers(0, 9))
def test_pushforward_on_diracs(p, s, a, b):
    if a % p == 0:
        a += 1
    at = atoms(p, s)
    mu = Measure.diracs(p, at, M=12)
    bare = Measure(mu.amice())  # no atoms: forces the Mahler formula
    want = Measure.diracs(p, [(a * x + b, w) for x, w in at], M=12)
    assert pushforward_affine(bare, a, b).agrees(want)
    assert pushforward_affine(mu, a, b).agrees(want)


def test_pushforward_errors():
    mu = Measure.dirac(3, 1, M=4)
    with pytest.raises(DomainError):
        pushforward_affine(mu, 0)
    with pytest.raises(SupportError):
        pushforward_affine(mu, Fraction(1, 3))


@given(PRIMES, SEEDS)
def test_measure_psi_on_diracs(p, s):
    at = atoms(p, s)
    mu = Measure(Measure.diracs(p, at, M=16).amice())
    want = Measure.diracs(p, [(b // p, w) for b, w in at if b % p == 0], M=(16 - 1) // p + 1)
    assert measure_psi(mu).agrees(want)


@settings(max_examples=30)
@given(PRIMES, SEEDS)
def test_measure_psi_matches_series_psi(p, s):
    r = random.Random(s)
    mu = Measure.from_mahler(p, [r.randrange(p ** 20) for _ in range(24)], bound=0, prec=20)
    assert psi(mu.amice()).agrees(measure_psi(mu).amice())


@given(PRIMES, SEEDS, st.integers(0, 8), st.integers(1, 2))
def test_ball_mass_and_restriction(p, s, a, n):
    at = atoms(p, s)
    q = p ** n
    mu = Measure.diracs(p, at, M=24)
    want = sum(w for b, w in at if b % q == a % q)
    assert ball_mass(mu, a, n).agrees(PAdicScalar.of(p, want))
    bare = Measure(mu.amice())
    assert ball_mass(bare, a, n).agrees(PAdicScalar.of(p, want))
    U = CompactOpenSubset.ball(p, a, n)
    assert restrict(mu.amice(), U).agrees(measure_restrict(mu, U).amice())


@pytest.mark.parametrize("p,n", [(3, 1), (3, 2), (5, 1)])
def test_indicator_bound_holds(p, n):
    q = p ** n
    for a in range(q):
        for m in range(1, 40):
            c = sum((-1) ** (m - j) * math.comb(m, j) for j in range(a, m + 1, q))
            if c:
                v = 0
                while c % p == 0:
                    c //= p
                    v += 1
                assert v >= indicator_mahler_bound(p, n, m)


# --- w_D --------------------------------------------------------------------------------

def test_wD_on_a_dirac():
    dD = Character(3, PAdicScalar.of(3, 2), 2)
    got = wD_integral(Measure.dirac(3, 2, M=12), dD)
    want = Measure.dirac(3, Fraction(1, 2), M=12, weight=4)
    assert got.agrees(want)


def test_wD_needs_units():
    dD = Character.trivial(3)
    with pytest.raises(SupportError):
        wD_integral(Measure.dirac(3, 3, M=8), dD)
    with pytest.raises(DomainError):
        wD_riemann(parse_series("1", 3), dD)


@given(PRIMES, SEEDS, st.integers(0, 3))
def test_wD_is_an_involution(p, s, m):
    dD = Character(p, PAdicScalar.of(p, p), m)
    mu = Measure.diracs(p, atoms(p, s, units=True), M=16)
    assert wD_integral(wD_integral(mu, dD), dD).agrees(mu)


@given(PRIMES, SEEDS, st.integers(0, 3), st.sampled_from([2, 4, 7]))
def test_wD_twist_law(p, s, m, a):
    if a % p == 0:
        a += 1
    dD = Character(p, PAdicScalar.of(p, 2), m)
    mu = Measure.diracs(p, atoms(p, s, units=True), M=16)
    lhs = wD_integral(pushforward_affine(mu, a), dD).amice()
    rhs = wD_integral(mu, dD).amice().apply_sigma(PAdicScalar.of(p, Fraction(1, a)), trunc=16).scale(dD(a))
    assert lhs.agrees(rhs)


def test_wD_riemann_sum_of_dirac_at_one_is_exact():
    p = 3
    dD = Character(p, PAdicScalar.one(p), 1)
    f = one_plus_T_pow(1, p)
    rep = wD_riemann(f, dD, n_max=2, M=12)
    for S in rep.sums:
        assert S.agrees(f)


def test_wD_riemann_improves_on_a_fixed_case():
    p = 3
    dD = Character(p, PAdicScalar.one(p), 2)
    mu = Measure.diracs(p, [(2, 1), (5, -1), (7, 3)], M=24)
    oracle = wD_integral(mu, dD).amice()
    rep = wD_riemann(mu.amice(), dD, n_max=3, M=24)
    agree, caps = [], []
    for S in rep.sums:
        c = S.compare(oracle)
        agree.append(float(min(c.residuals[:6].min(), c.floors[:6].min())))
        caps.append(float(c.floors[:6].min()))
    # strict improvement until the known digits all agree
    assert all(x < y or x >= cap for x, y, cap in zip(agree, agree[1:], caps))
    assert agree[0] < agree[-1]
    assert len(rep.distances) == 2
