import math
import random

import pytest
from hypothesis import given, strategies as st

from robba import LaurentSeries, PAdicScalar
from robba.errors import DomainError, ParseError
from robba.measures import Measure, measure_psi
from robba.phigamma import random_series
from robba.psi_restriction import (CompactOpenSubset, PPlus, phi_power, pplus_act, psi, psi_matrix,
                                   psi_tail_bound, restrict, restrict_ball)
from robba.series_ring import format_series, one_plus_T_pow as opt, parse_series

PRIMES = st.sampled_from([3, 5])
SEEDS = st.integers(0, 10 ** 6)


def to_onept_basis(cs):
    """Coefficients in T -> coefficients in (1+T): T^m = sum_k C(m,k)(-1)^(m-k) (1+T)^k."""
    out = [0] * len(cs)
    for m, c in enumerate(cs):
        for k in range(m + 1):
            out[k] += c * math.comb(m, k) * (-1) ** (m - k)
    return out


def from_onept_basis(a):
    out = [0] * len(a)
    for k, c in enumerate(a):
        for j in range(k + 1):
            out[j] += c * math.comb(k, j)
    return out


def psi_oracle(p, cs):
    a = to_onept_basis(cs)
    return from_onept_basis([a[k] for k in range(0, len(a), p)])


def poly(p, seed, deg=20):
    r = random.Random(seed)
    return [r.randrange(-50, 51) for _ in range(deg)]


# --- psi -------------------------------------------------------------------------------

@pytest.mark.parametrize("p", [3, 5])
def test_psi_frozen(p):
    assert format_series(psi(parse_series("1", p))) == "1"
    assert psi(parse_series("1+T", p)).is_zero()
    assert format_series(psi(parse_series("T", p))) == "-1"
    assert format_series(psi(opt(p, p))) == "1 + T"


def test_psi_small_powers_p3():
    assert format_series(psi(parse_series("T^2", 3))) == "1"
    assert format_series(psi(parse_series("T^3", 3))) == "T"


@given(PRIMES, SEEDS)
def test_psi_matches_onept_oracle(p, s):
    cs = poly(p, s)
    got = psi(LaurentSeries.from_coeffs(p, cs))
    want = LaurentSeries.from_coeffs(p, psi_oracle(p, cs))
    assert got.agrees(want)


@pytest.mark.parametrize("p", [3, 5])
def test_psi_matrix_matches_oracle(p):
    cols = psi_matrix(p, 30)
    for m in range(30):
        want = psi_oracle(p, [0] * m + [1])
        assert cols[m] + [0] * (len(want) - len(cols[m])) == want[:max(len(want), len(cols[m]))]


@pytest.mark.parametrize("p", [3, 5])
def test_psi_tail_bound_holds_on_table(p):
    M = 12
    cols = psi_matrix(p, 60)
    for m in range(M, 60):
        for j, x in enumerate(cols[m]):
            if x:
                v = 0
                while x % p == 0:
                    x //= p
                    v += 1
                assert v >= psi_tail_bound(p, M, j)


@given(PRIMES, SEEDS)
def test_psi_phi_is_identity(p, s):
    f = random_series(p, random.Random(s), 24, 20)
    assert psi(f.apply_phi()).agrees(f)


@given(PRIMES, SEEDS)
def test_psi_phi_on_principal_parts(p, s):
    f = random_series(p, random.Random(s), 10, 20, principal=2, exact=True).with_params(B=96)
    assert psi(f.apply_phi()).agrees(f)


@given(PRIMES, SEEDS, st.sampled_from([2, -1, 4]))
def test_psi_commutes_with_sigma(p, s, a):
    if a % p == 0:
        return
    f = random_series(p, random.Random(s), 24, 20)
    assert psi(f.apply_sigma(a)).agrees(psi(f).apply_sigma(a))


@given(PRIMES, SEEDS)
def test_psi_matches_measure_side(p, s):
    f = random_series(p, random.Random(s), 24, 20)
    mu = Measure(f)
    assert psi(f).agrees(measure_psi(mu).amice())


def test_psi_rejects_t_variable():
    with pytest.raises(DomainError):
        psi(LaurentSeries.monomial(3, 1, var="t"))


# --- compact opens and restriction ----------------------------------------------------

def test_compact_open_canonical_form():
    U = CompactOpenSubset.make(3, 2, [1, 4, 7])
    assert U.level == 1 and U.residues == frozenset([1])
    assert CompactOpenSubset.make(3, 1, [0, 1, 2]) == CompactOpenSubset.whole(3)
    assert str(CompactOpenSubset.units(5)) == "1,2,3,4@1"
    assert CompactOpenSubset.parse("2,5@2", 3).at_level(2) == frozenset([2, 5])
    assert CompactOpenSubset.units(3).complement() == CompactOpenSubset.ball(3, 0, 1)
    with pytest.raises(ParseError):
        CompactOpenSubset.parse("1,2", 3)


def test_restrict_frozen():
    p = 3
    one, x = parse_series("1", p), parse_series("1+T", p)
    units = CompactOpenSubset.units(p)
    assert restrict(one, units).is_zero()
    assert restrict(one, units.complement()).agrees(one)
    assert restrict_ball(x, 1, 1).agrees(x)
    assert restrict_ball(x, 2, 1).is_zero()
    x7 = opt(7, p)
    assert restrict_ball(x7, 7, 2).agrees(x7)
    assert restrict_ball(x7, 4, 2).is_zero()


def _balls(p, n):
    return [CompactOpenSubset.ball(p, a, n) for a in range(p ** n)]


@given(PRIMES, SEEDS, st.integers(1, 2))
def test_restrictions_sum_to_identity(p, s, n):
    f = LaurentSeries.from_coeffs(p, poly(p, s, 16))
    acc = None
    for U in _balls(p, n):
        r = restrict(f, U)
        acc = r if acc is None else acc + r
    assert acc.agrees(f)


@given(PRIMES, SEEDS, st.integers(0, 8), st.integers(0, 8))
def test_restriction_idempotent_and_commuting(p, s, a, b):
    f = LaurentSeries.from_coeffs(p, poly(p, s, 16))
    U, V = CompactOpenSubset.ball(p, a, 1), CompactOpenSubset.ball(p, b, 2)
    assert restrict(restrict(f, U), U).agrees(restrict(f, U))
    assert restrict(restrict(f, U), V).agrees(restrict(restrict(f, V), U))
    assert restrict(restrict(f, U), V).agrees(restrict(f, U & V))


@given(PRIMES, SEEDS)
def test_restrict_to_units_is_one_minus_phi_psi(p, s):
    f = random_series(p, random.Random(s), 24, 20)
    assert restrict(f, CompactOpenSubset.units(p)).agrees(f - psi(f).apply_phi())


def test_restrict_prime_mismatch():
    with pytest.raises(DomainError):
        restrict(parse_series("T", 3), CompactOpenSubset.units(5))


# --- P+ ---------------------------------------------------------------------------------

@pytest.mark.parametrize("p", [3, 5])
def test_pplus_generators(p):
    f = LaurentSeries.from_coeffs(p, poly(p, 1, 12))
    assert pplus_act(PPlus(1), f).agrees(f.apply_phi())
    assert pplus_act(PPlus(0, 1, 2), f).agrees(opt(2, p) * f)
    assert pplus_act(PPlus(0, 2), f).agrees(f.apply_sigma(2))
    assert pplus_act(PPlus(2), f).agrees(phi_power(f, 2))


@pytest.mark.parametrize("p", [3, 5])
def test_pplus_on_dirac(p):
    # (p a, b) sends (1+T)^x to (1+T)^(p a x + b)
    got = pplus_act(PPlus(1, 2, 1), opt(4, p))
    assert got.agrees(opt(p * 2 * 4 + 1, p))


@given(PRIMES, SEEDS, st.integers(0, 1), st.sampled_from([1, 2, -1]), st.integers(0, 4),
       st.integers(0, 1), st.sampled_from([1, 2, -1]), st.integers(0, 4))
def test_pplus_monoid_law(p, s, k1, a1, b1, k2, a2, b2):
    if a1 % p == 0 or a2 % p == 0:
        return
    f = random_series(p, random.Random(s), 16, 20, exact=True)
    g = PPlus(k1, PAdicScalar.of(p, a1), PAdicScalar.of(p, b1))
    h = PPlus(k2, PAdicScalar.of(p, a2), PAdicScalar.of(p, b2))
    assert pplus_act(g @ h, f).agrees(pplus_act(g, pplus_act(h, f)))


def test_pplus_negative_k():
    with pytest.raises(DomainError):
        PPlus(-1)
