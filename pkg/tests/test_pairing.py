import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from robba import Character, LaurentSeries, PAdicScalar
from robba.dif_local import DifLattice, random_lattice_element
from robba.errors import DomainError
from robba.pairing import WedgeForm, dif_witness, pair_D, pair_dif, residue_adjunction, uminus_adjoint_check, wedge
from robba.phigamma import ModuleElement, PhiGammaModule, phi_module, random_element, random_series, sigma_module
from robba.series_ring import parse_series

SEEDS = st.integers(0, 10 ** 6)


def laurent_elem(M, s, principal=2, trunc=10):
    r = random.Random(s)
    return ModuleElement([random_series(M.p, r, trunc, 20, principal=principal, exact=True) for _ in range(2)])


def test_wedge_basics():
    p = 3
    one, zero = parse_series("1", p), parse_series("0", p)
    e1, e2 = ModuleElement.of(one, zero), ModuleElement.of(zero, one)
    assert wedge(e1, e2).agrees(one)
    assert wedge(e2, e1).agrees(-one)
    assert wedge(e1, e1).is_zero()
    M = PhiGammaModule.with_weights(p, 0, 2)
    assert WedgeForm(M).target == M.delta1 * M.delta2
    with pytest.raises(DomainError):
        wedge(ModuleElement.of(one), ModuleElement.of(one))


def test_pair_D_frozen():
    p = 3
    M = PhiGammaModule.with_weights(p, 0, 0)
    one, zero = parse_series("1", p), parse_series("0", p)
    Tinv = parse_series("T^-1", p)
    e1, e2 = ModuleElement.of(one, zero), ModuleElement.of(zero, one)
    assert pair_D(e1, e1, M).is_zero()
    # sigma_{-1}(1/T) = -1/T - 1 and res(-dT / (T (1+T))) = -1
    assert pair_D(ModuleElement.of(Tinv, zero), e2, M).agrees(PAdicScalar.of(p, -1))
    assert pair_D(e2, ModuleElement.of(Tinv, zero), M).agrees(PAdicScalar.of(p, -1))
    assert pair_D(e1, e2, M).is_zero()


@settings(max_examples=15)
@given(st.sampled_from([3, 5]), SEEDS, st.sampled_from([2, 4]))
def test_pair_D_gamma_twist(p, s, a):
    # [sigma_a x, sigma_a y] = delta_D(a) [x, y] since sigma_a(dt) = a dt
    M = PhiGammaModule(Character(p, PAdicScalar.of(p, 2), 1), Character(p, PAdicScalar.one(p), 2))
    x, y = laurent_elem(M, s), laurent_elem(M, s + 1)
    lhs = pair_D(sigma_module(x, M, a, trunc=48), sigma_module(y, M, a, trunc=48), M)
    assert lhs.agrees(pair_D(x, y, M) * M.delta_D(a))


@settings(max_examples=10)
@given(SEEDS)
def test_pair_D_phi_twist(s):
    # res(phi(f) dt) = res(f dt), so [phi x, phi y] = delta1 delta2 (p) [x, y]
    p = 3
    M = PhiGammaModule(Character(p, PAdicScalar.of(p, 2), 0), Character(p, PAdicScalar.of(p, 5), 1))
    r = random.Random(s)
    x = ModuleElement([random_series(p, r, 6, 20, principal=1, exact=True, B=96) for _ in range(2)])
    y = ModuleElement([random_series(p, r, 6, 20, exact=True) for _ in range(2)])
    lhs = pair_D(phi_module(x, M), phi_module(y, M), M)
    assert lhs.agrees(pair_D(x, y, M) * PAdicScalar.of(p, 10))


@settings(max_examples=10)
@given(st.sampled_from([3, 5]), SEEDS)
def test_residue_adjunction_laurent_polys(p, s):
    r = random.Random(s)
    f = random_series(p, r, 6, 20, principal=2, exact=True)
    g = random_series(p, r, 12, 20, principal=1, exact=True)
    lhs, rhs = residue_adjunction(f, g)
    assert lhs.agrees(rhs)


@settings(max_examples=10)
@given(st.sampled_from([3, 5]), SEEDS)
def test_residue_adjunction_truncated_g(p, s):
    r = random.Random(s)
    f = random_series(p, r, 6, 20, exact=True)
    g = random_series(p, r, 24, 20, principal=3)
    lhs, rhs = residue_adjunction(f, g)
    assert lhs.agrees(rhs)


def test_residue_adjunction_frozen():
    # psi(1/T) = 1/T: res(phi(1) T^-1 dT/(1+T)) = 1 on both sides
    lhs, rhs = residue_adjunction(parse_series("1", 3), parse_series("T^-1", 3))
    assert lhs.agrees(PAdicScalar.one(3)) and rhs.agrees(PAdicScalar.one(3))


@settings(max_examples=15)
@given(st.sampled_from([(0, 1), (0, 2), (1, 3)]), SEEDS, st.integers(1, 2))
def test_uminus_is_antiadjoint(w, s, j):
    M = PhiGammaModule.with_weights(3, *w)
    rep = uminus_adjoint_check(laurent_elem(M, s), laurent_elem(M, s + 7), M, j)
    assert rep.ok, rep.to_json()
    assert rep.floor >= 10


# --- localised pairing --------------------------------------------------------------------

@pytest.mark.parametrize("structure", ["deRham", "nonDeRham"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_pair_dif_orthogonality(structure, k):
    L = DifLattice(3, 1, k, structure, trunc=8)
    r = random.Random(k)
    for _ in range(5):
        x, y = random_lattice_element(L, r, "N"), random_lattice_element(L, r, "tkN")
        assert pair_dif(x, y).is_zero()
        assert pair_dif(y, x).is_zero()
        u, v = random_lattice_element(L, r, "D+"), random_lattice_element(L, r, "D+")
        assert pair_dif(u, v).is_zero()


@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("n", [1, 2])
def test_pair_dif_witness(k, n):
    L = DifLattice(5 if n == 1 else 3, n, k)
    x, y = dif_witness(L)
    assert pair_dif(x, y).agrees(PAdicScalar.of(L.p, -1))


def test_pair_dif_level_mismatch():
    with pytest.raises(DomainError):
        pair_dif(DifLattice(3, 1, 1).e1(), DifLattice(3, 2, 1).e1())
    with pytest.raises(DomainError):
        pair_dif(DifLattice(3, 1, 1).e1(), DifLattice(3, 1, 2).e1())
