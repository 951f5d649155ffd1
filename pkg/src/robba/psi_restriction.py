"""The left inverse psi of phi, restriction to compact opens, and the P+ action.

psi is computed from the decomposition f = sum_{i<p} (1+T)^i phi(f_i).  The
family (1+T)^i phi(T)^j, indexed by c = i + p*j, is unitriangular against the
monomials T^c with integer entries, so back substitution over Z gives the
decomposition of every T^m exactly.  The rows with i = 0 are cached as the
matrix R[j][m] = coefficient of T^j in psi(T^m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._kernel import INF, convolve, vp
from .errors import BoundError, DomainError, ParseError
from .padic_arith import PAdicScalar
from .series_ring import DEFAULT_TRUNC, NEG_INF, LaurentSeries, one_plus_T_pow


class _PsiTable:
    """Exact decomposition of monomials, grown on demand."""

    def __init__(self, p: int):
        self.p = p
        self.basis: list[list[int]] = []  # basis[c] = (1+T)^i phi(T)^j, c = i + p j
        self.cols: list[list[int]] = []  # cols[m][j] = psi(T^m)_j
        self._phi_pows = [[1]]
        phi = [0] + [math.comb(p, i) for i in range(1, p + 1)]
        self._phi = phi

    def _basis_upto(self, n: int) -> None:
        p = self.p
        while len(self.basis) < n:
            c = len(self.basis)
            i, j = c % p, c // p
            while len(self._phi_pows) <= j:
                self._phi_pows.append(convolve(self._phi_pows[-1], self._phi))
            self.basis.append(convolve(self._phi_pows[j], [math.comb(i, k) for k in range(i + 1)]))

    def upto(self, M: int) -> list[list[int]]:
        p = self.p
        self._basis_upto(M)
        while len(self.cols) < M:
            m = len(self.cols)
            r = [0] * (m + 1)
            r[m] = 1
            col = [0] * (m // p + 1)
            for c in range(m, -1, -1):
                x = r[c]
                if not x:
                    continue
                b = self.basis[c]
                for k in range(c + 1):
                    if b[k]:
                        r[k] -= x * b[k]
                if c % p == 0:
                    col[c // p] = x
            self.cols.append(col)
        return self.cols

    @lru_cache(maxsize=64)
    def valmatrix(self, M: int) -> np.ndarray:
        """V[m, j] = v_p(psi(T^m)_j)."""
        cols = self.upto(M)
        J = (M - 1) // self.p + 1 if M else 0
        V = np.full((M, J), INF)
        for m in range(M):
            for j, x in enumerate(cols[m]):
                if x:
                    V[m, j] = vp(x, self.p)
        return V


@lru_cache(maxsize=None)
def _psi_table(p: int) -> _PsiTable:
    return _PsiTable(p)


def psi_matrix(p: int, M: int) -> list[list[int]]:
    """Columns psi(T^m) for m < M as exact integer coefficient lists."""
    return [list(c) for c in _psi_table(p).upto(M)[:M]]


def psi_tail_bound(p: int, M: int, j: int) -> int:
    """Valuation gain of psi(T^m)_j for every m >= M (checked against the table in the tests)."""
    return max(0, -(-(M - p * j) // (p - 1)) - 1)


@lru_cache(maxsize=None)
def _psi_neg(p: int, m: int) -> tuple[int, ...]:
    """psi(T^-m) = T^-m psi((phi(T)/T)^m): digits at degrees -m, -m+1, ..."""
    q = [math.comb(p, i) for i in range(1, p + 1)]  # phi(T)/T
    poly = [1]
    for _ in range(m):
        poly = convolve(poly, q)
    cols = _psi_table(p).upto(len(poly))
    out = [0] * (len(poly) // p + 1)
    for k, c in enumerate(poly):
        if c:
            for j, x in enumerate(cols[k]):
                out[j] += c * x
    return tuple(out)


def psi(f: LaurentSeries) -> LaurentSeries:
    """psi(f) = f_0 in f = sum (1+T)^i phi(f_i)."""
    if f.var != "T":
        raise DomainError("psi acts on T-series")
    p = f.p
    if f.trunc is not None and f.bound == NEG_INF:
        raise BoundError("psi needs a valuation bound on the unknown coefficients")
    tab = _psi_table(p)
    reg = f.regular_part()
    n = reg.hi
    M = reg.trunc
    top = n if M is None else M
    J = (top - 1) // p + 1 if top > 0 else 0
    cols = tab.upto(max(n, 1))
    out = [0] * J
    for i, d in enumerate(reg.digits):
        if d:
            m = reg.lo + i
            for j, x in enumerate(cols[m]):
                if x and j < J:
                    out[j] += d * x
    if reg.digits and J:
        V = tab.valmatrix(n)[reg.lo:n, :J]
        precs = (np.asarray(reg.precs)[:, None] + V).min(axis=0)
    else:
        precs = np.full(J, INF)
    bound = NEG_INF
    if M is not None:
        for j in range(J):
            precs[j] = min(precs[j], reg.bound + psi_tail_bound(p, M, j))
        bound = reg.bound
    res = LaurentSeries.build(p, 0, reg.e, out, precs, None if M is None else J, bound, INF, "T", f.B, f.wprec)
    if f.lo < 0 or f.tail < INF:
        K = -f.lo
        acc = [0] * (K + 1)  # degrees -K..0
        pr = np.full(K + 1, INF)
        for k in range(f.lo, min(0, f.hi)):
            i = k - f.lo
            d = f.digits[i]
            m = -k
            digs = _psi_neg(p, m)
            for j, x in enumerate(digs):
                deg = -m + j
                if deg > 0:
                    break
                acc[deg + K] += d * x
                pr[deg + K] = min(pr[deg + K], float(f.precs[i]))
            # digits of degree > 0 from a principal term
            if len(digs) > m + 1:
                extra = list(digs[m + 1:])
                res = res + LaurentSeries.build(p, 1, f.e, [d * x for x in extra],
                                                np.full(len(extra), float(f.precs[i])), None, NEG_INF, INF,
                                                "T", f.B, f.wprec)
        tail = f.tail
        if tail < INF:
            hi_deg = -((1 - f.lo + p - 1) // p)
            if hi_deg + K >= 0:
                pr[:hi_deg + K + 1] = np.minimum(pr[:hi_deg + K + 1], tail)
        res = res + LaurentSeries.build(p, -K, f.e, acc, pr, None, NEG_INF, tail, "T", f.B, f.wprec)
    return res


def psi_power(f: LaurentSeries, n: int) -> LaurentSeries:
    for _ in range(n):
        f = psi(f)
    return f


def phi_power(f: LaurentSeries, n: int, extend: bool = False) -> LaurentSeries:
    for _ in range(n):
        f = f.apply_phi(extend=extend)
    return f


# ---------------------------------------------------------------------------------------
# compact opens


@dataclass(frozen=True)
class CompactOpenSubset:
    """A finite union of classes a + p^n Z_p, kept in canonical (coarsest) form."""

    p: int
    level: int
    residues: frozenset

    @classmethod
    def make(cls, p: int, level: int, residues) -> "CompactOpenSubset":
        if level < 0:
            raise DomainError("level must be non-negative")
        q = p ** level
        res = frozenset(int(a) % q for a in residues)
        # merge full fibres down to lower levels
        while level > 0:
            qq = p ** (level - 1)
            groups: dict[int, int] = {}
            for a in res:
                groups[a % qq] = groups.get(a % qq, 0) + 1
            if all(c == p for c in groups.values()):
                res = frozenset(groups)
                level -= 1
            else:
                break
        return cls(p, level, res)

    @classmethod
    def ball(cls, p: int, a: int, n: int) -> "CompactOpenSubset":
        return cls.make(p, n, [a])

    @classmethod
    def whole(cls, p: int) -> "CompactOpenSubset":
        return cls(p, 0, frozenset([0]))

    @classmethod
    def empty(cls, p: int) -> "CompactOpenSubset":
        return cls(p, 0, frozenset())

    @classmethod
    def units(cls, p: int) -> "CompactOpenSubset":
        return cls.make(p, 1, range(1, p))

    @classmethod
    def parse(cls, text: str, p: int) -> "CompactOpenSubset":
        """Read 'a1,a2,...@n' (an empty residue list is the empty set)."""
        if "@" not in text:
            raise ParseError("expected 'a1,a2,...@n'", 0)
        left, _, right = text.partition("@")
        try:
            n = int(right.strip())
        except ValueError:
            raise ParseError(f"bad level {right!r}", len(left) + 1) from None
        items = [x.strip() for x in left.split(",") if x.strip()]
        try:
            res = [int(x) for x in items]
        except ValueError:
            raise ParseError(f"bad residue list {left!r}", 0) from None
        return cls.make(p, n, res)

    def at_level(self, n: int) -> frozenset:
        """Residues mod p^n describing the same set (n >= level)."""
        if n < self.level:
            raise DomainError(f"the set is not a union of classes mod {self.p}^{n}")
        q = self.p ** self.level
        step = self.p ** (n - self.level)
        return frozenset(a + q * k for a in self.residues for k in range(step))

    def complement(self) -> "CompactOpenSubset":
        q = self.p ** self.level
        return CompactOpenSubset.make(self.p, self.level, set(range(q)) - self.residues)

    def __and__(self, other: "CompactOpenSubset") -> "CompactOpenSubset":
        n = max(self.level, other.level)
        return CompactOpenSubset.make(self.p, n, self.at_level(n) & other.at_level(n))

    def __or__(self, other: "CompactOpenSubset") -> "CompactOpenSubset":
        n = max(self.level, other.level)
        return CompactOpenSubset.make(self.p, n, self.at_level(n) | other.at_level(n))

    def __contains__(self, x: int) -> bool:
        return int(x) % self.p ** self.level in self.residues

    def is_empty(self) -> bool:
        return not self.residues

    def __str__(self) -> str:
        return ",".join(str(a) for a in sorted(self.residues)) + f"@{self.level}"


def _neg_rep(a: int, q: int) -> int:
    """Representative of a mod q in (-q, 0]."""
    r = a % q
    return r - q if r else 0


def restrict_ball(f: LaurentSeries, a: int, n: int) -> LaurentSeries:
    """Res_{a+p^n Z_p}(f) = (1+T)^a phi^n psi^n ((1+T)^-a f)."""
    p = f.p
    if n == 0:
        return f
    r = _neg_rep(a, p ** n)
    g = f if r == 0 else one_plus_T_pow(-r, p, B=f.B, wprec=f.wprec) * f
    h = phi_power(psi_power(g, n), n, extend=True)
    if f.trunc is not None and h.trunc is not None and h.trunc > f.trunc:
        h = h.truncate(f.trunc)
    if r == 0:
        return h
    M = h.trunc if h.trunc is not None else max(DEFAULT_TRUNC, h.hi + 1)
    return one_plus_T_pow(r, p, M=M, B=f.B, wprec=f.wprec) * h


def restrict(f: LaurentSeries, U: CompactOpenSubset) -> LaurentSeries:
    """Res_U(f), summed over the classes of U at its canonical level."""
    if U.p != f.p:
        raise DomainError("prime mismatch")
    if U.level == 0:
        return f if U.residues else f.scale(0)
    out = None
    for a in sorted(U.residues):
        r = restrict_ball(f, a, U.level)
        out = r if out is None else out + r
    if out is None:
        return f.scale(0)
    return out


# ---------------------------------------------------------------------------------------
# P+ monoid


@dataclass(frozen=True)
class PPlus:
    """The matrix (p^k a, b; 0, 1) with k >= 0, a a unit and b in Z_p."""

    k: int
    a: object = 1
    b: object = 0

    def __post_init__(self):
        if self.k < 0:
            raise DomainError("k < 0: not in P+")

    def __matmul__(self, other: "PPlus") -> "PPlus":
        # (p^k a, b)(p^k' a', b') = (p^(k+k') a a', p^k a b' + b)
        return PPlus(self.k + other.k, self.a * other.a, self.a * other.b * _P_POW(self, other) + self.b)


def _P_POW(g: PPlus, h: PPlus):
    p = next((x.prime for x in (g.a, g.b, h.a, h.b) if isinstance(x, PAdicScalar)), None)
    if p is None:
        raise DomainError("composing P+ elements needs the prime: pass a or b as PAdicScalar")
    return p ** g.k


def pplus_act(g: PPlus, f: LaurentSeries) -> LaurentSeries:
    """(p^k a, b; 0, 1) f = (1+T)^b phi^k(sigma_a f)."""
    if g.k < 0:
        raise DomainError("k < 0: not in P+")
    p = f.p
    a = g.a if isinstance(g.a, PAdicScalar) else PAdicScalar.of(p, g.a)
    h = f if a.exact and a.lift() == 1 else f.apply_sigma(a)
    h = phi_power(h, g.k)
    b = g.b if isinstance(g.b, PAdicScalar) else PAdicScalar.of(p, g.b)
    if b.is_zero() and b.exact:
        return h
    M = h.trunc if h.trunc is not None else None
    return one_plus_T_pow(b, M=M or DEFAULT_TRUNC, wprec=f.wprec, B=f.B) * h
