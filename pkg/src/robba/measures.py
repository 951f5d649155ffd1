"""Measures on Z_p through their Mahler coefficients.

A measure is stored as its Amice transform A = sum_n c_n T^n, where
c_n = int C(x, n) dmu, truncated at T^M, together with a valuation bound for
the unknown c_n (n >= M).  Finite combinations of Dirac masses also keep
their atoms, which gives exact answers for operations defined pointwise
(pushforwards, the involution w_D).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._kernel import INF, ilog
from .characters import Character
from .errors import ConvergenceError, DomainError, NotAMeasure, ParseError, SupportError
from .padic_arith import DEFAULT_PREC, PAdicScalar, as_scalar
from .psi_restriction import CompactOpenSubset, psi, psi_tail_bound
from .series_ring import DEFAULT_TRUNC, NEG_INF, LaurentSeries, one_plus_T_pow

Atom = tuple  # (point: PAdicScalar, weight: PAdicScalar)


@dataclass(frozen=True, eq=False)
class Measure:
    """Truncated Mahler data of a bounded measure on Z_p.

    ``bound`` is a lower bound for v_p(c_n) for every n (so |c_n| <= p^-bound).
    """

    amice_series: LaurentSeries
    atoms: tuple | None = field(default=None)
    size: int | None = field(default=None)

    def __post_init__(self):
        f = self.amice_series
        if f.var != "T" or f.lo < 0 or f.tail < INF:
            raise NotAMeasure("a measure has no principal part")
        if f.trunc is not None and f.bound == NEG_INF:
            raise NotAMeasure("the Mahler coefficients need a boundedness witness")

    @property
    def p(self) -> int:
        return self.amice_series.p

    @property
    def M(self) -> int:
        f = self.amice_series
        if f.trunc is not None:
            return f.trunc
        return max(f.hi, self.size or 0)

    @property
    def bound(self) -> float:
        return self.amice_series.gmin()

    @property
    def mahler(self) -> list[PAdicScalar]:
        return [self.amice_series.coeff(n) for n in range(self.M)]

    @classmethod
    def from_mahler(cls, p: int, coeffs: Sequence, bound: float | None = None, prec: float | None = None,
                    exact_tail: bool = False) -> "Measure":
        """Measure with the given c_0, ..., c_{M-1}.

        With ``exact_tail`` the remaining coefficients are exactly zero;
        otherwise ``bound`` (default: the smallest stored valuation) bounds them.
        """
        cs = list(coeffs)
        if exact_tail:
            return cls(LaurentSeries.from_coeffs(p, cs, prec=prec), size=len(cs))
        f = LaurentSeries.from_coeffs(p, cs, trunc=len(cs), prec=prec, bound=bound)
        return cls(f)

    @classmethod
    def dirac(cls, p: int, b, M: int = DEFAULT_TRUNC, weight=1) -> "Measure":
        return cls.diracs(p, [(b, weight)], M)

    @classmethod
    def diracs(cls, p: int, atoms: Sequence, M: int = DEFAULT_TRUNC) -> "Measure":
        """sum of weight * delta_point over the given atoms (points in Z_p)."""
        norm = []
        f = None
        for b, w in atoms:
            b = as_scalar(p, b)
            w = as_scalar(p, w)
            if b.unit and b.valuation < 0:
                raise SupportError(f"{b} is not in Z_p")
            # atoms at non-negative integers keep their exact polynomial transform
            g = one_plus_T_pow(b, M=M).scale(w)
            f = g if f is None else f + g
            norm.append((b, w))
        if f is None:
            f = LaurentSeries.from_coeffs(p, [], trunc=M, bound=INF)
        return cls(f, tuple(norm), M)

    def amice(self) -> LaurentSeries:
        return self.amice_series

    def __add__(self, other: "Measure") -> "Measure":
        atoms = self.atoms + other.atoms if self.atoms is not None and other.atoms is not None else None
        return Measure(self.amice_series + other.amice_series, atoms, max(self.M, other.M))

    def scale(self, c) -> "Measure":
        c = as_scalar(self.p, c)
        atoms = None if self.atoms is None else tuple((b, w * c) for b, w in self.atoms)
        return Measure(self.amice_series.scale(c), atoms, self.M)

    def total_mass(self) -> PAdicScalar:
        return self.amice_series.coeff(0)

    def agrees(self, other: "Measure") -> bool:
        return self.amice_series.agrees(other.amice_series)

    def __str__(self):
        return format_measure(self)


def amice(mu: Measure) -> LaurentSeries:
    """A_mu = sum_n (int C(x,n) dmu) T^n; on Diracs, delta_b -> (1+T)^b."""
    return mu.amice_series


def inverse_amice(f: LaurentSeries) -> Measure:
    """The measure whose Amice transform is f (f must be bounded without principal part)."""
    if f.var != "T":
        raise NotAMeasure("expected a T-series")
    if f.lo < 0 and any(f.digits[:-f.lo]) or f.tail < INF:
        raise NotAMeasure("a series with a principal part is not the transform of a measure")
    if f.trunc is not None and f.bound == NEG_INF:
        raise NotAMeasure("unbounded coefficients: a distribution, not a measure")
    return Measure(f.regular_part())


# ---------------------------------------------------------------------------------------
# text form


def format_measure(mu: Measure) -> str:
    parts = []
    for c in mu.mahler:
        q = c.to_fraction()
        parts.append(str(q) if c.exact else f"({q} + O({mu.p}^{int(c.prec)}))")
    return "mahler: " + ",".join(parts)


def parse_measure(text: str, p: int, bound: float | None = None, prec: float | None = None) -> Measure:
    """Read 'mahler: c0,c1,...' (entries are rationals or '(q + O(p^N))') or 'dirac: b[:w], ...'."""
    s = text.strip()
    if s.startswith("dirac:"):
        return _parse_diracs(s, p)
    if not s.startswith("mahler:"):
        raise ParseError("expected 'mahler: c0,c1,...' or 'dirac: b[:w],...'", 0)
    body = s[len("mahler:"):]
    cs = []
    pos = len("mahler:")
    for item in _split_top(body):
        tok = item.strip()
        try:
            if tok.startswith("("):
                if not tok.endswith(")"):
                    raise ValueError
                inner = tok[1:-1]
                q, _, o = inner.partition("+")
                o = o.strip()
                if not (o.startswith("O(") and o.endswith(")")):
                    raise ValueError
                base, _, N = o[2:-1].partition("^")
                if int(base) != p:
                    raise ParseError(f"prime {base} does not match {p}", pos)
                cs.append(PAdicScalar.of(p, Fraction(q.strip()), int(N)))
            else:
                cs.append(PAdicScalar.of(p, Fraction(tok)))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad Mahler coefficient {tok!r}", pos) from None
        pos += len(item) + 1
    if not cs:
        raise ParseError("no Mahler coefficients", pos)
    return Measure.from_mahler(p, cs, bound=bound, prec=prec)


def _parse_diracs(s: str, p: int) -> Measure:
    atoms = []
    pos = len("dirac:")
    for item in s[pos:].split(","):
        b, _, w = item.partition(":")
        try:
            atoms.append((Fraction(b.strip()), Fraction(w.strip() or 1)))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad atom {item.strip()!r}", pos) from None
        pos += len(item) + 1
    return Measure.diracs(p, atoms)


def _split_top(s: str) -> list[str]:
    out, depth, cur = [], 0, []
    for ch in s:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            out.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    out.append("".join(cur))
    return out


# ---------------------------------------------------------------------------------------
# pushforwards and the measure-side oracle for psi / Res


def _mahler_of_function(values: Sequence, m_max: int) -> list:
    """Mahler coefficients Delta^m g(0) of g from its values g(0..m_max-1)."""
    out = []
    vals = list(values)
    for m in range(m_max):
        out.append(sum((-1) ** (m - j) * math.comb(m, j) * vals[j] for j in range(m + 1)))
    return out


def pushforward_affine(mu: Measure, a, b=0) -> Measure:
    """Image of mu under x -> a x + b (a a non-zero p-adic integer, b in Z_p).

    On Amice transforms this is f -> (1+T)^b f((1+T)^a - 1), i.e. the P+
    element (p^k u, b) with a = p^k u.
    """
    from .psi_restriction import PPlus, pplus_act

    p = mu.p
    a = as_scalar(p, a)
    b = as_scalar(p, b)
    if a.unit == 0:
        raise DomainError("a must be non-zero")
    if a.valuation < 0 or (b.unit and b.valuation < 0):
        raise SupportError("the image of Z_p escapes Z_p")
    k = int(a.valuation)
    u = PAdicScalar.make(p, 0, a.unit, a.prec - k)
    g = pplus_act(PPlus(k, u, b), mu.amice_series)
    atoms = None
    if mu.atoms is not None:
        atoms = tuple((a * x + b, w) for x, w in mu.atoms)
    return Measure(g, atoms, None if atoms is None else mu.M)


def measure_psi(mu: Measure) -> Measure:
    """psi on the measure side: restrict to pZ_p, then push forward by x -> x/p.

    c'_n = sum_m c_m a_{n,m}, a_{n,m} = sum_{p | j <= m} (-1)^(m-j) C(m,j) C(j/p, n).
    """
    p = mu.p
    f = mu.amice_series
    M = mu.M
    J = (M - 1) // p + 1 if M else 0
    out = []
    for n in range(J):
        acc = PAdicScalar.zero(p)
        prec = INF
        for m in range(M):
            a = sum((-1) ** (m - j) * math.comb(m, j) * math.comb(j // p, n) for j in range(0, m + 1, p))
            if a:
                acc = acc + f.coeff(m) * a
        if f.trunc is not None:
            prec = f.bound + psi_tail_bound(p, M, n)
            if acc.prec > prec:
                acc = PAdicScalar.make(p, acc.valuation, acc.unit, prec) if acc.unit else PAdicScalar.zero(p, prec)
        out.append(acc)
    if f.trunc is None:
        return Measure(LaurentSeries.from_coeffs(p, out), size=J)
    return Measure(LaurentSeries.from_coeffs(p, out, trunc=J, bound=f.bound))


def measure_restrict(mu: Measure, U: CompactOpenSubset) -> Measure:
    """Res_U on the measure side: c'_n = int_U C(x, n) dmu, expanded in Mahler coefficients.

    The expansion of 1_U C(x, n) is infinite, so the result is only as good
    as the truncation allows; the level of U must be small against M.
    """
    p = mu.p
    f = mu.amice_series
    M = mu.M
    if mu.atoms is not None:
        kept = [(b, w) for b, w in mu.atoms if b.lift_mod(U.level) % p ** U.level in U.residues]
        return Measure.diracs(p, kept, M)
    if f.trunc is None:
        raise DomainError("measure_restrict needs truncated data or atoms")
    out = []
    for n in range(M):
        vals = [math.comb(j, n) if j in U else 0 for j in range(M)]
        k = _mahler_of_function(vals, M)
        acc = PAdicScalar.zero(p)
        for m in range(M):
            if k[m]:
                acc = acc + f.coeff(m) * k[m]
        out.append(acc)
    return Measure(LaurentSeries.from_coeffs(p, out, trunc=M, bound=NEG_INF))


def ball_mass(mu: Measure, a: int, n: int) -> PAdicScalar:
    """mu(a + p^n Z_p) from Mahler data.

    The Mahler coefficients of the indicator of a ball of level n have
    valuation >= floor(m / (p^(n-1) (p-1))) - n, which caps the precision
    when the data is truncated.
    """
    p = mu.p
    if mu.atoms is not None:
        acc = PAdicScalar.zero(p)
        for b, w in mu.atoms:
            if b.lift_mod(n) % p ** n == a % p ** n:
                acc = acc + w
        return acc
    f = mu.amice_series
    M = mu.M
    q = p ** n
    acc = PAdicScalar.zero(p)
    for m in range(M):
        c = sum((-1) ** (m - j) * math.comb(m, j) for j in range(a % q, m + 1, q))
        if c:
            acc = acc + f.coeff(m) * c
    if f.trunc is not None:
        cap = f.bound + indicator_mahler_bound(p, n, M)
        if acc.prec > cap:
            acc = PAdicScalar.make(p, acc.valuation, acc.unit, cap) if acc.unit else PAdicScalar.zero(p, cap)
    return acc


def indicator_mahler_bound(p: int, n: int, m: int) -> int:
    """Lower bound for v_p of the m-th Mahler coefficient of 1_{a+p^n Z_p}, valid for all m' >= m."""
    return m // (p ** (n - 1) * (p - 1)) - n if n else 0


# ---------------------------------------------------------------------------------------
# the involution w_D


def _check_units(mu: Measure) -> None:
    p = mu.p
    if mu.atoms is not None:
        for b, w in mu.atoms:
            if not w.is_zero() and (b.unit == 0 or b.valuation > 0):
                raise SupportError(f"atom at {b} is not a unit: w_D needs support in Z_p^x")
        return
    if not ball_mass(mu, 0, 1).is_zero():
        raise SupportError("the measure charges pZ_p: w_D needs support in Z_p^x")


def wD_integral(mu: Measure, delta_D: Character, level: int | None = None) -> Measure:
    """A_{w_D mu} = int_{Z_p^x} delta_D(x) (1+T)^(1/x) dmu.

    Dirac combinations are mapped exactly: delta_b -> delta_D(b) delta_{1/b}.
    Otherwise the integral is a Riemann sum over the classes mod p^level,
    with precision capped by the variation of the integrand on each class
    and by the truncation of the Mahler data.
    """
    p = mu.p
    _check_units(mu)
    M = mu.M
    if mu.atoms is not None:
        new = []
        for b, w in mu.atoms:
            if w.is_zero() and w.exact:
                continue
            new.append((b.inverse(DEFAULT_PREC), w * delta_D(b)))
        return Measure.diracs(p, new, M)
    level = level or 3
    f = mu.amice_series
    vmin = f.gmin()
    acc = None
    q = p ** level
    for i in range(1, q):
        if i % p == 0:
            continue
        m = ball_mass(mu, i, level)
        if m.is_zero() and m.prec == INF:
            continue
        inv = PAdicScalar.of(p, Fraction(1, i))
        term = one_plus_T_pow(inv, M=M).scale(m * delta_D(i))
        acc = term if acc is None else acc + term
    if acc is None:
        acc = LaurentSeries.from_coeffs(p, [], trunc=M, bound=INF)
    # variation of delta_D(x)(1+T)^(1/x) on a class of level n
    caps = np.array([INF] + [vmin + level - ilog(j, p) for j in range(1, M)])
    precs = np.minimum(acc.precs[:M], caps[acc.lo:acc.lo + len(acc.precs)][:len(acc.precs)])
    out = LaurentSeries.build(p, acc.lo, acc.e, acc.digits, precs, M, vmin, INF)
    if out.min_prec() <= vmin:
        raise ConvergenceError(f"Riemann sum at level {level} carries no information", achieved=out.min_prec())
    return Measure(out)


def wD_on_series(f: LaurentSeries, delta_D: Character) -> LaurentSeries:
    """w_D on the Amice side for f = A_mu with mu given by atoms; see wD_integral."""
    return wD_integral(inverse_amice(f), delta_D).amice_series


@dataclass
class RiemannReport:
    """Partial sums S_n of the Riemann-sum formula for w_D and their mutual distances."""

    sums: list
    distances: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps([{"n": i + 1, "distance_valuation": d} for i, d in enumerate(self.distances)])


def _agreement(a: LaurentSeries, b: LaurentSeries, J: int | None = None) -> float:
    c = a.compare(b)
    res = c.residuals if J is None else c.residuals[:max(J - c.lo, 0)]
    return float(res.min()) if len(res) else INF


def wD_riemann(f: LaurentSeries, delta_D: Character, n_max: int = 4, window: int | None = None,
               M: int | None = None) -> RiemannReport:
    """S_n = sum_{i in (Z/p^n)^x} delta_D(i) (1+T)^(1/i) sigma_{-1/i^2} phi^n psi^n ((1+T)^-i f).

    Representatives i are taken in (0, p^n). Since (1+T)^-p^n = phi^n((1+T)^-1)
    passes through phi^n psi^n, each term is computed as
    (1+T)^((i+p^n)/i^2) sigma_{-1/i^2} phi^n psi^n ((1+T)^(p^n-i) f),
    which only needs the polynomial (1+T)^(p^n-i).
    ``distances`` holds v_p(S_n - S_{n+1}) on the first ``window`` coefficients;
    ``M`` is the output truncation (default: that of f, or 48 for polynomials).
    """
    from .psi_restriction import phi_power, psi_power

    p = f.p
    if f.lo < 0 or f.tail < INF:
        raise DomainError("wD_riemann expects a series without principal part")
    chk = psi(f)
    if not chk.is_zero():
        raise DomainError("psi(f) must vanish: f has to be supported on Z_p^x")
    if M is None:
        M = f.trunc if f.trunc is not None else DEFAULT_TRUNC
    sums = []
    for n in range(1, n_max + 1):
        q = p ** n
        acc = None
        for i in range(1, q):
            if i % p == 0:
                continue
            g = one_plus_T_pow(q - i, p) * f
            h = phi_power(psi_power(g, n), n, extend=True)
            if h.trunc is not None and h.trunc > M:
                h = h.truncate(M)
            if h.is_zero() and h.min_prec() >= f.gmin() + f.wprec:
                continue
            a = PAdicScalar.of(p, Fraction(-1, i * i))
            h = h.apply_sigma(a, trunc=M)
            h = one_plus_T_pow(PAdicScalar.of(p, Fraction(i + q, i * i)), M=M) * h
            term = h.scale(delta_D(i))
            acc = term if acc is None else acc + term
        sums.append(acc)
    w = window or p
    dists = [_agreement(sums[k], sums[k + 1], w) for k in range(len(sums) - 1)]
    return RiemannReport(sums, dists)
