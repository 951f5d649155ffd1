"""Truncated Laurent series in T (or t) over Q_p, and t-series over L_n.

A ``LaurentSeries`` knows its coefficients on a window of degrees
``[lo, trunc)``.  Each coefficient carries its own absolute precision.
Outside the window the series records what is known about the missing
coefficients:

* ``trunc`` is the truncation order (``None`` means an exact Laurent
  polynomial: every coefficient past the window is exactly zero);
* ``bound`` is a lower bound for the valuations of the coefficients of
  degree >= trunc (``-inf`` when nothing is known, e.g. after ``nabla``);
* ``tail`` is a lower bound for the valuations of the coefficients of degree
  < lo (``inf`` when there are none).  Tails appear when phi is applied to
  a principal part, whose image is an infinite principal part cut at -B.

``B`` is the principal-part bound: nothing is ever stored below degree -B.
``wprec`` is the relative working precision used whenever an inexact
constant (1/n, binomials of a p-adic exponent, ...) has to be created.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ._kernel import INF, binom_row, convolve, digit_vals, ilog, minplus, reduce_mod, vp
from .errors import BoundError, DivisibilityError, DomainError, ParseError, PrecisionError
from .padic_arith import DEFAULT_PREC, CycloElement, PAdicScalar, as_scalar, tate_trace

DEFAULT_TRUNC = 48
DEFAULT_TRUNC_T = 12
DEFAULT_TAIL = 8

NEG_INF = -math.inf


def _badd(x: float, y: float) -> float:
    """Sum of valuation bounds where inf (exactly zero) absorbs -inf (unknown)."""
    if x == INF or y == INF:
        return INF
    return x + y


def _scalarize(p: int, c) -> PAdicScalar:
    if isinstance(c, PAdicScalar):
        return c
    return PAdicScalar.of(p, c)


class LaurentSeries:
    """Truncated Laurent series over Q_p in the variable T or t."""

    __slots__ = ("p", "var", "lo", "e", "digits", "precs", "trunc", "bound", "tail", "B", "wprec", "_vals")

    def __init__(self, p, var, lo, e, digits, precs, trunc, bound, tail, B, wprec):
        self.p = p
        self.var = var
        self.lo = lo
        self.e = e
        self.digits = digits
        self.precs = precs
        self.trunc = trunc
        self.bound = bound
        self.tail = tail
        self.B = B
        self.wprec = wprec
        self._vals = None

    # construction ---------------------------------------------------------------

    @classmethod
    def build(cls, p: int, lo: int, e: int, digits, precs, trunc: int | None = None, bound: float = NEG_INF,
              tail: float = INF, var: str = "T", B: int = DEFAULT_TAIL, wprec: int = DEFAULT_PREC) -> "LaurentSeries":
        """Normalising constructor from raw digits (value of degree lo+i is p^e * digits[i])."""
        digits = list(digits)
        precs = np.asarray(precs, dtype=float).copy()
        if len(precs) != len(digits):
            raise ValueError("digits and precisions differ in length")
        if np.isneginf(precs).any():
            raise BoundError("coefficient with no known digits")
        if trunc is not None and bound == INF and len(digits) <= trunc - lo and (precs == INF).all():
            # every coefficient past the window is exactly zero
            trunc = None
        if trunc is not None:
            n = trunc - lo
            if n < 0:
                raise ValueError(f"window start {lo} above truncation {trunc}")
            if len(digits) < n:
                pad = n - len(digits)
                digits += [0] * pad
                precs = np.concatenate([precs, np.full(pad, bound if bound > NEG_INF else 0.0)])
            digits, precs = digits[:n], precs[:n]
        for i, d in enumerate(digits):
            if d:
                digits[i] = reduce_mod(d, precs[i] - e, p)
        # drop exactly-zero edges
        if trunc is None:
            while digits and digits[-1] == 0 and precs[-1] == INF:
                digits.pop()
                precs = precs[:-1]
        if tail == INF:
            k = 0
            while k < len(digits) and digits[k] == 0 and precs[k] == INF and (trunc is None or lo + k < trunc):
                k += 1
            if k:
                digits = digits[k:]
                precs = precs[k:]
                lo += k
        if trunc is None and not digits:
            lo = 0
        if var == "T" and lo < -B:
            cut = -B - lo
            if any(digits[:cut]):
                raise BoundError(f"principal part reaches T^{lo}, beyond the tail bound B={B}")
            if cut > len(digits):
                cut = len(digits)
            tail = min(tail, float(precs[:cut].min()) if cut else tail)
            digits = digits[cut:]
            precs = precs[cut:]
            lo = -B
        if trunc is not None and trunc < lo:
            trunc = lo
        s = cls(p, var, lo, e, tuple(digits), precs, trunc, bound, tail, B, wprec)
        s.precs.setflags(write=False)
        return s

    @classmethod
    def from_coeffs(cls, p: int, coeffs: Sequence, lo: int = 0, trunc: int | None = None, prec: float | None = None,
                    var: str = "T", bound: float | None = None, B: int = DEFAULT_TAIL,
                    wprec: int = DEFAULT_PREC) -> "LaurentSeries":
        """Series with the given coefficients at degrees lo, lo+1, ...

        ``prec`` caps the absolute precision of every coefficient.  With
        ``trunc`` set, ``bound`` defaults to the smallest known valuation.
        """
        coeffs = list(coeffs)
        if trunc is not None and len(coeffs) < trunc - lo:
            # coefficients not given explicitly are exact zeros
            coeffs += [0] * (trunc - lo - len(coeffs))
        cs = []
        for c in coeffs:
            x = c if isinstance(c, PAdicScalar) else PAdicScalar.of(p, c)
            if prec is not None and x.prec > prec:
                x = PAdicScalar.make(p, x.valuation, x.unit, prec)
            cs.append(x)
        nz = [c for c in cs if c.unit]
        e = int(min(c.valuation for c in nz)) if nz else 0
        digits = [c.unit * p ** int(c.valuation - e) if c.unit else 0 for c in cs]
        precs = [c.prec for c in cs]
        if trunc is not None and bound is None:
            vals = [min(c.valuation, c.prec) for c in cs]
            bound = min(vals) if vals else INF
            if bound == INF:
                bound = 0.0 if prec is None else prec
        return cls.build(p, lo, e, digits, precs, trunc, NEG_INF if bound is None else bound, INF, var, B, wprec)

    @classmethod
    def zero(cls, p: int, var: str = "T", **kw) -> "LaurentSeries":
        return cls.build(p, 0, 0, [], [], None, var=var, **kw)

    @classmethod
    def one(cls, p: int, var: str = "T", **kw) -> "LaurentSeries":
        return cls.build(p, 0, 0, [1], [INF], None, var=var, **kw)

    @classmethod
    def monomial(cls, p: int, k: int, coeff=1, var: str = "T", **kw) -> "LaurentSeries":
        c = _scalarize(p, coeff)
        if c.unit == 0:
            return cls.build(p, k, 0, [0], [c.prec], None, var=var, **kw)
        return cls.build(p, k, int(c.valuation), [c.unit], [c.prec], None, var=var, **kw)

    @classmethod
    def gen(cls, p: int, var: str = "T", **kw) -> "LaurentSeries":
        return cls.monomial(p, 1, 1, var=var, **kw)

    def _like(self, lo, e, digits, precs, trunc, bound, tail, var=None) -> "LaurentSeries":
        return LaurentSeries.build(self.p, lo, e, digits, precs, trunc, bound, tail,
                                   var or self.var, self.B, self.wprec)

    def with_params(self, B: int | None = None, wprec: int | None = None) -> "LaurentSeries":
        return LaurentSeries.build(self.p, self.lo, self.e, self.digits, self.precs, self.trunc, self.bound,
                                   self.tail, self.var, self.B if B is None else B,
                                   self.wprec if wprec is None else wprec)

    # inspection -----------------------------------------------------------------------

    @property
    def hi(self) -> int:
        """One past the last stored degree."""
        return self.lo + len(self.digits)

    @property
    def is_polynomial(self) -> bool:
        return self.trunc is None

    def vals(self) -> np.ndarray:
        if self._vals is None:
            self._vals = digit_vals(self.digits, self.e, self.precs, self.p)
        return self._vals

    def gmin(self) -> float:
        """Lower bound for the valuation of every coefficient, known or not."""
        m = float(self.vals().min()) if self.digits else INF
        if self.trunc is not None:
            m = min(m, self.bound)
        return min(m, self.tail)

    def known_min(self) -> float:
        return float(self.vals().min()) if self.digits else INF

    def coeff(self, k: int) -> PAdicScalar:
        p = self.p
        if k < self.lo:
            return PAdicScalar.zero(p, self.tail)
        if k >= self.hi:
            if self.trunc is not None and k >= self.trunc:
                raise PrecisionError(f"degree {k} is beyond the truncation O({self.var}^{self.trunc})")
            return PAdicScalar.zero(p)
        i = k - self.lo
        return PAdicScalar.make(p, self.e, self.digits[i], float(self.precs[i]))

    def prec_at(self, k: int) -> float:
        if k < self.lo:
            return self.tail
        if k >= self.hi:
            return INF if self.trunc is None or k < self.trunc else self.bound
        return float(self.precs[k - self.lo])

    def coefficients(self) -> list[PAdicScalar]:
        return [self.coeff(k) for k in range(self.lo, self.hi)]

    def valuation(self) -> int | None:
        """Lowest degree with a coefficient that is non-zero at precision (None if none)."""
        for i, d in enumerate(self.digits):
            if d:
                return self.lo + i
        return None

    def min_prec(self) -> float:
        return float(self.precs.min()) if self.digits else INF

    def _window(self, lo: int, hi: int, e: int):
        """Digits scaled to p^e and precisions on degrees [lo, hi)."""
        n = hi - lo
        digits = [0] * n
        precs = np.full(n, INF)
        s = self.p ** (self.e - e)
        a = max(lo, self.lo)
        b = min(hi, self.hi)
        for k in range(a, b):
            digits[k - lo] = self.digits[k - self.lo] * s
        if b > a:
            precs[a - lo:b - lo] = self.precs[a - self.lo:b - self.lo]
        if lo < self.lo:
            precs[:min(self.lo, hi) - lo] = self.tail
        if self.trunc is not None and hi > self.trunc:
            precs[max(self.trunc, lo) - lo:] = self.bound
        return digits, precs

    def _check(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.monomial(self.p, 0, other, var=self.var, B=self.B, wprec=self.wprec)
        if other.p != self.p:
            raise DomainError(f"prime mismatch: {self.p} vs {other.p}")
        if other.var != self.var:
            raise DomainError(f"variable mismatch: {self.var} vs {other.var}")
        return other

    # ring operations ---------------------------------------------------------------------

    def __add__(self, other) -> "LaurentSeries":
        other = self._check(other)
        a, b = self, other
        truncs = [x.trunc for x in (a, b) if x.trunc is not None]
        trunc = min(truncs) if truncs else None
        lo = min(a.lo, b.lo)
        hi = max(a.hi, b.hi) if trunc is None else trunc
        hi = max(hi, lo)
        e = min(a.e, b.e)
        da, pa = a._window(lo, hi, e)
        db, pb = b._window(lo, hi, e)
        digits = [x + y for x, y in zip(da, db)]
        precs = np.minimum(pa, pb)
        bounds = [x.bound for x in (a, b) if x.trunc is not None]
        bound = min(bounds) if bounds else NEG_INF
        return LaurentSeries.build(a.p, lo, e, digits, precs, trunc, bound, min(a.tail, b.tail), a.var,
                                   max(a.B, b.B), min(a.wprec, b.wprec))

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return self._like(self.lo, self.e, [-d for d in self.digits], self.precs, self.trunc, self.bound, self.tail)

    def __sub__(self, other) -> "LaurentSeries":
        return self + (-self._check(other))

    def __rsub__(self, other) -> "LaurentSeries":
        return (-self) + other

    def scale(self, c) -> "LaurentSeries":
        c = _scalarize(self.p, c)
        vc = c.valuation if c.unit else c.prec
        vals = self.vals()
        if c.unit == 0:
            precs = np.minimum(self.precs + c.prec, vals + c.prec)
            return self._like(self.lo, 0, [0] * len(self.digits), precs, self.trunc, self.bound + vc,
                              self.tail + vc)
        with np.errstate(invalid="ignore"):
            precs = np.minimum(self.precs + c.valuation, vals + c.prec)
        return self._like(self.lo, self.e + int(c.valuation), [d * c.unit for d in self.digits], precs,
                          self.trunc, self.bound + vc, self.tail + vc)

    def __mul__(self, other) -> "LaurentSeries":
        if isinstance(other, (PAdicScalar, int, Fraction)):
            return self.scale(other)
        other = self._check(other)
        a, b = self, other
        lo = a.lo + b.lo
        if a.trunc is None and b.trunc is None:
            trunc = None
        else:
            cands = []
            if a.trunc is not None:
                cands.append(a.trunc + b.lo)
            if b.trunc is not None:
                cands.append(b.trunc + a.lo)
            trunc = min(cands)
        if a.digits and b.digits:
            digits = convolve(list(a.digits), list(b.digits))
            precs = minplus(a.vals(), a.precs, b.vals(), b.precs)
        else:
            digits, precs = [], np.zeros(0)
        dropped = INF
        if trunc is not None:
            n = max(trunc - lo, 0)
            if len(digits) > n:
                dropped = float(digit_vals(digits[n:], a.e + b.e, precs[n:], a.p).min())
            digits = digits[:n]
            precs = precs[:n]
            if len(digits) < n:
                pad = n - len(digits)
                digits = list(digits) + [0] * pad
                precs = np.concatenate([precs, np.full(pad, INF)])
        ga, gb = a.gmin(), b.gmin()
        cap = INF
        if a.tail < INF:
            cap = min(cap, a.tail + gb)
        if b.tail < INF:
            cap = min(cap, b.tail + ga)
        if cap == NEG_INF:
            raise BoundError("product of a series with a principal tail and a series with unbounded tail")
        if cap < INF:
            precs = np.minimum(precs, cap)
        B = max(a.B, b.B)
        if a.var == "T" and lo < -B and len(digits):
            # products of two principal parts: fold the part below T^-B into the tail
            cut = min(-B - lo, len(digits))
            cap = min(cap, float(digit_vals(digits[:cut], a.e + b.e, precs[:cut], a.p).min()))
            digits, precs, lo = list(digits[cut:]), precs[cut:], -B
        bound = NEG_INF
        if trunc is not None:
            # unknown coefficients of a meet all of b and vice versa; known products past trunc were dropped
            bound = dropped
            if a.trunc is not None:
                bound = min(bound, _badd(a.bound, gb))
            if b.trunc is not None:
                bound = min(bound, _badd(b.bound, ga))
        return LaurentSeries.build(a.p, lo, a.e + b.e, digits, precs, trunc, bound, cap, a.var,
                                   B, min(a.wprec, b.wprec))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentSeries":
        if k < 0:
            return self.inverse() ** (-k)
        out = LaurentSeries.one(self.p, self.var, B=self.B, wprec=self.wprec)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __truediv__(self, other):
        if isinstance(other, (PAdicScalar, int, Fraction)):
            return self.scale(_scalarize(self.p, other).inverse(self.wprec))
        return self * self._check(other).inverse()

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by var^k."""
        return self._like(self.lo + k, self.e, self.digits, self.precs,
                          None if self.trunc is None else self.trunc + k, self.bound, self.tail)

    def truncate(self, M: int) -> "LaurentSeries":
        """Forget coefficients of degree >= M."""
        if self.trunc is not None and self.trunc <= M:
            return self
        dropped = self.vals()[max(M - self.lo, 0):]
        bound = min(self.bound if self.trunc is not None else INF, float(dropped.min()) if len(dropped) else INF)
        if bound == INF:
            bound = self.min_prec() if self.digits else 0.0
        n = max(M - self.lo, 0)
        return self._like(self.lo, self.e, self.digits[:n], self.precs[:n], max(M, self.lo), bound, self.tail)

    def reduce_prec(self, N: float) -> "LaurentSeries":
        """Cap every absolute precision at N."""
        return self._like(self.lo, self.e, self.digits, np.minimum(self.precs, N), self.trunc,
                          min(self.bound, N), min(self.tail, N))

    def principal_part(self) -> "LaurentSeries":
        n = max(min(0, self.hi) - self.lo, 0)
        return self._like(self.lo, self.e, self.digits[:n], self.precs[:n], None, NEG_INF, self.tail)

    def regular_part(self) -> "LaurentSeries":
        start = max(0, self.lo)
        i = start - self.lo
        return self._like(start, self.e, self.digits[i:], self.precs[i:], self.trunc, self.bound, INF)

    # comparisons ---------------------------------------------------------------------

    def compare(self, other) -> "Comparison":
        """Coefficientwise residual valuations against ``other`` and their floors."""
        d = self - self._check(other)
        res = np.array([vp(x, self.p) + d.e if x else INF for x in d.digits])
        floor = np.array(d.precs, dtype=float)
        res = np.where(res >= floor, np.maximum(res, floor), res)
        return Comparison(d.lo, res, floor)

    def agrees(self, other) -> bool:
        return self.compare(other).ok

    def __eq__(self, other):
        if isinstance(other, (LaurentSeries, PAdicScalar, int, Fraction)):
            return self.agrees(other)
        return NotImplemented

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(self.digits)

    # derivations -----------------------------------------------------------------------

    def derivative(self) -> "LaurentSeries":
        """d/dvar."""
        p = self.p
        digits = []
        precs = []
        for i, d in enumerate(self.digits):
            k = self.lo + i
            digits.append(d * k)
            precs.append(self.precs[i] + (vp(k, p) if k else INF))
        trunc = None if self.trunc is None else self.trunc - 1
        return self._like(self.lo - 1, self.e, digits, precs, trunc, self.bound, self.tail)

    def nabla(self) -> "LaurentSeries":
        """nabla = t d/dt, i.e. (1+T) log(1+T) d/dT in the variable T."""
        if self.var == "t":
            return self._scale_degrees(lambda k: k)
        if self.tail < INF:
            raise BoundError("nabla of a series with an infinite principal tail is not available")
        M = self.trunc if self.trunc is not None else self.hi + DEFAULT_TRUNC
        tt = t_one_plus_T(self.p, M - self.lo + 1, self.wprec)
        return self.derivative() * tt

    def _scale_degrees(self, fn) -> "LaurentSeries":
        p = self.p
        digits, precs = [], []
        for i, d in enumerate(self.digits):
            k = self.lo + i
            c = fn(k)
            digits.append(d * c)
            precs.append(self.precs[i] + (vp(c, p) if c else INF))
        return self._like(self.lo, self.e, digits, precs, self.trunc,
                          NEG_INF if self.trunc is not None else self.bound, self.tail)

    def mul_t(self) -> "LaurentSeries":
        if self.var == "t":
            return self.shift(1)
        M = self.trunc if self.trunc is not None else self.hi + DEFAULT_TRUNC
        return self * t_series(self.p, M - self.lo, self.wprec)

    def div_t(self) -> "LaurentSeries":
        """Quotient by t; the constant term of a power series must vanish at precision."""
        p = self.p
        f = self
        if f.lo <= 0 and f.tail == INF and (f.trunc is None or f.trunc > 0) and 0 < f.hi or (f.lo == 0 and f.digits):
            if f.lo >= 0 or f.var == "t" or self._no_principal():
                c0 = f.coeff(0) if f.lo <= 0 < f.hi else PAdicScalar.zero(p)
                if c0.unit:
                    raise DivisibilityError(f"constant term {c0} is not divisible by {f.var}", degree=0,
                                            valuation=c0.valuation)
                f = f._drop(0)
        if f.var == "t":
            return f.shift(-1)
        M = f.trunc if f.trunc is not None else f.hi + DEFAULT_TRUNC
        q = f.shift(-1)
        return q * T_over_t(p, M - q.lo, self.wprec)

    def _no_principal(self) -> bool:
        return self.tail == INF and not any(self.digits[:max(0, -self.lo)])

    def _drop(self, k: int) -> "LaurentSeries":
        if not (self.lo <= k < self.hi):
            return self
        digits = list(self.digits)
        digits[k - self.lo] = 0
        precs = np.array(self.precs)
        precs[k - self.lo] = INF
        return self._like(self.lo, self.e, digits, precs, self.trunc, self.bound, self.tail)

    def residue(self, form: str | None = None) -> PAdicScalar:
        """Residue at 0 of f*form; form is 'dT/(1+T)' (default in T), 'dT' or 'dt'."""
        p = self.p
        if form is None:
            form = "dT/(1+T)" if self.var == "T" else "dt"
        if self.var == "t" and form != "dt":
            raise DomainError("t-series only support the form dt")
        if self.trunc is not None and self.trunc <= -1:
            raise BoundError(f"coefficient of degree -1 lies beyond O({self.var}^{self.trunc})")
        if form in ("dT", "dt"):
            out = self.coeff(-1)
        elif form == "dT/(1+T)":
            out = PAdicScalar.zero(p, self.tail)
            for k in range(self.lo, min(0, self.hi)):
                c = self.coeff(k)
                out = out + (c if (k + 1) % 2 == 0 else -c)
        else:
            raise DomainError(f"unknown form {form!r}")
        if self.tail < INF and out.prec > self.tail:
            out = PAdicScalar.make(p, out.valuation, out.unit, self.tail)
        return out

    # Frobenius and Gamma ------------------------------------------------------------------

    def apply_phi(self, extend: bool = False) -> "LaurentSeries":
        """phi: T -> (1+T)^p - 1 (t -> p t).

        ``extend=True`` keeps the degrees M..pM-1 of the image of a series
        truncated at M, with precision capped by the unknown tail.
        """
        if self.var == "t":
            return self._scale_degrees_p()
        return _phi_T(self, extend)

    def _scale_degrees_p(self) -> "LaurentSeries":
        p = self.p
        base = min(self.lo, 0)
        digits = [d * p ** (self.lo + i - base) for i, d in enumerate(self.digits)]
        precs = np.array([self.precs[i] + self.lo + i for i in range(len(self.digits))])
        return self._like(self.lo, self.e + base, digits, precs, self.trunc,
                          self.bound + (self.trunc or 0) if self.trunc is not None else NEG_INF, self.tail)

    def apply_sigma(self, a, trunc: int | None = None) -> "LaurentSeries":
        """sigma_a: T -> (1+T)^a - 1 (t -> a t) for a p-adic unit a."""
        a = _scalarize(self.p, a)
        if a.unit == 0 or a.valuation != 0:
            raise DomainError(f"sigma_a needs a unit, got {a}")
        if self.var == "t":
            return _sigma_t(self, a)
        return _sigma_T(self, a, trunc)

    def __repr__(self):
        return f"LaurentSeries({self})"

    def __str__(self):
        return format_series(self)


# ---------------------------------------------------------------------------------------
# comparison report


@dataclass(frozen=True)
class Comparison:
    """Residual valuations of a difference, degree by degree."""

    lo: int
    residuals: np.ndarray
    floors: np.ndarray

    @property
    def ok(self) -> bool:
        return bool(np.all(self.residuals >= self.floors))

    @property
    def min_residual(self) -> float:
        return float(self.residuals.min()) if len(self.residuals) else INF

    @property
    def min_floor(self) -> float:
        return float(self.floors.min()) if len(self.floors) else INF

    @property
    def max_floor(self) -> float:
        """Floor at the best-known degree: how deep the comparison reaches at all."""
        return float(self.floors.max()) if len(self.floors) else INF

    def floor_on(self, lo: int, hi: int) -> float:
        """Smallest floor on the degrees [lo, hi) (how meaningful the check is there)."""
        a = max(lo - self.lo, 0)
        b = max(min(hi - self.lo, len(self.floors)), a)
        return float(self.floors[a:b].min()) if b > a else INF

    def failures(self) -> list[tuple[int, float, float]]:
        return [(self.lo + i, float(r), float(f))
                for i, (r, f) in enumerate(zip(self.residuals, self.floors)) if r < f]


# ---------------------------------------------------------------------------------------
# cached constants


def _from_fractions(p: int, fr: Sequence[Fraction], lo: int, trunc: int | None, wprec: int, var: str = "T",
                    bound: float = NEG_INF) -> LaurentSeries:
    cs = []
    for q in fr:
        q = Fraction(q)
        if q == 0:
            cs.append(PAdicScalar.zero(p))
            continue
        x = PAdicScalar.of(p, q)
        if not x.exact:
            x = PAdicScalar.of(p, q, wprec, relative=True)
        cs.append(x)
    nz = [c for c in cs if c.unit]
    e = int(min(c.valuation for c in nz)) if nz else 0
    digits = [c.unit * p ** int(c.valuation - e) if c.unit else 0 for c in cs]
    return LaurentSeries.build(p, lo, e, digits, [c.prec for c in cs], trunc, bound, INF, var, DEFAULT_TAIL, wprec)


@lru_cache(maxsize=None)
def _log_fracs(n: int) -> tuple[Fraction, ...]:
    return tuple([Fraction(0)] + [Fraction((-1) ** (k - 1), k) for k in range(1, n)])


@lru_cache(maxsize=256)
def t_series(p: int, M: int, wprec: int = DEFAULT_PREC) -> LaurentSeries:
    """t = log(1+T) truncated at T^M."""
    return _from_fractions(p, _log_fracs(M), 0, M, wprec)


@lru_cache(maxsize=256)
def t_one_plus_T(p: int, M: int, wprec: int = DEFAULT_PREC) -> LaurentSeries:
    """(1+T) log(1+T) truncated at T^M."""
    lf = _log_fracs(M)
    fr = [lf[k] + (lf[k - 1] if k else 0) for k in range(M)]
    return _from_fractions(p, fr, 0, M, wprec)


@lru_cache(maxsize=None)
def _gregory(n: int) -> tuple[Fraction, ...]:
    """Coefficients of T / log(1+T)."""
    u = [Fraction((-1) ** k, k + 1) for k in range(n)]  # log(1+T)/T
    g = [Fraction(0)] * n
    for k in range(n):
        s = Fraction(1 if k == 0 else 0) - sum(u[i] * g[k - i] for i in range(1, k + 1))
        g[k] = s
    return tuple(g)


@lru_cache(maxsize=256)
def T_over_t(p: int, M: int, wprec: int = DEFAULT_PREC) -> LaurentSeries:
    """T / log(1+T) truncated at T^M (denominators grow like p^(k/(p-1)))."""
    return _from_fractions(p, _gregory(M), 0, M, wprec)


@lru_cache(maxsize=None)
def _exp_fracs(n: int) -> tuple[Fraction, ...]:
    out = [Fraction(0)]
    f = 1
    for k in range(1, n):
        f *= k
        out.append(Fraction(1, f))
    return tuple(out)


def one_plus_T_pow(b, p: int | None = None, M: int = DEFAULT_TRUNC, wprec: int = DEFAULT_PREC,
                   B: int = DEFAULT_TAIL) -> LaurentSeries:
    """(1+T)^b = sum C(b, n) T^n for b in Z_p.

    Exact non-negative integers give the exact polynomial; otherwise the
    series is truncated at T^M.  If b is known modulo p^N, the coefficient
    of T^n is known modulo p^(N - floor(log_p n)).
    """
    if isinstance(b, PAdicScalar):
        p = b.prime
    else:
        b = PAdicScalar.of(p, b)
    if b.unit and b.valuation < 0:
        raise DomainError(f"(1+T)^b needs b in Z_p, got {b}")
    if b.exact:
        x = b.lift()
        if x >= 0:
            return LaurentSeries.build(p, 0, 0, binom_row(x, x + 1), [INF] * (x + 1), None, B=B, wprec=wprec)
        return LaurentSeries.build(p, 0, 0, binom_row(x, M), [INF] * M, M, 0.0, B=B, wprec=wprec)
    N = int(b.prec)
    x = b.lift_mod(N)
    row = binom_row(x, M)
    precs = [INF] + [N - ilog(j, p) for j in range(1, M)]
    return LaurentSeries.build(p, 0, 0, row, precs, M, 0.0, B=B, wprec=wprec)


# ---------------------------------------------------------------------------------------
# phi on T-series


class _PhiTable:
    """Exact coefficients of phi(T)^m and their valuations, grown on demand."""

    def __init__(self, p: int):
        self.p = p
        base = [0] + [math.comb(p, i) for i in range(1, p + 1)]
        self.base = base
        self.rows: list[list[int]] = [[1]]

    def upto(self, M: int) -> list[list[int]]:
        while len(self.rows) < M:
            self.rows.append(convolve(self.rows[-1], self.base))
        return self.rows

    @lru_cache(maxsize=64)
    def valmatrix(self, M: int, D: int) -> np.ndarray:
        rows = self.upto(M)
        V = np.full((M, D), INF)
        for m in range(M):
            r = rows[m]
            for d in range(m, min(len(r), D)):
                if r[d]:
                    V[m, d] = vp(r[d], self.p)
        return V


@lru_cache(maxsize=None)
def _phi_table(p: int) -> _PhiTable:
    return _PhiTable(p)


@lru_cache(maxsize=None)
def _phi_neg_power(p: int, m: int, B: int) -> tuple[tuple[int, ...], float]:
    """phi(T)^(-m) = S^(pm) (1+u(S))^(-m), S = 1/T, cut below T^-B.

    Returns the digits for degrees -B..-pm and a valuation bound for the
    discarded coefficients.
    """
    depth = B - p * m  # number of extra S-degrees kept
    if depth < 0:
        return (), math.ceil((B + 1 - p * m) / (p - 1)) if p > 1 else INF
    # u(S) = sum_{i=1}^{p-1} C(p,i) S^(p-i)
    u = [0] * (depth + 1)
    for i in range(1, p):
        s = p - i
        if s <= depth:
            u[s] = math.comb(p, i)
    # (1+u)^(-1) as a power series in S
    inv = [0] * (depth + 1)
    inv[0] = 1
    for k in range(1, depth + 1):
        inv[k] = -sum(u[i] * inv[k - i] for i in range(1, k + 1))
    out = [1] + [0] * depth
    for _ in range(m):
        out = convolve(out, inv)[:depth + 1]
    # S-degree s -> T-degree -(pm + s); lay out from degree -B upwards
    digits = tuple(reversed(out))
    tail = math.ceil((B + 1 - p * m) / (p - 1))
    return digits, float(tail)


def _phi_T(f: LaurentSeries, extend: bool) -> LaurentSeries:
    p = f.p
    B = f.B
    reg = f.regular_part()
    out = _phi_regular(reg, extend)
    if f.lo < 0 or f.tail < INF:
        floor = f.min_prec()
        if floor == INF:
            floor = f.wprec
        tail = INF
        lo = -B
        acc = [0] * (B + 1)  # degrees -B..0
        precs = np.full(B + 1, INF)
        for k in range(f.lo, min(0, f.hi)):
            i = k - f.lo
            d = f.digits[i]
            m = -k
            digs, tl = _phi_neg_power(p, m, B)
            v = min(vp(d, p) + f.e, float(f.precs[i]))
            if d:
                for j, x in enumerate(digs):
                    acc[j] += d * x
                top = len(digs)
                precs[:top] = np.minimum(precs[:top], float(f.precs[i]))
            elif f.precs[i] < INF:
                top = len(digs)
                precs[:top] = np.minimum(precs[:top], float(f.precs[i]))
            tail = min(tail, v + tl)
        if f.tail < INF:
            tail = min(tail, f.tail)
            top = p * (f.lo - 1)  # highest degree reached by the old tail
            if top >= -B:
                precs[:top + B + 1] = np.minimum(precs[:top + B + 1], f.tail)
        if tail < floor:
            need = int(math.ceil(floor * (p - 1) + p * max(-f.lo, 1))) - 1
            raise BoundError(f"phi of the principal part loses digits at T^-{B}: tail valuation {tail} below "
                             f"{floor}; use a tail bound B >= {need}", )
        pp = LaurentSeries.build(p, lo, f.e, acc, precs, None, NEG_INF, tail, "T", B, f.wprec)
        out = out + pp
    return out


def _phi_regular(f: LaurentSeries, extend: bool) -> LaurentSeries:
    p = f.p
    if not f.digits and f.trunc is None:
        return f
    lo = f.lo  # >= 0
    n = f.hi
    M = f.trunc if f.trunc is not None else None
    if M is None:
        D = p * (n - 1) + 1 if n else 0
    else:
        D = p * M if extend else M
    table = _phi_table(p)
    rows = table.upto(max(n, 1))
    out = [0] * D
    for i, d in enumerate(f.digits):
        if not d:
            continue
        m = lo + i
        r = rows[m]
        top = min(len(r), D)
        for k in range(m, top):
            x = r[k]
            if x:
                out[k] += d * x
    # precision: min_m N_m + v(phi(T)^m_d)
    if n:
        V = table.valmatrix(n, D)[lo:n]
        precs = (np.asarray(f.precs)[:, None] + V).min(axis=0) if len(f.precs) else np.full(D, INF)
    else:
        precs = np.full(D, INF)
    bound = NEG_INF
    if M is not None:
        if extend:
            for d in range(M, D):
                cap = f.bound + max(0, math.ceil((p * M - d) / (p - 1)))
                precs[d] = min(precs[d], cap)
            bound = f.bound
        else:
            bound = min(f.bound, f.known_min())
    return LaurentSeries.build(p, 0, f.e, out, precs, None if M is None else D, bound, INF, "T", f.B, f.wprec)


# ---------------------------------------------------------------------------------------
# sigma_a


def _sigma_t(f: LaurentSeries, a: PAdicScalar) -> LaurentSeries:
    out = None
    p = f.p
    digits, precs = [], []
    base = f.lo
    cs = []
    for k in range(f.lo, f.hi):
        c = f.coeff(k) * a ** k if k >= 0 else f.coeff(k) * a.inverse(f.wprec) ** (-k)
        cs.append(c)
    nz = [c for c in cs if c.unit]
    e = int(min(c.valuation for c in nz)) if nz else 0
    digits = [c.unit * p ** int(c.valuation - e) if c.unit else 0 for c in cs]
    return LaurentSeries.build(p, f.lo, e, digits, [c.prec for c in cs], f.trunc, f.bound, f.tail, "t", f.B, f.wprec)


@lru_cache(maxsize=None)
def _binom_transform(M: int) -> tuple[tuple[int, ...], ...]:
    """rows[k][m] = (-1)^(m-k) C(m, k): T^m = sum_k rows[k][m] (1+T)^k."""
    return tuple(tuple((-1) ** (m - k) * math.comb(m, k) if m >= k else 0 for m in range(M)) for k in range(M))


def _sigma_regular(f: LaurentSeries, a: PAdicScalar, M: int) -> LaurentSeries:
    """sigma_a on a power series known mod T^M, via the basis (1+T)^k."""
    p = f.p
    n = f.hi
    lo = f.lo
    fd = [0] * lo + list(f.digits)
    fd = fd[:M]
    rows = _binom_transform(len(fd))
    d = [sum(rows[k][m] * fd[m] for m in range(k, len(fd)) if fd[m]) for k in range(len(fd))]
    # precision of the output coefficient j
    precs = np.full(M, INF)
    fprecs = np.full(M, INF)
    fprecs[lo:lo + len(f.precs)] = f.precs[:max(0, min(len(f.precs), M - lo))]
    if f.trunc is not None and f.trunc < M:
        fprecs[f.trunc:] = f.bound
    precs = np.minimum.accumulate(fprecs)
    if not a.exact:
        N = a.prec
        # coefficient j only sees the input in degrees <= j
        v = np.full(M, INF)
        fv = f.vals()[:max(0, M - lo)]
        v[lo:lo + len(fv)] = fv
        if f.trunc is not None and f.trunc < M:
            v[f.trunc:] = f.bound
        vmin = np.minimum.accumulate(v)
        for j in range(1, M):
            precs[j] = min(precs[j], vmin[j] + N - ilog(j, p))
        # working modulus for the digits
        fin = precs[np.isfinite(precs)]
        W = int(fin.max()) - f.e + 2 if len(fin) else 0
        mod = p ** max(W, 1)
        x = a.lift_mod(int(N))
        Y = [c % mod for c in binom_row(x, M)]
    else:
        mod = None
        Y = binom_row(a.lift(), M)
    acc = [0] * M
    for k in range(len(d) - 1, -1, -1):
        if any(acc):
            acc = convolve(acc, Y)[:M]
        acc[0] += d[k]
        if mod is not None:
            # the constant term is f(0) whatever a is, and stays exact
            acc = acc[:1] + [c % mod for c in acc[1:]]
    bound = min(f.bound, f.known_min()) if f.trunc is not None else f.known_min()
    if bound == INF:
        bound = 0.0
    return LaurentSeries.build(p, 0, f.e, acc, precs, M, bound, INF, "T", f.B, f.wprec)


def _sigma_T(f: LaurentSeries, a: PAdicScalar, trunc: int | None) -> LaurentSeries:
    p = f.p
    if a.exact and a.lift() == 1:
        return f
    reg = f.regular_part()
    if reg.trunc is None and a.exact and a.lift() > 0 and f.lo >= 0 and f.tail == INF:
        # exact polynomial image
        deg = reg.hi - 1
        M = a.lift() * max(deg, 0) + 1
    else:
        M = reg.trunc if reg.trunc is not None else (trunc or DEFAULT_TRUNC)
        if trunc is not None:
            M = min(M, trunc)
    out = _sigma_regular(reg, a, M) if reg.digits or reg.trunc is not None else LaurentSeries.zero(p, B=f.B,
                                                                                                    wprec=f.wprec)
    if reg.trunc is None and a.exact and a.lift() > 0 and f.lo >= 0 and f.tail == INF:
        out = LaurentSeries.build(p, out.lo, out.e, out.digits, out.precs, None, NEG_INF, INF, "T", f.B, f.wprec)
    if f.lo < 0:
        K = -f.lo
        M_out = out.trunc if out.trunc is not None else (trunc or DEFAULT_TRUNC)
        Mw = M_out + K + 1
        sT = one_plus_T_pow(a, M=Mw + 1, wprec=f.wprec, B=f.B) - 1  # a T + ...
        u = sT.shift(-1)  # unit with constant term a
        w = u.inverse()
        wk = LaurentSeries.one(p, B=f.B, wprec=f.wprec)
        for k in range(1, K + 1):
            wk = wk * w
            c = f.coeff(-k)
            if c.unit or c.prec < INF:
                out = out + (wk.shift(-k)).scale(c)
    if f.tail < INF:
        out = out.reduce_prec(f.tail)
        out = LaurentSeries.build(p, out.lo, out.e, out.digits, out.precs, out.trunc, out.bound, f.tail, "T", f.B,
                                  f.wprec)
    return out


# ---------------------------------------------------------------------------------------
# inverse


def _inverse(f: LaurentSeries) -> LaurentSeries:
    p = f.p
    k0 = f.valuation()
    if k0 is None:
        raise PrecisionError("cannot invert a series that is zero at precision")
    if f.tail < INF:
        raise BoundError("inverse of a series with an infinite principal tail is not available")
    c0 = f.coeff(k0)
    if c0.valuation > f.gmin():
        raise DomainError("leading coefficient is not dominant; the series is not a unit in E")
    g = f.shift(-k0)
    # g = c0 (1 + h), h with valuations >= 0 and positive degrees only
    M = g.trunc if g.trunc is not None else DEFAULT_TRUNC
    c0inv = c0.inverse(f.wprec)
    n = M
    gs = [g.coeff(k) * c0inv if k < g.hi else PAdicScalar.zero(p) for k in range(n)]
    hs = [PAdicScalar.one(p)]
    for k in range(1, n):
        s = PAdicScalar.zero(p)
        for i in range(1, k + 1):
            gi = gs[i]
            if gi.unit or gi.prec < INF:
                s = s + gi * hs[k - i]
        hs.append(-s)
    nz = [c for c in hs if c.unit]
    e = int(min(c.valuation for c in nz)) if nz else 0
    digits = [c.unit * p ** int(c.valuation - e) if c.unit else 0 for c in hs]
    inv = LaurentSeries.build(p, 0, e, digits, [c.prec for c in hs], M, 0.0, INF, f.var, f.B, f.wprec)
    if g.trunc is not None:
        b = g.bound - (c0.valuation)
        inv = LaurentSeries.build(p, 0, e, digits, [c.prec for c in hs], M, min(0.0, b), INF, f.var, f.B, f.wprec)
    return inv.scale(c0inv).shift(-k0)


LaurentSeries.inverse = lambda self: _inverse(self)
LaurentSeries.inverse.__doc__ = "Inverse of a series whose lowest non-zero coefficient has minimal valuation."


# ---------------------------------------------------------------------------------------
# change of variable T <-> t


def to_t_expansion(f: LaurentSeries, J: int | None = None) -> LaurentSeries:
    """f(e^t - 1) as a t-series (exact in truncation order: T^k starts at t^k)."""
    if f.var != "T":
        raise DomainError("to_t_expansion expects a T-series")
    if f.tail < INF:
        raise BoundError("cannot expand an infinite principal tail in t")
    p = f.p
    top = f.trunc if f.trunc is not None else f.hi
    if J is not None:
        top = min(top, J)
    if f.trunc is None and J is None:
        top = max(f.hi, DEFAULT_TRUNC_T)
    L = max(top - min(f.lo, 0), 1)
    E = _from_fractions(p, _exp_fracs(L + 1), 0, L + 1, f.wprec, var="t")
    out = LaurentSeries.zero(p, "t", B=f.B, wprec=f.wprec)
    trunc_out = top
    if f.lo < 0:
        Einv = E.inverse()
        pw = LaurentSeries.one(p, "t", wprec=f.wprec)
        for k in range(1, -f.lo + 1):
            pw = (pw * Einv).truncate(trunc_out)
            c = f.coeff(-k)
            if c.unit or c.prec < INF:
                out = out + pw.scale(c)
    pw = LaurentSeries.one(p, "t", wprec=f.wprec)
    for k in range(0, top):
        if k:
            pw = (pw * E).truncate(trunc_out)
        if k >= f.lo and k < f.hi:
            c = f.coeff(k)
            if c.unit or c.prec < INF:
                out = out + pw.truncate(trunc_out).scale(c)
    if out.trunc is None or out.trunc > trunc_out:
        out = out.truncate(trunc_out)
    return out


def from_t(g: LaurentSeries, M: int | None = None) -> LaurentSeries:
    """g(log(1+T)) as a T-series."""
    if g.var != "t":
        raise DomainError("from_t expects a t-series")
    p = g.p
    top = g.trunc if g.trunc is not None else g.hi
    if M is not None:
        top = min(top, M)
    if g.trunc is None and M is None:
        top = max(g.hi, DEFAULT_TRUNC_T)
    t = t_series(p, top - min(g.lo, 0) + 1, g.wprec)
    out = LaurentSeries.zero(p, B=g.B, wprec=g.wprec)
    if g.lo < 0:
        tinv = t.inverse()
        pw = LaurentSeries.one(p, wprec=g.wprec)
        for k in range(1, -g.lo + 1):
            pw = (pw * tinv).truncate(top)
            out = out + pw.scale(g.coeff(-k))
    pw = LaurentSeries.one(p, wprec=g.wprec)
    for k in range(0, top):
        if k:
            pw = (pw * t).truncate(top)
        if g.lo <= k < g.hi:
            out = out + pw.truncate(top).scale(g.coeff(k))
    return out.truncate(top)


# ---------------------------------------------------------------------------------------
# text form


def _coeff_text(c: PAdicScalar) -> str:
    q = c.to_fraction()
    if c.exact:
        return str(q)
    return f"({q} + O({c.prime}^{int(c.prec)}))"


def format_series(f: LaurentSeries) -> str:
    """Canonical form 'sum c_k*T^k + O(T^M)'."""
    v = f.var
    parts = []
    for k in range(f.lo, f.hi):
        c = f.coeff(k)
        if c.unit == 0 and c.exact:
            continue
        ct = _coeff_text(c)
        mono = "" if k == 0 else (v if k == 1 else f"{v}^{k}")
        if not mono:
            parts.append(ct)
        elif ct in ("1", "-1"):
            parts.append(ct[:-1] + mono)
        else:
            parts.append(f"{ct}*{mono}")
    s = " + ".join(parts) if parts else "0"
    s = s.replace("+ -", "- ")
    if f.tail < INF:
        s = f"O({f.p}^{int(f.tail)})*{v}^<{f.lo} + " + s
    if f.trunc is not None:
        s += f" + O({v}^{f.trunc})"
    return s


_TOKEN = re.compile(r"\s*(?:(?P<open>\()|(?P<close>\))|(?P<O>O\()|(?P<num>\d+(?:/\d+)?)|(?P<var>[Tt])"
                    r"|(?P<op>[-+*^/]))")


def parse_series(text: str, p: int, var: str | None = None, B: int = DEFAULT_TAIL,
                 wprec: int = DEFAULT_PREC, prec: float | None = None) -> LaurentSeries:
    """Read the canonical text form (also accepts things like '1/T', '3*T^-2 + T')."""
    pos = 0
    s = text.strip()
    terms: dict[int, PAdicScalar] = {}
    trunc = None
    seen_var = var

    def err(msg):
        raise ParseError(msg, pos)

    def peek_char():
        j = pos
        while j < len(s) and s[j].isspace():
            j += 1
        return s[j] if j < len(s) else ""

    def skip():
        nonlocal pos
        while pos < len(s) and s[pos].isspace():
            pos += 1

    def read_int():
        nonlocal pos
        skip()
        m = re.compile(r"-?\d+").match(s, pos)
        if not m:
            err("expected an integer")
        pos = m.end()
        return int(m.group())

    def read_rational():
        nonlocal pos
        skip()
        m = re.compile(r"\d+(?:/\d+)?").match(s, pos)
        if not m:
            err("expected a number")
        pos = m.end()
        return Fraction(m.group())

    def read_coeff():
        nonlocal pos
        skip()
        if s.startswith("(", pos):
            pos += 1
            skip()
            neg = False
            if s.startswith("-", pos):
                neg = True
                pos += 1
            q = read_rational()
            q = -q if neg else q
            skip()
            if not s.startswith("+", pos):
                err("expected '+ O(p^N)'")
            pos += 1
            skip()
            if not s.startswith("O(", pos):
                err("expected 'O('")
            pos += 2
            pp = read_int()
            if pp != p:
                err(f"prime {pp} does not match {p}")
            skip()
            if not s.startswith("^", pos):
                err("expected '^'")
            pos += 1
            N = read_int()
            skip()
            if not s.startswith(")", pos) or not s.startswith(")", pos + 1):
                if s.startswith("))", pos):
                    pass
                else:
                    err("expected '))'")
            pos += 2
            return PAdicScalar.of(p, q, N)
        q = read_rational()
        return PAdicScalar.of(p, q) if prec is None else PAdicScalar.of(p, q, prec)

    def read_var_power():
        nonlocal pos, seen_var
        skip()
        if pos >= len(s) or s[pos] not in "Tt":
            err("expected T or t")
        v = s[pos]
        if seen_var and v != seen_var:
            err(f"mixed variables {seen_var} and {v}")
        seen_var = v
        pos += 1
        skip()
        if s.startswith("^", pos):
            pos += 1
            return read_int()
        return 1

    sign = 1
    first = True
    while True:
        skip()
        if pos >= len(s):
            if first:
                err("empty series")
            break
        if not first:
            if s[pos] == "+":
                sign = 1
            elif s[pos] == "-":
                sign = -1
            else:
                err("expected '+' or '-'")
            pos += 1
            skip()
        else:
            if s.startswith("-", pos):
                sign = -1
                pos += 1
                skip()
            else:
                sign = 1
        first = False
        if s.startswith("O(", pos):
            pos += 2
            k = read_var_power()
            skip()
            if not s.startswith(")", pos):
                err("expected ')'")
            pos += 1
            trunc = k
            continue
        if pos < len(s) and s[pos] in "Tt":
            c = PAdicScalar.one(p)
            k = read_var_power()
        else:
            c = read_coeff()
            skip()
            if s.startswith("*", pos):
                pos += 1
                k = read_var_power()
            elif s.startswith("/", pos):
                pos += 1
                k = -read_var_power()
            else:
                k = 0
        c = c if sign > 0 else -c
        terms[k] = terms[k] + c if k in terms else c
    v = seen_var or "T"
    if not terms:
        return LaurentSeries.build(p, 0, 0, [], [], trunc, 0.0 if trunc is not None else NEG_INF, INF, v, B, wprec)
    lo = min(terms)
    hi = max(terms) + 1
    if trunc is not None:
        hi = max(hi, trunc)
        terms = {k: c for k, c in terms.items() if k < trunc}
    cs = [terms.get(k, PAdicScalar.zero(p)) for k in range(lo, hi)]
    return LaurentSeries.from_coeffs(p, cs, lo=lo, trunc=trunc, var=v, B=B, wprec=wprec)


# ---------------------------------------------------------------------------------------
# t-series over L_n


class CycloSeries:
    """Truncated Laurent series in t with coefficients in L_n (formal truncation only)."""

    __slots__ = ("p", "level", "lo", "coeffs", "trunc")

    def __init__(self, p: int, level: int, lo: int, coeffs: Sequence[CycloElement], trunc: int | None):
        self.p = p
        self.level = level
        coeffs = list(coeffs)
        if trunc is not None:
            n = trunc - lo
            coeffs = coeffs[:n] + [CycloElement.zero(p, level)] * max(0, n - len(coeffs))
        self.lo = lo
        self.coeffs = tuple(coeffs)
        self.trunc = trunc

    @classmethod
    def from_scalars(cls, p: int, level: int, values: Iterable, lo: int = 0, trunc: int | None = None):
        cs = [v if isinstance(v, CycloElement) else CycloElement.from_scalar(v, p, level) for v in values]
        return cls(p, level, lo, cs, trunc)

    @classmethod
    def from_laurent(cls, f: LaurentSeries, level: int) -> "CycloSeries":
        if f.var != "t":
            raise DomainError("expected a t-series")
        cs = [CycloElement.from_scalar(f.coeff(k), f.p, level) for k in range(f.lo, f.hi)]
        return cls(f.p, level, f.lo, cs, f.trunc)

    @classmethod
    def monomial(cls, p: int, level: int, k: int, c=1, trunc: int | None = None) -> "CycloSeries":
        cc = c if isinstance(c, CycloElement) else CycloElement.from_scalar(c, p, level)
        return cls(p, level, k, [cc], trunc)

    @classmethod
    def zero(cls, p: int, level: int, trunc: int | None = None) -> "CycloSeries":
        return cls(p, level, 0, [], trunc)

    @property
    def hi(self) -> int:
        return self.lo + len(self.coeffs)

    def coeff(self, k: int) -> CycloElement:
        if self.lo <= k < self.hi:
            return self.coeffs[k - self.lo]
        if self.trunc is not None and k >= self.trunc:
            raise PrecisionError(f"degree {k} is beyond O(t^{self.trunc})")
        return CycloElement.zero(self.p, self.level)

    def _coerce(self, other) -> "CycloSeries":
        if isinstance(other, CycloSeries):
            if other.level != self.level:
                lvl = max(self.level, other.level)
                return other.embed(lvl)
            return other
        return CycloSeries.monomial(self.p, self.level, 0, other)

    def embed(self, m: int) -> "CycloSeries":
        return CycloSeries(self.p, m, self.lo, [c.embed(m) for c in self.coeffs], self.trunc)

    def __add__(self, other) -> "CycloSeries":
        other = self._coerce(other)
        a = self if self.level == other.level else self.embed(other.level)
        truncs = [x.trunc for x in (a, other) if x.trunc is not None]
        trunc = min(truncs) if truncs else None
        lo = min(a.lo, other.lo)
        hi = trunc if trunc is not None else max(a.hi, other.hi)
        cs = [a.coeff(k) + other.coeff(k) if (a.lo <= k < a.hi or other.lo <= k < other.hi)
              else CycloElement.zero(a.p, a.level) for k in range(lo, max(hi, lo))]
        return CycloSeries(a.p, a.level, lo, cs, trunc)

    __radd__ = __add__

    def __neg__(self) -> "CycloSeries":
        return CycloSeries(self.p, self.level, self.lo, [-c for c in self.coeffs], self.trunc)

    def __sub__(self, other) -> "CycloSeries":
        return self + (-self._coerce(other))

    def __mul__(self, other) -> "CycloSeries":
        if isinstance(other, (CycloElement, PAdicScalar, int, Fraction)):
            return CycloSeries(self.p, self.level, self.lo, [c * other for c in self.coeffs], self.trunc)
        other = self._coerce(other)
        a = self if self.level == other.level else self.embed(other.level)
        b = other
        lo = a.lo + b.lo
        cands = []
        if a.trunc is not None:
            cands.append(a.trunc + b.lo)
        if b.trunc is not None:
            cands.append(b.trunc + a.lo)
        trunc = min(cands) if cands else None
        n = (trunc - lo) if trunc is not None else len(a.coeffs) + len(b.coeffs) - 1
        out = [None] * max(n, 0)
        for i, x in enumerate(a.coeffs):
            if x.is_zero() and x.prec == math.inf:
                continue
            for j, y in enumerate(b.coeffs):
                k = i + j
                if k >= n:
                    break
                if y.is_zero() and y.prec == math.inf:
                    continue
                xy = x * y
                out[k] = xy if out[k] is None else out[k] + xy
        z = CycloElement.zero(a.p, a.level)
        return CycloSeries(a.p, a.level, lo, [c if c is not None else z for c in out], trunc)

    __rmul__ = __mul__

    def shift(self, k: int) -> "CycloSeries":
        return CycloSeries(self.p, self.level, self.lo + k, self.coeffs,
                           None if self.trunc is None else self.trunc + k)

    def mul_t(self, k: int = 1) -> "CycloSeries":
        return self.shift(k)

    def div_t(self, k: int = 1) -> "CycloSeries":
        """Divide by t^k; coefficients below t^k must vanish at precision."""
        for j in range(self.lo, min(k, self.hi)):
            c = self.coeff(j)
            if j >= 0 and not c.is_zero():
                raise DivisibilityError(f"coefficient of t^{j} is non-zero", degree=j, valuation=c.min_valuation())
        return self.shift(-k)

    def divisible_by_t(self, k: int) -> bool:
        return all(self.coeff(j).is_zero() for j in range(max(self.lo, 0), k))

    def nabla(self) -> "CycloSeries":
        """t d/dt."""
        return CycloSeries(self.p, self.level, self.lo,
                           [c * (self.lo + i) for i, c in enumerate(self.coeffs)], self.trunc)

    def sigma(self, a) -> "CycloSeries":
        """sigma_a: zeta -> zeta^a on coefficients and t -> a t."""
        p = self.p
        ai = a if isinstance(a, int) else as_scalar(p, a).lift()
        asc = as_scalar(p, a)
        out = []
        for i, c in enumerate(self.coeffs):
            k = self.lo + i
            out.append(c.sigma(ai % p ** max(self.level, 1)) * (asc ** k))
        return CycloSeries(p, self.level, self.lo, out, self.trunc)

    def tate_trace(self, n: int = 0):
        """Apply T_n coefficientwise; level 0 returns a LaurentSeries in t over Q_p."""
        cs = [tate_trace(c, n) for c in self.coeffs]
        if n == 0:
            scal = [c.to_scalar() for c in cs]
            return LaurentSeries.from_coeffs(self.p, scal, lo=self.lo, trunc=self.trunc, var="t",
                                             bound=NEG_INF if self.trunc is not None else None)
        return CycloSeries(self.p, n, self.lo, cs, self.trunc)

    def trace(self, n: int) -> "CycloSeries":
        from .padic_arith import trace as _tr
        return CycloSeries(self.p, n, self.lo, [_tr(c, n) for c in self.coeffs], self.trunc)

    def residue(self) -> CycloElement:
        return self.coeff(-1)

    def min_prec(self) -> float:
        return min((c.prec for c in self.coeffs), default=INF)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def compare(self, other) -> "Comparison":
        d = self - self._coerce(other)
        res = np.array([c.min_valuation() if not c.is_zero() else c.prec for c in d.coeffs], dtype=float)
        floors = np.array([c.prec for c in d.coeffs], dtype=float)
        res = np.where(res >= floors, np.maximum(res, floors), res)
        return Comparison(d.lo, res, floors)

    def agrees(self, other) -> bool:
        return self.compare(other).ok

    def truncate(self, M: int) -> "CycloSeries":
        if self.trunc is not None and self.trunc <= M:
            return self
        return CycloSeries(self.p, self.level, self.lo, self.coeffs[:max(M - self.lo, 0)], max(M, self.lo))

    def __repr__(self):
        return f"CycloSeries({self})"

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero() and c.prec == INF:
                continue
            k = self.lo + i
            parts.append(f"({c})*t^{k}")
        s = " + ".join(parts) if parts else "0"
        if self.trunc is not None:
            s += f" + O(t^{self.trunc})"
        return s
