"""p-adic scalars, the cyclotomic levels L_n = Q_p(zeta_{p^n}), Galois action and traces.

Precision convention (used everywhere in the package): a value carries an
*absolute* precision N, meaning it is known modulo p^N.  ``inf`` marks exact
values.  A scalar is stored as p^valuation * unit with the unit reduced modulo
p^(N - valuation); an inexact zero has valuation N and unit 0.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from ._kernel import INF, convolve, reduce_mod, split, vp
from .errors import DomainError, InvalidGaloisElement, ParseError, PrecisionError

DEFAULT_PREC = 20
MAX_LEVEL = 4

Rational = Union[int, Fraction]


def _fmt_prec(n: float) -> str:
    if n == INF:
        return "oo"
    return "-oo" if n == -INF else str(int(n))


class PAdicScalar:
    """An element of Q_p with absolute precision.

    >>> x = PAdicScalar.of(5, 6)
    >>> (x * x).lift()
    36
    """

    __slots__ = ("prime", "valuation", "unit", "prec")

    def __init__(self, prime: int, valuation: float, unit: int, prec: float):
        self.prime = prime
        self.valuation = valuation
        self.unit = unit
        self.prec = prec

    # construction -----------------------------------------------------------

    @staticmethod
    def make(p: int, v: float, u: int, prec: float) -> "PAdicScalar":
        """Normalise p^v * u known modulo p^prec (u may be divisible by p or 0)."""
        if v == INF or u == 0:
            return PAdicScalar(p, prec, 0, prec)
        if prec != INF:
            if prec - v <= 0:
                return PAdicScalar(p, prec, 0, prec)
            u %= p ** int(prec - v)
            if u == 0:
                return PAdicScalar(p, prec, 0, prec)
        s, u = split(u, p)
        v += s
        if prec != INF:
            u %= p ** int(prec - v)
        return PAdicScalar(p, v, u, prec)

    @classmethod
    def of(cls, p: int, q: Rational, prec: float | None = None, relative: bool = False) -> "PAdicScalar":
        """Convert an integer or fraction.

        With ``prec=None`` the result is exact when q lies in Z[1/p], and
        otherwise carries DEFAULT_PREC relative digits.  ``relative=True``
        interprets ``prec`` as a relative precision.
        """
        q = Fraction(q)
        if q == 0:
            if prec is None or relative:
                return cls(p, INF, 0, INF)
            return cls(p, prec, 0, prec)
        vn, un = split(q.numerator, p)
        vd, ud = split(q.denominator, p)
        v = vn - vd
        if prec is None:
            if ud in (1, -1):
                return cls.make(p, v, un * ud, INF)
            prec, relative = DEFAULT_PREC, True
        if prec == INF:
            if ud not in (1, -1):
                raise DomainError(f"{q} has no exact representation in Z[1/{p}]")
            return cls.make(p, v, un * ud, INF)
        absprec = v + prec if relative else prec
        if absprec <= v:
            return cls(p, absprec, 0, absprec)
        mod = p ** int(absprec - v)
        return cls.make(p, v, un * pow(ud, -1, mod), absprec)

    @classmethod
    def zero(cls, p: int, prec: float = INF) -> "PAdicScalar":
        return cls(p, prec, 0, prec)

    @classmethod
    def one(cls, p: int) -> "PAdicScalar":
        return cls(p, 0, 1, INF)

    # inspection -------------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self.prec == INF

    def is_zero(self) -> bool:
        """True when the value is zero at its precision."""
        return self.unit == 0

    def to_fraction(self) -> Fraction:
        """The canonical rational representative p^v * u."""
        if self.unit == 0:
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.prime) ** int(self.valuation)

    def small_rational(self) -> Fraction | None:
        """The rational a/b with |a|, |b| < sqrt(p^N / 2) congruent to self, if there is one.

        N is the relative precision; exact values return themselves.
        """
        if self.exact or self.unit == 0:
            return self.to_fraction() if self.exact or self.prec == INF else None
        N = int(self.prec - self.valuation)
        if N <= 0:
            return None
        mod = self.prime ** N
        bound = math.isqrt(mod // 2)
        # half extended Euclid on (mod, unit)
        r0, r1, s0, s1 = mod, self.unit % mod, 0, 1
        while r1 > bound:
            q = r0 // r1
            r0, r1, s0, s1 = r1, r0 - q * r1, s1, s0 - q * s1
        if s1 == 0 or abs(s1) > bound or math.gcd(s1, self.prime) != 1:
            return None
        return Fraction(r1, s1) * Fraction(self.prime) ** int(self.valuation)

    def rational_text(self) -> str:
        """Exact values as rationals; others as the small rational they match, with an O-term."""
        if self.exact:
            return str(self.to_fraction())
        if self.unit == 0:
            return f"O({self.prime}^{int(self.prec)})"
        q = self.small_rational()
        return f"{self.to_fraction() if q is None else q} + O({self.prime}^{int(self.prec)})"

    def lift(self) -> int:
        """Integer representative; raises if the value is not in Z_p."""
        if self.unit == 0:
            return 0
        if self.valuation < 0:
            raise DomainError(f"{self} is not a p-adic integer")
        return self.unit * self.prime ** int(self.valuation)

    def lift_mod(self, k: int) -> int:
        """Representative in [0, p^k) of a p-adic integer."""
        return self.lift() % self.prime ** k

    def residual(self, other: "PAdicScalar | Rational") -> tuple[float, float]:
        """(valuation of the difference, joint precision floor)."""
        other = self._coerce(other)
        d = self - other
        return (d.valuation if d.unit else INF), min(self.prec, other.prec)

    def agrees(self, other: "PAdicScalar | Rational") -> bool:
        r, floor = self.residual(other)
        return r >= floor

    # arithmetic ---------------------------------------------------------------

    def _coerce(self, other) -> "PAdicScalar":
        if isinstance(other, PAdicScalar):
            if other.prime != self.prime:
                raise DomainError(f"prime mismatch: {self.prime} vs {other.prime}")
            return other
        if isinstance(other, (int, Fraction)):
            return PAdicScalar.of(self.prime, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.prime
        prec = min(self.prec, other.prec)
        if self.unit == 0:
            return PAdicScalar.make(p, other.valuation, other.unit, prec)
        if other.unit == 0:
            return PAdicScalar.make(p, self.valuation, self.unit, prec)
        e = min(self.valuation, other.valuation)
        u = self.unit * p ** int(self.valuation - e) + other.unit * p ** int(other.valuation - e)
        return PAdicScalar.make(p, e, u, prec)

    __radd__ = __add__

    def __neg__(self):
        return PAdicScalar.make(self.prime, self.valuation, -self.unit, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        va, vb = self.valuation, other.valuation
        prec = min(va + other.prec, vb + self.prec)
        if self.unit == 0 or other.unit == 0:
            return PAdicScalar(self.prime, prec, 0, prec)
        return PAdicScalar.make(self.prime, va + vb, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def inverse(self, prec: int | None = None) -> "PAdicScalar":
        """Multiplicative inverse; exact inputs with non-trivial unit get ``prec`` relative digits."""
        p = self.prime
        if self.unit == 0:
            raise PrecisionError(f"cannot invert {self}: zero at precision", deficit=1)
        v = self.valuation
        if self.prec == INF:
            if self.unit in (1, -1):
                return PAdicScalar(p, -v, self.unit, INF)
            rel = DEFAULT_PREC if prec is None else prec
        else:
            rel = self.prec - v
        mod = p ** int(rel)
        return PAdicScalar.make(p, -v, pow(self.unit, -1, mod), -v + rel)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = PAdicScalar.one(self.prime)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (PAdicScalar, int, Fraction)):
            o = self._coerce(other)
            if o is NotImplemented:
                return NotImplemented
            return self.agrees(o)
        return NotImplemented

    __hash__ = None

    def __repr__(self):
        return f"PAdicScalar({self})"

    def __str__(self):
        p = self.prime
        if self.unit == 0:
            return "0" if self.prec == INF else f"O({p}^{_fmt_prec(self.prec)})"
        head = f"{p}^{int(self.valuation)} * {self.unit}"
        if self.prec == INF:
            return head
        return f"{head} + O({p}^{int(self.prec)})"

    @classmethod
    def parse(cls, p: int, text: str) -> "PAdicScalar":
        """Inverse of ``str``: accepts 'p^v * u + O(p^N)', 'O(p^N)', '0' or a rational."""
        s = text.strip()
        m = re.fullmatch(r"(?:(-?\d+)\^(-?\d+)\s*\*\s*(-?\d+))?\s*(?:\+?\s*O\((\d+)\^(-?\d+)\))?", s)
        if m and (m.group(1) or m.group(4)):
            if m.group(4) and int(m.group(4)) != p:
                raise ParseError(f"prime {m.group(4)} does not match {p}", s.find("O("))
            prec = int(m.group(5)) if m.group(4) else INF
            if not m.group(1):
                return cls(p, prec, 0, prec)
            if int(m.group(1)) != p:
                raise ParseError(f"prime {m.group(1)} does not match {p}", 0)
            return cls.make(p, int(m.group(2)), int(m.group(3)), prec)
        try:
            return cls.of(p, Fraction(s))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"cannot read p-adic scalar {text!r}", 0) from None


def as_scalar(p: int, x) -> PAdicScalar:
    if isinstance(x, PAdicScalar):
        return x
    return PAdicScalar.of(p, x)


# logarithm and exponential ---------------------------------------------------


def _series_to_scalar(p: int, q: Fraction, absprec: float) -> PAdicScalar:
    return PAdicScalar.of(p, q, absprec)


def plog(a: PAdicScalar | Rational, p: int | None = None) -> PAdicScalar:
    """p-adic logarithm on 1 + pZ_p (1 + 4Z_2 for p = 2)."""
    if not isinstance(a, PAdicScalar):
        a = PAdicScalar.of(p, a)
    p = a.prime
    x = a - 1
    need = 2 if p == 2 else 1
    xv = x.valuation if x.unit else x.prec
    if xv < need:
        raise DomainError(f"log needs v(a-1) >= {need}, got {xv}")
    if x.unit == 0 and x.prec == INF:
        return PAdicScalar.zero(p)
    absprec = a.prec if a.prec != INF else xv + DEFAULT_PREC
    if x.unit == 0:
        return PAdicScalar.zero(p, absprec)
    xi = x.to_fraction()
    total = Fraction(0)
    n = 1
    term = xi
    while n * xv - math.log(n, p) < absprec + 1:
        total += term / n if n % 2 else -term / n
        n += 1
        term *= xi
    return _series_to_scalar(p, total, absprec)


def pexp(x: PAdicScalar | Rational, p: int | None = None) -> PAdicScalar:
    """p-adic exponential on pZ_p (4Z_2 for p = 2)."""
    if not isinstance(x, PAdicScalar):
        x = PAdicScalar.of(p, x)
    p = x.prime
    need = 2 if p == 2 else 1
    xv = x.valuation if x.unit else x.prec
    if xv < need:
        raise DomainError(f"exp needs v(x) >= {need}, got {xv}")
    if x.unit == 0 and x.prec == INF:
        return PAdicScalar.one(p)
    absprec = x.prec if x.prec != INF else DEFAULT_PREC
    if x.unit == 0:
        return PAdicScalar.make(p, 0, 1, absprec)
    xi = x.to_fraction()
    total = Fraction(1)
    term = Fraction(1)
    n = 1
    while True:
        term = term * xi / n
        total += term
        n += 1
        if n * (xv - 1 / (p - 1)) > absprec + 2:
            break
    return _series_to_scalar(p, total, absprec)


def iwasawa_log(a: PAdicScalar | Rational, p: int | None = None) -> PAdicScalar:
    """The logarithm on Z_p^x killing roots of unity: log(a^(p-1)) / (p-1)."""
    if not isinstance(a, PAdicScalar):
        a = PAdicScalar.of(p, a)
    p = a.prime
    if a.unit == 0 or a.valuation != 0:
        raise DomainError(f"{a} is not a p-adic unit")
    k = 2 if p == 2 else p - 1
    return plog(a ** k) / k


# cyclotomic levels -------------------------------------------------------------


def cyclo_degree(p: int, n: int) -> int:
    return 1 if n == 0 else (p - 1) * p ** (n - 1)


def reduce_cyclo(c: list[int], p: int, n: int) -> list[int]:
    """Reduce an integer polynomial modulo the p^n-th cyclotomic polynomial."""
    if n == 0:
        return [sum(c)]
    q = p ** n
    d = (p - 1) * p ** (n - 1)
    s = p ** (n - 1)
    folded = [0] * q
    for i, x in enumerate(c):
        if x:
            folded[i % q] += x
    out = folded[:d]
    for r in range(s):
        x = folded[d + r]
        if x:
            for j in range(p - 1):
                out[r + j * s] -= x
    return out


class CycloElement:
    """An element of L_n = Q_p(zeta_{p^n}) in the power basis of zeta = zeta_{p^n}.

    The value is p^e * sum(digits[i] zeta^i); ``prec`` is a single absolute
    precision shared by all coordinates.
    """

    __slots__ = ("p", "level", "e", "digits", "prec")

    def __init__(self, p: int, level: int, e: int, digits: tuple[int, ...], prec: float):
        self.p = p
        self.level = level
        self.e = e
        self.digits = digits
        self.prec = prec

    @staticmethod
    def make(p: int, level: int, e: int, digits, prec: float) -> "CycloElement":
        if level > MAX_LEVEL:
            raise DomainError(f"level {level} exceeds the cap {MAX_LEVEL}")
        k = prec - e
        digits = tuple(reduce_mod(int(d), k, p) for d in digits)
        if prec != INF and any(digits):
            s = min(vp(d, p) for d in digits if d)
            if s > 0:
                s = int(s)
                digits = tuple(d // p ** s for d in digits)
                e += s
        return CycloElement(p, level, e, digits, prec)

    @classmethod
    def from_scalar(cls, x: PAdicScalar | Rational, p: int, level: int) -> "CycloElement":
        x = as_scalar(p, x)
        d = cyclo_degree(p, level)
        if x.unit == 0:
            return cls(p, level, 0, (0,) * d, x.prec)
        return cls.make(p, level, int(x.valuation), (x.unit,) + (0,) * (d - 1), x.prec)

    @classmethod
    def from_coeffs(cls, coeffs, p: int, level: int, prec: float | None = None) -> "CycloElement":
        """Build from a sequence of rationals / PAdicScalars in the power basis."""
        d = cyclo_degree(p, level)
        cs = [as_scalar(p, c) for c in coeffs]
        if len(cs) > d:
            return cls.from_poly(cs, p, level, prec)
        cs += [PAdicScalar.zero(p)] * (d - len(cs))
        return cls._from_scalars(cs, p, level, prec)

    @classmethod
    def _from_scalars(cls, cs, p, level, prec):
        N = min(c.prec for c in cs)
        if prec is not None:
            N = min(N, prec)
        nz = [c for c in cs if c.unit]
        e = int(min(c.valuation for c in nz)) if nz else 0
        digits = [c.unit * p ** int(c.valuation - e) if c.unit else 0 for c in cs]
        return cls.make(p, level, e, digits, N)

    @classmethod
    def from_poly(cls, cs, p: int, level: int, prec: float | None = None) -> "CycloElement":
        """Reduce a longer coefficient list (exponents of zeta) into L_n."""
        cs = [as_scalar(p, c) for c in cs]
        N = min(c.prec for c in cs)
        if prec is not None:
            N = min(N, prec)
        nz = [c for c in cs if c.unit]
        e = int(min(c.valuation for c in nz)) if nz else 0
        digits = [c.unit * p ** int(c.valuation - e) if c.unit else 0 for c in cs]
        return cls.make(p, level, e, reduce_cyclo(digits, p, level), N)

    @classmethod
    def zeta(cls, p: int, level: int) -> "CycloElement":
        d = cyclo_degree(p, level)
        if level == 0:
            return cls(p, 0, 0, (1,), INF)
        if d == 1:
            return cls(p, level, 0, (-1,), INF)
        return cls(p, level, 0, (0, 1) + (0,) * (d - 2), INF)

    @classmethod
    def zero(cls, p: int, level: int, prec: float = INF) -> "CycloElement":
        return cls(p, level, 0, (0,) * cyclo_degree(p, level), prec)

    @classmethod
    def one(cls, p: int, level: int) -> "CycloElement":
        return cls.from_scalar(1, p, level)

    # inspection -----------------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.digits)

    @property
    def coeffs(self) -> list[PAdicScalar]:
        p = self.p
        return [PAdicScalar.make(p, self.e, d, self.prec) for d in self.digits]

    def min_valuation(self) -> float:
        """Lower bound for the valuations of the coordinates (capped by the precision)."""
        nz = [d for d in self.digits if d]
        if not nz:
            return self.prec
        return min(min(vp(d, self.p) for d in nz) + self.e, self.prec)

    def is_zero(self) -> bool:
        return not any(self.digits)

    def valuation(self) -> Fraction:
        """Normalised valuation v(N(x)) / [L_n : Q_p]."""
        nv = self.norm()
        if nv.unit == 0:
            raise PrecisionError("valuation of an element that is zero at precision")
        return Fraction(int(nv.valuation), self.degree)

    def residual(self, other: "CycloElement") -> tuple[float, float]:
        d = self - other
        return d.min_valuation() if not d.is_zero() else d.prec, min(self.prec, other.prec)

    def agrees(self, other: "CycloElement") -> bool:
        r, f = self.residual(other)
        return r >= f

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, PAdicScalar)):
            other = CycloElement.from_scalar(other, self.p, self.level)
        if not isinstance(other, CycloElement):
            return NotImplemented
        return self.agrees(other)

    __hash__ = None

    def to_scalar(self) -> PAdicScalar:
        """Coerce to Q_p; requires the non-constant coordinates to vanish at precision."""
        if any(self.digits[1:]):
            raise DomainError("element does not lie in Q_p")
        return PAdicScalar.make(self.p, self.e, self.digits[0], self.prec)

    # arithmetic -------------------------------------------------------------------

    def _align(self, other: "CycloElement"):
        if not isinstance(other, CycloElement):
            other = CycloElement.from_scalar(other, self.p, self.level)
        if other.level != self.level:
            if other.level < self.level:
                other = other.embed(self.level)
            else:
                return self.embed(other.level)._align(other)
        return self, other

    def __add__(self, other):
        a, b = self._align(other)
        e = min(a.e, b.e)
        sa, sb = a.p ** (a.e - e), a.p ** (b.e - e)
        digits = [x * sa + y * sb for x, y in zip(a.digits, b.digits)]
        return CycloElement.make(a.p, a.level, e, digits, min(a.prec, b.prec))

    __radd__ = __add__

    def __neg__(self):
        return CycloElement.make(self.p, self.level, self.e, [-d for d in self.digits], self.prec)

    def __sub__(self, other):
        a, b = self._align(other)
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: PAdicScalar | Rational) -> "CycloElement":
        c = as_scalar(self.p, c)
        if (self.prec == INF and not any(self.digits)) or (c.unit == 0 and c.prec == INF):
            return CycloElement.zero(self.p, self.level)
        va = self.min_valuation()
        prec = min(self.prec + (c.valuation if c.unit else c.prec), va + c.prec)
        if c.unit == 0:
            return CycloElement.zero(self.p, self.level, prec)
        return CycloElement.make(self.p, self.level, self.e + int(c.valuation),
                                 [d * c.unit for d in self.digits], prec)

    def __mul__(self, other):
        if isinstance(other, (PAdicScalar, int, Fraction)):
            return self.scale(other)
        if not isinstance(other, CycloElement):
            return NotImplemented
        a, b = self._align(other)
        for x in (a, b):
            if x.prec == INF and not any(x.digits):
                return CycloElement.zero(a.p, a.level)
        prec = min(a.min_valuation() + b.prec, b.min_valuation() + a.prec)
        prod = convolve(list(a.digits), list(b.digits))
        return CycloElement.make(a.p, a.level, a.e + b.e, reduce_cyclo(prod, a.p, a.level), prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = CycloElement.one(self.p, self.level)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def sigma(self, a: int) -> "CycloElement":
        return cyclo_sigma(self, a)

    def conjugates(self) -> list["CycloElement"]:
        q = self.p ** self.level
        return [self.sigma(a) for a in range(1, q + 1) if a % self.p]

    def norm(self) -> PAdicScalar:
        """N_{L_n/Q_p}(x)."""
        out = CycloElement.one(self.p, self.level)
        for c in self.conjugates():
            out = out * c
        return out.to_scalar()

    def inverse(self) -> "CycloElement":
        """x^-1 = (product of the other conjugates) / N(x)."""
        if self.level == 0:
            return CycloElement.from_scalar(self.to_scalar().inverse(), self.p, 0)
        num = CycloElement.one(self.p, self.level)
        for a in range(2, self.p ** self.level):
            if a % self.p:
                num = num * self.sigma(a)
        nrm = (num * self).to_scalar()
        return num.scale(nrm.inverse())

    def __truediv__(self, other):
        if isinstance(other, (PAdicScalar, int, Fraction)):
            return self.scale(as_scalar(self.p, other).inverse())
        return self * other.inverse()

    # tower ------------------------------------------------------------------------

    def embed(self, m: int) -> "CycloElement":
        """Image in L_m (m >= level) via zeta_{p^n} = zeta_{p^m}^(p^(m-n))."""
        n = self.level
        if m == n:
            return self
        if m < n:
            raise DomainError(f"cannot embed level {n} into level {m}")
        p = self.p
        d = cyclo_degree(p, m)
        out = [0] * d
        if n == 0:
            out[0] = self.digits[0]
        else:
            step = p ** (m - n)
            for i, x in enumerate(self.digits):
                out[i * step] = x
        return CycloElement.make(p, m, self.e, out, self.prec)

    def descend(self, n: int) -> "CycloElement":
        """Rewrite an element of L_n inside L_m at level n (checks membership at precision)."""
        m = self.level
        if n == m:
            return self
        p = self.p
        if n == 0:
            if any(self.digits[1:]):
                raise DomainError("element does not lie in L_0")
            return CycloElement.make(p, 0, self.e, [self.digits[0]], self.prec)
        step = p ** (m - n)
        if any(x for i, x in enumerate(self.digits) if i % step):
            raise DomainError(f"element does not lie in L_{n}")
        return CycloElement.make(p, n, self.e, list(self.digits[::step]), self.prec)

    def __repr__(self):
        return f"CycloElement({self})"

    def __str__(self):
        p = self.p
        terms = []
        for i, d in enumerate(self.digits):
            if d:
                c = Fraction(d) * Fraction(p) ** self.e
                terms.append(f"{c}" if i == 0 else f"{c}*z^{i}")
        body = " + ".join(terms) if terms else "0"
        if self.prec == INF:
            return body
        return f"{body} + O({p}^{_fmt_prec(self.prec)})"


def cyclo_sigma(x: CycloElement, a: int) -> CycloElement:
    """sigma_a: zeta -> zeta^a on L_n."""
    p, n = x.p, x.level
    if a % p == 0:
        raise InvalidGaloisElement(f"sigma_{a}: index divisible by {p}")
    if n == 0:
        return x
    q = p ** n
    a %= q
    if a == 1:
        return x
    out = [0] * q
    for i, c in enumerate(x.digits):
        if c:
            out[(a * i) % q] += c
    return CycloElement.make(p, n, x.e, reduce_cyclo(out, p, n), x.prec)


def galois_group(p: int, m: int, n: int) -> list[int]:
    """Representatives of Gal(L_m / L_n) as integers a mod p^m."""
    q = p ** m
    if n == 0:
        return [a for a in range(1, q) if a % p] or [1]
    step = p ** n
    return [1 + step * k for k in range(p ** (m - n))]


def trace(x: CycloElement, n: int) -> CycloElement:
    """Tr_{L_m/L_n}(x) as an element of L_n, summing Galois conjugates."""
    m = x.level
    if n > m:
        raise DomainError(f"target level {n} above source level {m}")
    if n == m:
        return x
    tot = [0] * x.degree
    for a in galois_group(x.p, m, n):
        for i, c in enumerate(cyclo_sigma(CycloElement(x.p, m, 0, x.digits, INF), a).digits):
            tot[i] += c
    return CycloElement.make(x.p, m, x.e, tot, x.prec).descend(n)


def tate_trace(x: CycloElement, n: int) -> CycloElement:
    """Normalised trace T_n = Tr_{L_m/L_n} / [L_m : L_n], a projector onto L_n.

    The conjugate sum of the integral representative is divisible by the
    degree exactly; the map is integral, so no precision is lost.
    """
    m = x.level
    if n > m:
        raise DomainError(f"target level {n} above source level {m}")
    if n == m:
        return x
    p = x.p
    deg = len(galois_group(p, m, n))
    tot = [0] * x.degree
    for a in galois_group(p, m, n):
        for i, c in enumerate(cyclo_sigma(CycloElement(p, m, 0, x.digits, INF), a).digits):
            tot[i] += c
    vdeg, udeg = split(deg, p)
    mod = p ** vdeg
    bad = [c for c in tot if c % mod]
    if bad:
        short = vdeg - min(vp(c, p) for c in bad)
        raise PrecisionError(f"conjugate sum not divisible by p^{vdeg}", deficit=short)
    tot = [c // mod for c in tot]
    if udeg != 1:
        k = x.prec - x.e
        if k == INF:
            q = Fraction(1, udeg)
            out = CycloElement.make(p, m, x.e, tot, INF).descend(n)
            return out.scale(PAdicScalar.of(p, q))
        inv = pow(udeg, -1, p ** max(int(k), 1))
        tot = [c * inv for c in tot]
    return CycloElement.make(p, m, x.e, tot, x.prec).descend(n)
