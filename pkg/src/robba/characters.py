"""Continuous characters of Q_p^x of the form x -> x^m <x>^s on units."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from ._kernel import INF
from .errors import DomainError, ParseError
from .padic_arith import DEFAULT_PREC, PAdicScalar, as_scalar, iwasawa_log, pexp


@dataclass(frozen=True, eq=False)
class Character:
    """delta(p) = at_p and delta(u) = u^power * <u>^weight_extra for units u.

    ``<u>`` is the projection of u to 1 + pZ_p (p odd), so that
    <u>^s = exp(s * log u) with the Iwasawa logarithm.
    """

    p: int
    at_p: PAdicScalar
    power: int = 0
    weight_extra: PAdicScalar | None = None

    def __post_init__(self):
        if self.p == 2:
            raise DomainError("characters are implemented for odd p")
        if not isinstance(self.at_p, PAdicScalar):
            object.__setattr__(self, "at_p", PAdicScalar.of(self.p, self.at_p))
        s = self.weight_extra if self.weight_extra is not None else 0
        s = as_scalar(self.p, s)
        if s.unit and s.valuation < 0:
            raise DomainError("the exponent s must lie in Z_p")
        object.__setattr__(self, "weight_extra", s)
        if self.at_p.is_zero():
            raise DomainError("delta(p) must be non-zero")

    @classmethod
    def trivial(cls, p: int) -> "Character":
        return cls(p, PAdicScalar.one(p), 0)

    @classmethod
    def chi(cls, p: int) -> "Character":
        """The cyclotomic character x -> x |x|_p."""
        return cls(p, PAdicScalar.one(p), 1)

    @classmethod
    def of_weight(cls, p: int, w, at_p=1) -> "Character":
        """A character of weight w: integral part as power, the rest as <x>^s."""
        w = as_scalar(p, w)
        if w.exact:
            q = w.to_fraction()
            if q.denominator == 1:
                return cls(p, as_scalar(p, at_p), int(q))
        return cls(p, as_scalar(p, at_p), 0, w)

    @property
    def weight(self) -> PAdicScalar:
        """The derivative at 1: m + s."""
        return self.weight_extra + self.power

    def unit_value(self, u) -> PAdicScalar:
        u = as_scalar(self.p, u)
        if u.unit == 0 or u.valuation != 0:
            raise DomainError(f"{u} is not a unit")
        if u.exact and u.to_fraction().denominator == 1 and self.weight_extra.exact:
            return _unit_value_cached(self, u.lift())
        return _unit_value(self, u)

    def __call__(self, x) -> PAdicScalar:
        x = as_scalar(self.p, x)
        if x.unit == 0:
            raise DomainError("characters of Q_p^x are not defined at 0")
        v = int(x.valuation)
        u = PAdicScalar.make(self.p, 0, x.unit, x.prec - v)
        val = self.unit_value(u)
        return val * self.at_p ** v if v else val

    def __mul__(self, other: "Character") -> "Character":
        return Character(self.p, self.at_p * other.at_p, self.power + other.power,
                         self.weight_extra + other.weight_extra)

    def inverse(self) -> "Character":
        return Character(self.p, self.at_p.inverse(DEFAULT_PREC), -self.power, -self.weight_extra)

    def __truediv__(self, other: "Character") -> "Character":
        return self * other.inverse()

    def __eq__(self, other):
        if not isinstance(other, Character):
            return NotImplemented
        return (self.p == other.p and self.power == other.power and self.at_p.agrees(other.at_p)
                and self.weight_extra.agrees(other.weight_extra))

    __hash__ = None

    def __str__(self):
        a = self.at_p
        if a.prec == INF:
            head = f"{self.p}^{int(a.valuation)}*{a.unit}"
        else:
            head = f"{self.p}^{int(a.valuation)}*{a.unit} + O({self.p}^{int(a.prec)})"
        s = self.weight_extra
        st = str(s.to_fraction()) if s.exact else f"({s.to_fraction()} + O({self.p}^{int(s.prec)}))"
        return f"{head} | x^{self.power}<x>^{st}"

    @classmethod
    def parse(cls, text: str, p: int) -> "Character":
        """Read 'p^v*u | x^m<x>^s' (s may be a rational or '(q + O(p^N))')."""
        if "|" not in text:
            raise ParseError("expected '<delta(p)> | x^m<x>^s'", 0)
        left, _, right = text.partition("|")
        at = _parse_at_p(left.strip(), p)
        m = re.fullmatch(r"\s*x\^(-?\d+)\s*(?:<x>\^(.+))?\s*", right)
        if not m:
            raise ParseError(f"bad unit part {right.strip()!r}", len(left) + 1)
        s_text = (m.group(2) or "0").strip()
        sm = re.fullmatch(r"\((-?\d+(?:/\d+)?)\s*\+\s*O\((\d+)\^(-?\d+)\)\)", s_text)
        try:
            if sm:
                if int(sm.group(2)) != p:
                    raise ParseError(f"prime {sm.group(2)} does not match {p}", len(left) + 1)
                s = PAdicScalar.of(p, Fraction(sm.group(1)), int(sm.group(3)))
            else:
                s = PAdicScalar.of(p, Fraction(s_text))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad exponent {s_text!r}", len(left) + 1) from None
        return cls(p, at, int(m.group(1)), s)


def _parse_at_p(text: str, p: int) -> PAdicScalar:
    m = re.fullmatch(r"(\d+)\^(-?\d+)\s*\*\s*(-?\d+)(?:\s*\+\s*O\((\d+)\^(-?\d+)\))?", text)
    if m:
        if int(m.group(1)) != p:
            raise ParseError(f"prime {m.group(1)} does not match {p}", 0)
        prec = int(m.group(5)) if m.group(4) else INF
        return PAdicScalar.make(p, int(m.group(2)), int(m.group(3)), prec)
    try:
        return PAdicScalar.of(p, Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad value at p {text!r}", 0) from None


def _unit_value(chi: Character, u: PAdicScalar) -> PAdicScalar:
    val = u ** chi.power if chi.power >= 0 else u.inverse(DEFAULT_PREC) ** (-chi.power)
    s = chi.weight_extra
    if s.unit == 0 and s.exact:
        return val
    return val * pexp(s * iwasawa_log(u))


@lru_cache(maxsize=4096)
def _unit_cache(p: int, power: int, s: Fraction, n: int) -> PAdicScalar:
    # values on units do not depend on delta(p)
    return _unit_value(Character(p, PAdicScalar.one(p), power, PAdicScalar.of(p, s)), PAdicScalar.of(p, n))


def _unit_value_cached(chi: Character, n: int) -> PAdicScalar:
    return _unit_cache(chi.p, chi.power, chi.weight_extra.to_fraction(), n)
