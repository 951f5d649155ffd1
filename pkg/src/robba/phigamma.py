"""Rank 1 and rank 2 trianguline (phi, Gamma)-modules over the Robba ring.

A rank-2 module has basis e1, e2 with

    sigma_a(e1) = delta1(a) e1
    sigma_a(e2) = delta2(a) e2 + c_a e1,   c_a = delta2(a) b - delta1(a) sigma_a(b) + kappa delta2(a) log a
    phi(e2)     = delta2(p) e2 + (delta2(p) b - delta1(p) phi(b)) e1

for a Laurent series b (a change of basis away from the split module) and a
scalar kappa (a genuinely non-split class, only allowed when delta1 = delta2).
Differentiating at a = 1:

    nabla(e1) = w1 e1,   nabla(e2) = w2 e2 + g e1,   g = (w2 - w1) b - nabla(b) + kappa.

With D = (1+T) d/dT we have nabla = t D on R, and P_Sen(nabla) = (nabla - w1)(nabla - w2)
factors as t Q on the module; u^- = -Q needs no division by t.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from ._kernel import INF
from .characters import Character
from .errors import DivisibilityError, DomainError, PropHCViolation
from .padic_arith import DEFAULT_PREC, PAdicScalar, as_scalar, iwasawa_log
from .series_ring import DEFAULT_TRUNC, LaurentSeries, t_series

__all__ = [
    "Character", "PhiGammaModule", "ModuleElement", "mod_nabla", "gl2_apply", "casimir_apply",
    "uminus_iter", "uminus_closed_form", "check_prop_hc", "sen_poly_of", "random_element", "random_series",
    "sigma_module", "phi_module", "validate_module", "sen_apply", "casimir_rhs", "recover_scalar", "HCReport",
]


def D(f: LaurentSeries) -> LaurentSeries:
    """(1+T) d/dT, i.e. d/dt; exact on integer coefficients."""
    d = f.derivative()
    return d + d.shift(1)


@dataclass(frozen=True, eq=False)
class PhiGammaModule:
    """R(delta1) (rank 1), or an extension of R(delta2) by R(delta1) in the basis above."""

    delta1: Character
    delta2: Character | None = None
    ext: LaurentSeries | None = None
    kappa: PAdicScalar | None = None

    def __post_init__(self):
        p = self.delta1.p
        if self.delta2 is None and (self.ext is not None or self.kappa is not None):
            raise DomainError("a rank-1 module has no extension data")
        if self.kappa is not None:
            k = as_scalar(p, self.kappa)
            object.__setattr__(self, "kappa", k)
            if not k.is_zero() and not self.delta1 == self.delta2:
                raise DomainError("a non-split log class needs delta1 = delta2")

    @classmethod
    def diagonal(cls, delta1: Character, delta2: Character | None = None) -> "PhiGammaModule":
        return cls(delta1, delta2)

    @classmethod
    def with_weights(cls, p: int, a, b=None, ext: LaurentSeries | None = None, kappa=None) -> "PhiGammaModule":
        """The module R(x^a) (+) R(x^b) (delta(p) = 1), optionally twisted by extension data."""
        d1 = Character.of_weight(p, a)
        d2 = None if b is None else Character.of_weight(p, b)
        return cls(d1, d2, ext, kappa)

    @property
    def p(self) -> int:
        return self.delta1.p

    @property
    def rank(self) -> int:
        return 1 if self.delta2 is None else 2

    @property
    def weights(self) -> tuple:
        if self.delta2 is None:
            return (self.delta1.weight,)
        return (self.delta1.weight, self.delta2.weight)

    @property
    def delta_D(self) -> Character:
        chi = Character.chi(self.p)
        det = self.delta1 if self.delta2 is None else self.delta1 * self.delta2
        return det / chi

    @property
    def sen_poly(self) -> list[PAdicScalar]:
        """Coefficients [c0, c1, 1] of prod (X - w_i), lowest degree first."""
        ws = self.weights
        if len(ws) == 1:
            return [-ws[0], PAdicScalar.one(self.p)]
        a, b = ws
        return [a * b, -(a + b), PAdicScalar.one(self.p)]

    @property
    def casimir_scalar(self) -> PAdicScalar:
        a, b = self.weights
        return ((a - b) ** 2 - 1) / 2

    @property
    def central(self) -> PAdicScalar:
        """The scalar by which I_2 acts: a + b - 1."""
        a, b = self.weights
        return a + b - 1

    def b(self, like: LaurentSeries) -> LaurentSeries:
        if self.ext is None:
            return like.scale(0)
        return self.ext

    def k(self) -> PAdicScalar:
        return self.kappa if self.kappa is not None else PAdicScalar.zero(self.p)

    def g(self, M: int | None = None) -> LaurentSeries | None:
        """The e1-component of nabla(e2)."""
        if self.delta2 is None:
            return None
        if self.ext is None and (self.kappa is None or self.kappa.is_zero()):
            return None
        w1, w2 = self.weights
        p = self.p
        if self.ext is None:
            return LaurentSeries.monomial(p, 0, self.k())
        b = self.ext
        return b.scale(w2 - w1) - b.nabla() + self.k()

    def manifest(self) -> dict:
        d = {"p": self.p, "rank": self.rank, "delta1": str(self.delta1)}
        if self.delta2 is not None:
            d["delta2"] = str(self.delta2)
        if self.ext is not None:
            d["ext"] = str(self.ext)
        if self.kappa is not None:
            d["kappa"] = str(self.kappa.to_fraction())
        return d

    def to_json(self) -> str:
        return json.dumps(self.manifest())

    @classmethod
    def from_manifest(cls, data: dict | str) -> "PhiGammaModule":
        from .series_ring import parse_series

        if isinstance(data, str):
            data = json.loads(data)
        p = int(data["p"])
        if "weights" in data:
            ws = data["weights"]
            return cls.with_weights(p, *[Fraction(str(w)) for w in ws])
        d1 = Character.parse(data["delta1"], p)
        d2 = Character.parse(data["delta2"], p) if "delta2" in data else None
        ext = parse_series(data["ext"], p) if "ext" in data else None
        kappa = PAdicScalar.of(p, Fraction(data["kappa"])) if "kappa" in data else None
        return cls(d1, d2, ext, kappa)

    def __str__(self):
        return self.to_json()


@dataclass(frozen=True, eq=False)
class ModuleElement:
    """sum coords[i] e_{i+1}."""

    coords: tuple

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))

    @classmethod
    def of(cls, *coords: LaurentSeries) -> "ModuleElement":
        return cls(coords)

    @property
    def rank(self) -> int:
        return len(self.coords)

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        return ModuleElement([a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        return ModuleElement([a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "ModuleElement":
        return ModuleElement([-a for a in self.coords])

    def scale(self, c) -> "ModuleElement":
        return ModuleElement([a.scale(c) for a in self.coords])

    def mul(self, f: LaurentSeries) -> "ModuleElement":
        return ModuleElement([f * a for a in self.coords])

    def mul_t(self) -> "ModuleElement":
        return ModuleElement([a.mul_t() for a in self.coords])

    def map(self, fn) -> "ModuleElement":
        return ModuleElement([fn(a) for a in self.coords])

    def compare(self, other: "ModuleElement") -> list:
        return [a.compare(b) for a, b in zip(self.coords, other.coords)]

    def agrees(self, other: "ModuleElement") -> bool:
        return all(c.ok for c in self.compare(other))

    def residual(self, other: "ModuleElement") -> tuple[float, float]:
        """(smallest residual valuation, smallest floor) over all coordinates."""
        cs = self.compare(other)
        import numpy as np

        r = min((float(np.minimum(c.residuals, INF).min()) if len(c.residuals) else INF) for c in cs)
        f = min(c.min_floor for c in cs)
        return r, f

    def is_zero(self) -> bool:
        return all(a.is_zero() for a in self.coords)

    def __str__(self):
        return " + ".join(f"({a})*e{i + 1}" for i, a in enumerate(self.coords))


# ---------------------------------------------------------------------------------------
# differential structure


def mod_nabla(z: ModuleElement, M: PhiGammaModule) -> ModuleElement:
    """nabla(A e1 + B e2) = (nabla A + w1 A + g B) e1 + (nabla B + w2 B) e2."""
    ws = M.weights
    if z.rank != M.rank:
        raise DomainError("element and module ranks differ")
    out = [a.nabla() + a.scale(w) for a, w in zip(z.coords, ws)]
    g = M.g()
    if g is not None:
        out[0] = out[0] + g * z.coords[1]
    return ModuleElement(out)


def _q(z: ModuleElement, M: PhiGammaModule) -> ModuleElement:
    """Q with P_Sen(nabla)(z) = t Q(z)."""
    if M.rank == 1:
        return ModuleElement([D(z.coords[0])])
    A, B = z.coords
    w1, w2 = M.weights
    g = M.g()
    X = A.nabla() + A.scale(w1 - w2)
    if g is not None:
        X = X + g * B
    DB = D(B)
    first = D(X)
    if g is not None:
        first = first + g * DB
    second = D(B.nabla()) + DB.scale(w2 - w1)
    return ModuleElement([first, second])


def sen_apply(z: ModuleElement, M: PhiGammaModule) -> ModuleElement:
    """P_Sen(nabla)(z) by composing nabla."""
    out = z
    for w in M.weights:
        out = mod_nabla(out, M) - out.scale(w)
    return out


def gl2_apply(X: str, z: ModuleElement, M: PhiGammaModule) -> ModuleElement:
    """I2 z = (a+b-1) z, h z = 2 nabla z - (a+b-1) z, u+ z = t z, u- z = -P_Sen(nabla)(z)/t."""
    if M.rank != 2:
        raise DomainError("the gl2 action is defined on rank-2 modules")
    c = M.central
    if X == "I2":
        return z.scale(c)
    if X == "h":
        return mod_nabla(z, M).scale(2) - z.scale(c)
    if X in ("u+", "uplus"):
        return z.mul_t()
    if X in ("u-", "uminus"):
        return -_q(z, M)
    raise DomainError(f"unknown gl2 element {X!r}")


def casimir_apply(z: ModuleElement, M: PhiGammaModule) -> ModuleElement:
    """C = u+ u- + u- u+ + h^2 / 2."""
    up = gl2_apply("u+", gl2_apply("u-", z, M), M)
    pu = gl2_apply("u-", gl2_apply("u+", z, M), M)
    hh = gl2_apply("h", gl2_apply("h", z, M), M)
    return up + pu + hh.scale(PAdicScalar.of(M.p, Fraction(1, 2)))


def casimir_rhs(z: ModuleElement, M: PhiGammaModule) -> ModuleElement:
    """2 t u-(z) + 2 P_Sen(nabla)(z) + ((a-b)^2-1)/2 z."""
    return (gl2_apply("u-", z, M).mul_t().scale(2) + sen_apply(z, M).scale(2)
            + z.scale(M.casimir_scalar))


def recover_scalar(Cz: ModuleElement, z: ModuleElement) -> PAdicScalar:
    """lambda with Cz = lambda z, read off the coefficient of z of least valuation."""
    best = None
    for a, c in zip(z.coords, Cz.coords):
        for k in range(a.lo, a.hi):
            x = a.coeff(k)
            if x.unit and (best is None or x.valuation < best[0].valuation):
                best = (x, c.coeff(k))
    if best is None:
        raise DomainError("z vanishes at precision")
    x, y = best
    return y / x


def uminus_iter(z: ModuleElement, j: int, M: PhiGammaModule) -> ModuleElement:
    """(u-)^j by repeated application."""
    for _ in range(j):
        z = gl2_apply("u-", z, M)
    return z


def uminus_closed_form(z: ModuleElement, j: int, M: PhiGammaModule) -> ModuleElement:
    """nabla(nabla-1)...(nabla-j+1)(k-nabla)...(k+j-1-nabla)(z) / t^j for weights (0, k).

    The division by t^j goes through div_t, so this path is independent of
    the factorisation used by gl2_apply.
    """
    w1, w2 = M.weights
    if not (w1.is_zero() and w2.exact and w2.to_fraction().denominator == 1 and w2.to_fraction() > 0):
        raise DomainError("the closed form needs weights (0, k) with k a positive integer")
    k = int(w2.to_fraction())
    out = z
    for i in range(j):
        out = mod_nabla(out, M) - out.scale(i)
    for i in range(j):
        out = out.scale(k + i) - mod_nabla(out, M)
    for _ in range(j):
        out = ModuleElement([_div_t_checked(a) for a in out.coords])
    return out


def _div_t_checked(f: LaurentSeries) -> LaurentSeries:
    try:
        return f.div_t()
    except DivisibilityError as e:
        raise PropHCViolation(str(e), e.degree, e.valuation) from None


# ---------------------------------------------------------------------------------------
# Gamma and phi on module elements


def sigma_module(z: ModuleElement, M: PhiGammaModule, a, trunc: int | None = None) -> ModuleElement:
    p = M.p
    a = as_scalar(p, a)
    sa = [c.apply_sigma(a, trunc) for c in z.coords]
    out = [sa[0].scale(M.delta1(a))]
    if M.rank == 2:
        d1, d2 = M.delta1(a), M.delta2(a)
        out.append(sa[1].scale(d2))
        c = None
        if M.ext is not None:
            b = M.ext
            c = b.scale(d2) - b.apply_sigma(a, trunc).scale(d1)
        if M.kappa is not None and not M.kappa.is_zero():
            lg = LaurentSeries.monomial(p, 0, M.kappa * d2 * iwasawa_log(a))
            c = lg if c is None else c + lg
        if c is not None:
            out[0] = out[0] + c * sa[1]
    return ModuleElement(out)


def phi_module(z: ModuleElement, M: PhiGammaModule) -> ModuleElement:
    fa = [c.apply_phi() for c in z.coords]
    out = [fa[0].scale(M.delta1.at_p)]
    if M.rank == 2:
        out.append(fa[1].scale(M.delta2.at_p))
        if M.ext is not None:
            b = M.ext
            c = b.scale(M.delta2.at_p) - b.apply_phi().scale(M.delta1.at_p)
            out[0] = out[0] + c * fa[1]
    return ModuleElement(out)


def validate_module(M: PhiGammaModule, a=2, M_trunc: int = 24) -> bool:
    """phi and sigma_a commute on the basis (checks the extension data)."""
    p = M.p
    one = LaurentSeries.from_coeffs(p, [1], trunc=M_trunc)
    zero = LaurentSeries.from_coeffs(p, [0], trunc=M_trunc)
    basis = [ModuleElement([one] if M.rank == 1 else [one, zero])]
    if M.rank == 2:
        basis.append(ModuleElement([zero, one]))
    for e in basis:
        x = phi_module(sigma_module(e, M, a), M)
        y = sigma_module(phi_module(e, M), M, a)
        if not x.agrees(y):
            return False
    return True


# ---------------------------------------------------------------------------------------
# divisibility of P_Sen(nabla) by t


@dataclass
class HCReport:
    """Per-sample divisibility results for P_Sen(nabla)."""

    entries: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e["divisible"] and e["roundtrip_ok"] for e in self.entries)

    def to_json(self) -> str:
        return json.dumps(self.entries)


def check_prop_hc(M: PhiGammaModule, samples: Sequence[ModuleElement], levels: Sequence[int] = ()) -> HCReport:
    """For each z, divide P_Sen(nabla)(z) by t and check t q = P_Sen(nabla)(z).

    With ``levels``, P_Sen(nabla) is also applied to the localisation at
    zeta_{p^n} - 1 (another zero of t) and its constant term must vanish.
    """
    from .dif_local import localize_element, sen_apply_dif

    rep = HCReport()
    for i, z in enumerate(samples):
        P = sen_apply(z, M)
        entry = {"sample": i, "divisible": True, "roundtrip_ok": True, "residual": INF, "floor": INF}
        try:
            q = ModuleElement([a.div_t() for a in P.coords])
        except DivisibilityError as e:
            entry.update(divisible=False, roundtrip_ok=False, degree=e.degree, valuation=e.valuation)
            rep.entries.append(entry)
            continue
        back = q.mul_t()
        r, f = back.residual(P)
        cs = back.compare(P)
        entry.update(roundtrip_ok=back.agrees(P), residual=r, floor=f,
                     best_floor=max(c.max_floor for c in cs))
        for n in levels:
            loc = sen_apply_dif(localize_element(z, M, n), M, n)
            ok = all(c.coeff(0).is_zero() for c in loc)
            entry[f"level{n}"] = ok
            entry[f"level{n}_prec"] = min(float(c.coeff(0).prec) for c in loc)
            entry["divisible"] = entry["divisible"] and ok
        rep.entries.append(entry)
    return rep


def sen_poly_of(M: PhiGammaModule, n: int = 1) -> list[PAdicScalar]:
    from .dif_local import sen_poly

    return sen_poly(M, n)


# ---------------------------------------------------------------------------------------
# random elements


def random_series(p: int, rng: random.Random, trunc: int = DEFAULT_TRUNC, prec: int = DEFAULT_PREC,
                  principal: int = 0, B: int = 8, exact: bool = False) -> LaurentSeries:
    """Random integral series with coefficients mod p^prec; ``principal`` negative degrees."""
    q = p ** prec
    cs = [rng.randrange(q) for _ in range(principal + trunc)]
    if exact:
        return LaurentSeries.from_coeffs(p, cs, lo=-principal, B=B)
    return LaurentSeries.from_coeffs(p, cs, lo=-principal, trunc=trunc, prec=prec, bound=0.0, B=B)


def random_element(M: PhiGammaModule, rng: random.Random, trunc: int = DEFAULT_TRUNC, prec: int = DEFAULT_PREC,
                   principal: int = 0, exact: bool = False) -> ModuleElement:
    return ModuleElement([random_series(M.p, rng, trunc, prec, principal, exact=exact) for _ in range(M.rank)])
