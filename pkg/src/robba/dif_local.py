"""Localisation into L_n[[t]] and the de Rham lattices at finite level."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from ._kernel import INF, vfact, vp
from .errors import BoundError, DomainError, PrecisionError
from .padic_arith import CycloElement, PAdicScalar, as_scalar, iwasawa_log
from .psi_restriction import psi
from .series_ring import DEFAULT_TRUNC_T, Comparison, CycloSeries, LaurentSeries

__all__ = [
    "localize", "localize_element", "trace_compat", "sen_operator", "sen_poly", "DifLattice", "DifElement",
    "nabla_2k", "xn_membership", "xn_closed_form", "localization_loss", "localize_derivation_check",
    "nabla_dif", "sen_apply_dif", "uminus_dif", "in_tk_ndif", "random_cyclo_series", "random_lattice_element",
]


def _cyclo_series_inverse(f: CycloSeries) -> CycloSeries:
    """1/f for a power series in t with invertible constant term (formal in t)."""
    J = f.trunc
    c0inv = f.coeff(0).inverse()
    out = [c0inv]
    for j in range(1, J):
        acc = CycloElement.zero(f.p, f.level)
        for i in range(1, j + 1):
            if i < f.hi:
                acc = acc + f.coeff(i) * out[j - i]
        out.append(-(acc * c0inv))
    return CycloSeries(f.p, f.level, 0, out, J)


# absolute precision of the 1/k! coefficients of exp(t/p^n); well past any working precision
X_PREC = 60


@lru_cache(maxsize=64)
def _X(p: int, n: int, J: int) -> CycloSeries:
    """zeta_{p^n} exp(t/p^n) - 1 up to t^J, coefficients to O(p^X_PREC)."""
    z = CycloElement.zeta(p, n)
    cs = [z - CycloElement.one(p, n)]
    for k in range(1, J):
        cs.append(z.scale(PAdicScalar.of(p, Fraction(1, p ** (n * k) * math.factorial(k)), prec=X_PREC)))
    return CycloSeries(p, n, 0, cs, J)


class _Powers:
    """X^m for m in Z (X = zeta e^{t/p^n} - 1), stored per t-degree as (exponent, digits, valuation)."""

    def __init__(self, p: int, n: int, J: int):
        self.p, self.n, self.J = p, n, J
        one = CycloSeries.monomial(p, n, 0, 1, J)
        self.X = _X(p, n, J)
        self.Xinv = None
        self.pos = [one]
        self.neg = [one]
        self.data: dict[int, list] = {}

    def get(self, m: int) -> CycloSeries:
        if m >= 0:
            while len(self.pos) <= m:
                self.pos.append(self.pos[-1] * self.X)
            return self.pos[m]
        if self.Xinv is None:
            self.Xinv = _cyclo_series_inverse(self.X)
        while len(self.neg) <= -m:
            self.neg.append(self.neg[-1] * self.Xinv)
        return self.neg[-m]

    def entry(self, m: int) -> list:
        """[(e, digits, min valuation, precision)] for t^0 .. t^(J-1) of X^m."""
        d = self.data.get(m)
        if d is None:
            Xm = self.get(m)
            d = []
            for j in range(self.J):
                c = Xm.coeff(j)
                d.append((c.e, c.digits, c.min_valuation() if any(c.digits) else INF, float(c.prec)))
            self.data[m] = d
        return d


@lru_cache(maxsize=64)
def _powers(p: int, n: int, J: int) -> _Powers:
    return _Powers(p, n, J)


def localization_loss(p: int, n: int, M: int, j: int) -> float:
    """Lower bound for the valuation of the t^j coefficient of X^m over all m >= M.

    X = pi + zeta (exp(t/p^n) - 1) with v(pi) = 1/e_n; a t^j term picks at most
    j factors from the exponential part, so the bound is
    (M - j)/e_n - n j - v(j!). Coordinates in the power basis lose the
    fractional part.
    """
    e = p ** (n - 1) * (p - 1)
    return math.floor(Fraction(M - j, e) - n * j - vfact(j, p))


def localize(f: LaurentSeries, n: int, J: int = DEFAULT_TRUNC_T) -> CycloSeries:
    """phi^{-n}(f) = f(zeta_{p^n} e^{t/p^n} - 1) in L_n[[t]] up to t^J."""
    if n < 1:
        raise DomainError("localisation needs n >= 1")
    if f.var != "T":
        raise DomainError("localize expects a T-series")
    if f.tail < INF and f.lo < 0:
        raise BoundError("the principal part is cut off; localisation needs it in full")
    p = f.p
    tab = _powers(p, n, J)
    deg = len(CycloElement.zero(p, n).digits)
    ms = [m for m in range(f.lo, f.hi)
          if f.digits[m - f.lo] or f.precs[m - f.lo] < INF]
    rows = [tab.entry(m) for m in ms]
    out = []
    for j in range(J):
        live = [(f.digits[m - f.lo], float(f.precs[m - f.lo]), rows[i][j]) for i, m in enumerate(ms)
                if rows[i][j][2] < INF or rows[i][j][3] < INF]
        # f_m X^m is known to min(prec(f_m) + v(X^m), v(f_m) + prec(X^m))
        prec = min((min(pr + ent[2], (f.e + vp(dg, p) if dg else INF) + ent[3]) for dg, pr, ent in live),
                   default=INF)
        nz = [(dg, ent) for dg, _, ent in live if dg]
        if not nz:
            out.append(CycloElement.zero(p, n, prec))
            continue
        E = min(ent[0] for _, ent in nz)
        tot = [0] * deg
        for dg, (e, digits, _, _) in nz:
            s = dg * p ** (e - E)
            for i, x in enumerate(digits):
                if x:
                    tot[i] += s * x
        out.append(CycloElement.make(p, n, f.e + E, tot, prec))
    if f.trunc is not None:
        for j in range(J):
            cap = f.bound + localization_loss(p, n, f.trunc, j)
            if cap < out[j].prec:
                out[j] = out[j] + CycloElement.zero(p, n, cap)
    return CycloSeries(p, n, 0, out, J)


def localize_element(z, M, n: int, J: int = DEFAULT_TRUNC_T) -> list[CycloSeries]:
    """Coordinates of a module element after localisation (basis e_i maps to e_i)."""
    return [localize(c, n, J) for c in z.coords]


def localize_derivation_check(f: LaurentSeries, n: int, J: int = DEFAULT_TRUNC_T) -> Comparison:
    """localize((1+T) f') against p^n d/dt localize(f).

    This is the chain rule behind localize(nabla f) = t d/dt localize(f):
    nabla = log(1+T) (1+T) d/dT and log(1+T) localises to t/p^n.
    """
    Df = f.derivative()
    Df = Df + Df.shift(1)
    lhs = localize(Df, n, J)
    loc = localize(f, n, J)
    rhs = CycloSeries(f.p, n, loc.lo - 1, [c * (loc.lo + i) for i, c in enumerate(loc.coeffs)], J - 1)
    rhs = rhs * PAdicScalar.of(f.p, f.p ** n)
    return lhs.truncate(J - 1).compare(rhs)


def _theta(f: CycloSeries) -> CycloSeries:
    return f.nabla()


def _dif_g(M, n: int, J: int) -> CycloSeries | None:
    """Localised e1-component of nabla(e2): (w2 - w1) b - theta(b) + kappa at level n."""
    if M.rank == 1 or (M.ext is None and (M.kappa is None or M.kappa.is_zero())):
        return None
    w1, w2 = M.weights
    out = CycloSeries.monomial(M.p, n, 0, M.k(), J)
    if M.ext is not None:
        lb = localize(M.ext, n, J)
        out = out + lb * (w2 - w1) - _theta(lb)
    return out


def nabla_dif(coords: Sequence[CycloSeries], M, n: int) -> list[CycloSeries]:
    """The connection on localised coordinates: theta + weights, plus the extension term."""
    out = [_theta(a) + a * w for a, w in zip(coords, M.weights)]
    g = _dif_g(M, n, coords[0].trunc or DEFAULT_TRUNC_T)
    if g is not None:
        out[0] = out[0] + g * coords[1]
    return out


def sen_apply_dif(coords: Sequence[CycloSeries], M, n: int) -> list[CycloSeries]:
    out = list(coords)
    for w in M.weights:
        nb = nabla_dif(out, M, n)
        out = [x - y * w for x, y in zip(nb, out)]
    return out


def uminus_dif(coords: Sequence[CycloSeries], M, n: int) -> list[CycloSeries]:
    """Localised u^-: -P_Sen(nabla)/log(1+T), and log(1+T) localises to t/p^n."""
    P = sen_apply_dif(coords, M, n)
    c = PAdicScalar.of(M.p, -(M.p ** n))
    return [x.div_t() * c for x in P]


def in_tk_ndif(coords: Sequence[CycloSeries], k: int) -> bool:
    """Membership in t^k N_dif,n: both coordinates divisible by t^k."""
    return all(_vanishes_below(c, k) for c in coords)


def trace_compat(z: LaurentSeries, n: int, J: int = DEFAULT_TRUNC_T) -> Comparison:
    """Residuals of phi^{-n}(psi z) - p^{-1} Tr_{L_{n+1}/L_n} phi^{-(n+1)}(z)."""
    lhs = localize(psi(z), n, J)
    rhs = localize(z, n + 1, J).trace(n) * PAdicScalar.of(z.p, Fraction(1, z.p))
    return lhs.compare(rhs)


# ---------------------------------------------------------------------------------------
# Sen operator


def sen_operator(M, n: int = 1, J: int = 4) -> list[list[CycloElement]]:
    """Matrix of nabla on D_dif,n^+ / t D_dif,n^+ in the localised basis."""
    p = M.p
    w = [CycloElement.from_scalar(x, p, n) for x in M.weights]
    if M.rank == 1:
        return [[w[0]]]
    g = _dif_g(M, n, J)
    off = CycloElement.zero(p, n) if g is None else g.coeff(0)
    return [[w[0], off], [CycloElement.zero(p, n), w[1]]]


def sen_poly(M, n: int = 1) -> list[PAdicScalar]:
    """Characteristic polynomial of sen_operator, coefficients lowest degree first."""
    m = sen_operator(M, n)
    if len(m) == 1:
        coeffs = [-m[0][0], CycloElement.one(M.p, n)]
    else:
        tr = m[0][0] + m[1][1]
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        coeffs = [det, -tr, CycloElement.one(M.p, n)]
    out = []
    for c in coeffs:
        try:
            out.append(c.descend(0).to_scalar())
        except DomainError:
            raise PrecisionError("the characteristic polynomial is not resolved over Q_p at this precision") from None
    return out


# ---------------------------------------------------------------------------------------
# the lattices N_dif,n and D_dif,n^+


@dataclass(frozen=True)
class DifLattice:
    """L_n[[t]] e1 + L_n[[t]] t^k e2 with sigma_a(e2) = e2 + eps log(a) e1 and nabla e2 = eps e1."""

    p: int
    level: int
    k: int
    structure: str = "deRham"
    trunc: int = DEFAULT_TRUNC_T

    def __post_init__(self):
        if self.structure not in ("deRham", "nonDeRham"):
            raise DomainError(f"unknown structure {self.structure!r}")
        if self.k < 1 or self.level < 1:
            raise DomainError("need k >= 1 and level >= 1")

    @property
    def eps(self) -> int:
        return 0 if self.structure == "deRham" else 1

    @property
    def rank(self) -> int:
        return 2

    def manifest(self) -> dict:
        return {"p": self.p, "level": self.level, "structure": self.structure, "k": self.k}

    def to_json(self) -> str:
        return json.dumps(self.manifest())

    @classmethod
    def from_manifest(cls, data) -> "DifLattice":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data.get("p", 3)), int(data["level"]), int(data["k"]), data["structure"])

    def element(self, A: CycloSeries, B: CycloSeries, check: bool = True) -> "DifElement":
        z = DifElement(self, A, B)
        if check and not z.in_lattice():
            raise DomainError("B is not divisible by t^k: the element is outside D_dif,n^+")
        return z

    def e1(self) -> "DifElement":
        return DifElement(self, CycloSeries.monomial(self.p, self.level, 0, 1, self.trunc),
                          CycloSeries.zero(self.p, self.level, self.trunc))

    def e2(self) -> "DifElement":
        return DifElement(self, CycloSeries.zero(self.p, self.level, self.trunc),
                          CycloSeries.monomial(self.p, self.level, 0, 1, self.trunc))


@dataclass(frozen=True)
class DifElement:
    """A e1 + B e2 in N_dif,n[1/t]."""

    lattice: DifLattice
    A: CycloSeries
    B: CycloSeries

    @property
    def coords(self) -> tuple[CycloSeries, CycloSeries]:
        return (self.A, self.B)

    def in_lattice(self) -> bool:
        return _vanishes_below(self.A, 0) and _vanishes_below(self.B, self.lattice.k)

    def _new(self, A, B) -> "DifElement":
        return DifElement(self.lattice, A, B)

    def __add__(self, other):
        return self._new(self.A + other.A, self.B + other.B)

    def __sub__(self, other):
        return self._new(self.A - other.A, self.B - other.B)

    def __neg__(self):
        return self._new(-self.A, -self.B)

    def scale(self, c) -> "DifElement":
        return self._new(self.A * c, self.B * c)

    def mul(self, f: CycloSeries) -> "DifElement":
        return self._new(f * self.A, f * self.B)

    def mul_t(self, k: int = 1) -> "DifElement":
        return self._new(self.A.mul_t(k), self.B.mul_t(k))

    def nabla(self) -> "DifElement":
        eps = self.lattice.eps
        A = self.A.nabla()
        if eps:
            A = A + self.B
        return self._new(A, self.B.nabla())

    def sigma(self, a) -> "DifElement":
        sA, sB = self.A.sigma(a), self.B.sigma(a)
        if self.lattice.eps:
            lg = iwasawa_log(as_scalar(self.lattice.p, a))
            sA = sA + sB * lg
        return self._new(sA, sB)

    def embed(self, m: int) -> "DifElement":
        """The same element seen in N_dif,m for m >= n."""
        L = self.lattice
        return DifElement(DifLattice(L.p, m, L.k, L.structure, L.trunc), self.A.embed(m), self.B.embed(m))

    def tate_trace(self, n: int) -> "DifElement":
        """T_n applied to the coordinates (the basis e1, e2 is Galois-fixed)."""
        L = self.lattice
        return DifElement(DifLattice(L.p, n, L.k, L.structure, L.trunc), self.A.tate_trace(n), self.B.tate_trace(n))

    def agrees(self, other: "DifElement") -> bool:
        return self.A.agrees(other.A) and self.B.agrees(other.B)


def _vanishes_below(f: CycloSeries, k: int) -> bool:
    return all(f.coeff(j).is_zero() for j in range(f.lo, min(k, f.hi)))


def nabla_2k(z: DifElement, k: int) -> DifElement:
    """nabla (nabla - 1) ... (nabla - 2k + 1) z."""
    for i in range(2 * k):
        z = z.nabla() - z.scale(i)
    return z


def xn_membership(z: DifElement, k: int | None = None) -> bool:
    """Whether nabla_{2k}(z) lies in t^{2k} N_dif,n."""
    k = z.lattice.k if k is None else k
    if not z.in_lattice():
        raise DomainError("xn_membership needs z in D_dif,n^+")
    w = nabla_2k(z, k)
    return _vanishes_below(w.A, 2 * k) and _vanishes_below(w.B, 2 * k)


def xn_closed_form(z: DifElement, k: int | None = None) -> bool:
    """X_n is everything when eps = 0, and L_n[[t]] e1 + t^{2k} L_n[[t]] e2 otherwise."""
    k = z.lattice.k if k is None else k
    if z.lattice.eps == 0:
        return True
    return _vanishes_below(z.B, 2 * k)


def random_cyclo_series(p: int, n: int, rng, lo: int = 0, J: int = DEFAULT_TRUNC_T, prec: int = 20,
                        exact: bool = True) -> CycloSeries:
    """Integral coefficients in the power basis; exact unless asked otherwise."""
    from .padic_arith import cyclo_degree

    d = cyclo_degree(p, n)
    q = p ** prec
    cs = [CycloElement.make(p, n, 0, [rng.randrange(q) for _ in range(d)], INF if exact else prec)
          for _ in range(lo, J)]
    return CycloSeries(p, n, lo, cs, J)


def random_lattice_element(lattice: DifLattice, rng, kind: str = "D+") -> DifElement:
    """kind: 'D+' (t^k | B), 'N' (any A, B), 'tkN' (t^k | A and B), 'X' (t^2k | B)."""
    p, n, k, J = lattice.p, lattice.level, lattice.k, lattice.trunc
    shifts = {"D+": (0, k), "N": (0, 0), "tkN": (k, k), "X": (0, 2 * k)}
    if kind not in shifts:
        raise DomainError(f"unknown kind {kind!r}")
    sa, sb = shifts[kind]
    A = random_cyclo_series(p, n, rng, sa, J)
    B = random_cyclo_series(p, n, rng, sb, J)
    return DifElement(lattice, A, B)
