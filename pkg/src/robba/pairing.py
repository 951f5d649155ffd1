"""The wedge form, the residue pairing on D x D and its localised version."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ._kernel import INF
from .characters import Character
from .dif_local import DifElement
from .errors import DomainError
from .padic_arith import PAdicScalar, as_scalar
from .phigamma import ModuleElement, PhiGammaModule, gl2_apply, phi_module, sigma_module
from .psi_restriction import psi
from .series_ring import DEFAULT_TRUNC, LaurentSeries

PHI_TAIL = 64

__all__ = [
    "WedgeForm", "wedge", "pair_D", "uminus_adjoint_check", "pair_dif", "dif_witness", "residue_adjunction",
    "AdjointReport",
]


@dataclass(frozen=True)
class WedgeForm:
    """x ^ y with e1 ^ e2 = 1; the target character is delta1 delta2."""

    module: PhiGammaModule

    @property
    def target(self) -> Character:
        return self.module.delta1 * self.module.delta2

    def __call__(self, x: ModuleElement, y: ModuleElement) -> LaurentSeries:
        return wedge(x, y)


def wedge(x: ModuleElement, y: ModuleElement) -> LaurentSeries:
    if x.rank != 2 or y.rank != 2:
        raise DomainError("the wedge form lives on rank-2 modules")
    return x.coords[0] * y.coords[1] - x.coords[1] * y.coords[0]


def pair_D(x: ModuleElement, y: ModuleElement, M: PhiGammaModule) -> PAdicScalar:
    """[x, y] = res_0((sigma_{-1} x ^ y) dT/(1+T))."""
    # sigma_{-1} of a polynomial is a power series; keep enough of it to reach T^-1 against y
    need = max(DEFAULT_TRUNC, -min(c.lo for c in y.coords) + 1)
    return wedge(sigma_module(x, M, -1, trunc=need), y).residue("dT/(1+T)")


def residue_adjunction(f: LaurentSeries, g: LaurentSeries) -> tuple[PAdicScalar, PAdicScalar]:
    """Both sides of res(phi(f) g dT/(1+T)) = res(f psi(g) dT/(1+T)).

    phi of a principal part is an infinite series in 1/T; the tail bound is
    raised so that its cut-off does not reach the working precision.  With g
    truncated, the residue is only determined when f has no principal part.
    """
    floor = f.min_prec() if f.min_prec() < INF else f.wprec
    need = math.ceil(floor * (f.p - 1) + f.p * max(-f.lo, 1))
    f = f.with_params(B=max(f.B, PHI_TAIL, need))
    lhs = (f.apply_phi() * g).residue("dT/(1+T)")
    rhs = (f * psi(g)).residue("dT/(1+T)")
    return lhs, rhs


@dataclass
class AdjointReport:
    """[u^- x, y] + [x, u^- y] with the precision it is known to."""

    lhs: PAdicScalar
    rhs: PAdicScalar
    residual: float
    floor: float

    @property
    def ok(self) -> bool:
        return self.residual >= self.floor

    def to_json(self) -> str:
        return json.dumps({"lhs": str(self.lhs), "rhs": str(self.rhs), "residual": self.residual,
                           "floor": self.floor, "ok": self.ok})


def uminus_adjoint_check(x: ModuleElement, y: ModuleElement, M: PhiGammaModule, j: int = 1) -> AdjointReport:
    """Compare [(u^-)^j x, y] with (-1)^j [x, (u^-)^j y]."""
    ux, uy = x, y
    for _ in range(j):
        ux = gl2_apply("u-", ux, M)
        uy = gl2_apply("u-", uy, M)
    lhs = pair_D(ux, y, M)
    rhs = pair_D(x, uy, M)
    if j % 2:
        rhs = -rhs
    r, f = lhs.residual(rhs)
    return AdjointReport(lhs, rhs, r, f)


# ---------------------------------------------------------------------------------------
# the localised pairing


def pair_dif(x: DifElement, y: DifElement) -> PAdicScalar:
    """res_0(T_0(sigma_{-1} x ^ y) dt) with e1 ^ e2 = t^-k."""
    if x.lattice.level != y.lattice.level or x.lattice.k != y.lattice.k:
        raise DomainError("pair_dif needs elements of the same lattice")
    k = x.lattice.k
    sx = x.sigma(-1)
    w = (sx.A * y.B - sx.B * y.A).shift(-k)
    return w.tate_trace(0).coeff(-1)


def dif_witness(lattice) -> tuple[DifElement, DifElement]:
    """x = e2, y = t^(k-1) e1: x lies in N_dif, y in t^(k-1) N_dif, and [x, y] = -1."""
    return lattice.e2(), lattice.e1().mul_t(lattice.k - 1)
