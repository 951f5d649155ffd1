"""p-adic arithmetic, the Robba ring and trianguline (phi, Gamma)-modules at desk scale."""

from .characters import Character
from .dif_local import DifElement, DifLattice, localize, sen_poly, trace_compat
from .errors import (BoundError, ConvergenceError, DivisibilityError, DomainError, InvalidGaloisElement, NotAMeasure,
                     ParseError, PrecisionError, PropHCViolation, RobbaError, SupportError)
from .measures import Measure, pushforward_affine, wD_integral, wD_riemann
from .padic_arith import CycloElement, PAdicScalar
from .pairing import pair_D, pair_dif
from .phigamma import ModuleElement, PhiGammaModule, casimir_apply, gl2_apply, mod_nabla
from .psi_restriction import CompactOpenSubset, PPlus, pplus_act, psi, restrict
from .report_harness import RunManifest, list_suites, run_suite
from .series_ring import CycloSeries, LaurentSeries, format_series, parse_series

__version__ = "0.1.0"

__all__ = [
    "Character", "CycloElement", "CycloSeries", "LaurentSeries", "PAdicScalar", "format_series", "parse_series",
    "psi", "restrict", "CompactOpenSubset", "PPlus", "pplus_act",
    "Measure", "pushforward_affine", "wD_integral", "wD_riemann",
    "PhiGammaModule", "ModuleElement", "mod_nabla", "gl2_apply", "casimir_apply",
    "DifLattice", "DifElement", "localize", "sen_poly", "trace_compat", "pair_D", "pair_dif",
    "RunManifest", "run_suite", "list_suites",
    "BoundError", "ConvergenceError", "DivisibilityError", "DomainError", "InvalidGaloisElement", "NotAMeasure",
    "ParseError", "PrecisionError", "PropHCViolation", "RobbaError", "SupportError",
]
