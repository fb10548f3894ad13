"""Exact iteration, degree growth and singularity analysis of birational maps."""

from .poly import Poly, PolyError, RationalFunction, VarSpec, parse, parse_rational
from .projmap import (GenericityError, KFactor, NotInversePair, ProjPoint, RationalMap,
                      SingularPointHit, compose, extract_k_factor, load_map_file)
from .iterate import (Budget, BudgetExceeded, MapSchedule, build_ledger, iterate_direct,
                      iterate_pullback, ledger_degree_check)
from .degfit import NoFit, classify_growth, fit, fit_recurrence, to_generating_function
from .maps import get_map
from .singular import (builtin_chart_table, track_orbit, verify_exceptional_set,
                       verify_fixed_sink, verify_transform)

__version__ = "0.1.0"

__all__ = [
    "Poly", "PolyError", "RationalFunction", "VarSpec", "parse", "parse_rational",
    "GenericityError", "KFactor", "NotInversePair", "ProjPoint", "RationalMap",
    "SingularPointHit", "compose", "extract_k_factor", "load_map_file",
    "Budget", "BudgetExceeded", "MapSchedule", "build_ledger", "iterate_direct",
    "iterate_pullback", "ledger_degree_check",
    "NoFit", "classify_growth", "fit", "fit_recurrence", "to_generating_function",
    "get_map",
    "builtin_chart_table", "track_orbit", "verify_exceptional_set", "verify_fixed_sink",
    "verify_transform",
]
