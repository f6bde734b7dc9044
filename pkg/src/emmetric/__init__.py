"""Alternative multipliers and decoupling for electromagnetic-type systems."""

__version__ = "0.1.0"

from .decouple import (BlockStructure, DecouplingReport, check_decoupling, compose_coupled,
                       diagonalize_path)
from .expr import EvalPoint, deriv, evaluate, parse
from .helmholtz import (ConditionReport, MultiplierCandidate, check_curv, check_dotg,
                        check_phi_symmetry, check_R_condition, check_skewderiv, check_veqn,
                        verify_all)
from .lax import crossings, eigen_drift, solve_lax, spectrum, trace_drift
from .model import EMSystem, integrate, sample_cloud
from .paths import MatrixFunction, MatrixPath
from .timeonly import (check_Weqn, connection_from_U, construct_system, multiplier_from_S,
                       solve_U)

__all__ = [
    "BlockStructure", "ConditionReport", "DecouplingReport", "EMSystem", "EvalPoint",
    "MatrixFunction", "MatrixPath", "MultiplierCandidate", "check_R_condition",
    "check_Weqn", "check_curv", "check_decoupling", "check_dotg", "check_phi_symmetry",
    "check_skewderiv", "check_veqn", "compose_coupled", "connection_from_U",
    "construct_system", "crossings", "deriv", "diagonalize_path", "eigen_drift",
    "evaluate", "integrate", "multiplier_from_S", "parse", "sample_cloud", "solve_U",
    "solve_lax", "spectrum", "trace_drift", "verify_all",
]
