"""Fractional eigenvalue operators (trace / mid-range Laplacians) and solver.

Evaluates max-min combinations of 1-D directional fractional Laplacians,
assembles the trace, mid-range, weighted, Pucci and classical-mean
variants, and solves the associated nonlocal Dirichlet problem with a
monotone fixed-point scheme.
"""

from .directions import (
    DirectionSet,
    SubspaceSet,
    extremize,
    lambda_k_search,
    make_direction_set,
    make_subspace_set,
)
from .errors import ConfigError, NumericalError, OracleError, ProfileError, StudyError
from .geometry import (
    Domain,
    ExteriorDatum,
    Field,
    Grid,
    sample_extended,
    signed_distance,
)
from .operators import OperatorSpec, PointEvaluation, evaluate, pucci_combination
from .quad1d import LineQuadrature, build_quadrature, directional_theta, oracle_theta
from .solver import Problem, SolveReport, residual, solve_dirichlet
from .special import FractionalOrder, cs_constant, log_gamma

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DirectionSet",
    "Domain",
    "ExteriorDatum",
    "Field",
    "FractionalOrder",
    "Grid",
    "LineQuadrature",
    "NumericalError",
    "OperatorSpec",
    "OracleError",
    "PointEvaluation",
    "Problem",
    "ProfileError",
    "SolveReport",
    "StudyError",
    "SubspaceSet",
    "build_quadrature",
    "cs_constant",
    "directional_theta",
    "evaluate",
    "extremize",
    "lambda_k_search",
    "log_gamma",
    "make_direction_set",
    "make_subspace_set",
    "oracle_theta",
    "pucci_combination",
    "residual",
    "sample_extended",
    "signed_distance",
    "solve_dirichlet",
]
