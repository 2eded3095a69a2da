"""Limits of tracking performance for SISO feedback systems.

Given an unstable and/or non-minimum-phase plant and a reference signal,
``tracklim`` brackets the best achievable value of five time-domain error
criteria (maximum amplitude, positive error, overshoot, undershoot and
fluctuation) between a certified dual lower bound and a primal upper bound
attained by an explicit error signal.
"""
from .analytic import FirstOrderLimits, check_inequality_chain, first_order_limits
from .dual import (
    ALL_CRITERIA,
    Criterion,
    DualOptions,
    DualResult,
    compute_sharp_correction,
    gamma_of,
    reduce_by_gamma,
    solve_dual,
    verify_certificate,
)
from .errors import (
    CertificateRejected,
    ContractError,
    NumericalFailure,
    TracklimError,
    ValidationError,
)
from .lp import LinearProgram, LpSolution, solve_lp
from .primal import GridSignal, PrimalOptions, PrimalResult, evaluate_cost, solve_primal
from .problem import Envelope, Mode, ProblemData, validate_problem
from .ratfun import Poly, RatFun, partial_fractions, poly_roots

__version__ = "0.1.0"

__all__ = [
    "ALL_CRITERIA", "CertificateRejected", "ContractError", "Criterion", "DualOptions",
    "DualResult", "Envelope", "FirstOrderLimits", "GridSignal", "LinearProgram", "LpSolution",
    "Mode", "NumericalFailure", "Poly", "PrimalOptions", "PrimalResult", "ProblemData",
    "RatFun", "TracklimError", "ValidationError", "check_inequality_chain",
    "compute_sharp_correction", "evaluate_cost", "first_order_limits", "gamma_of",
    "partial_fractions", "poly_roots", "reduce_by_gamma", "solve_dual", "solve_lp",
    "solve_primal", "validate_problem", "verify_certificate",
]
