"""Arbitrary-precision verification of hypergeometric summation theorems at unit argument."""

__version__ = "0.1.0"

from .precision import PrecisionContext, parse_rational, format_rational
from .gamma import gamma, gamma_ratio, pochhammer, PoleError
from .series import (SeriesSpec, SumResult, direct_sum, partial_sum, richardson_sum, levin_sum,
                     sum_unit_argument, tail_exponent)
from .theorems import REGISTRY, IdentityId, ParamBinding, validity, rhs_value, lhs_series
from .verifier import VerificationReport, verify, verify_reduction, sweep, consistency_suite

__all__ = [
    "PrecisionContext", "parse_rational", "format_rational",
    "gamma", "gamma_ratio", "pochhammer", "PoleError",
    "SeriesSpec", "SumResult", "direct_sum", "partial_sum", "richardson_sum", "levin_sum",
    "sum_unit_argument", "tail_exponent",
    "REGISTRY", "IdentityId", "ParamBinding", "validity", "rhs_value", "lhs_series",
    "VerificationReport", "verify", "verify_reduction", "sweep", "consistency_suite",
]
