"""Finite-energy thresholds for model probability measures.

Radial, toric and divisorial model measures, and a blow-up example, all
reduce to deciding convergence of integrals ``c t^a (log t)^b``; this
package does that exactly and confirms it numerically.
"""

from .errors import (
    ConfigError,
    EnergiaError,
    FitUnstable,
    Inconclusive,
    NonConvex,
    NonIntegrableSuspected,
    OracleDisagreement,
    OutOfFamily,
    RangeError,
    SlopeOutOfRange,
    UnsupportedForm,
)
from .logpow import (
    ConvergenceVerdict,
    DivergenceRate,
    LogPowerTerm,
    Status,
    classify_at_infinity,
    classify_at_zero,
    multiply,
    parse_term,
    substitute_at_zero,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceVerdict",
    "DivergenceRate",
    "LogPowerTerm",
    "Status",
    "classify_at_infinity",
    "classify_at_zero",
    "multiply",
    "parse_term",
    "substitute_at_zero",
    "EnergiaError",
    "UnsupportedForm",
    "NonIntegrableSuspected",
    "Inconclusive",
    "NonConvex",
    "OutOfFamily",
    "SlopeOutOfRange",
    "FitUnstable",
    "RangeError",
    "OracleDisagreement",
    "ConfigError",
]
