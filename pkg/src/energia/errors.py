"""Exception hierarchy shared by all energia modules."""


class EnergiaError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedForm(EnergiaError, ValueError):
    """Integrand is outside the two-parameter class ``t**a * log(t)**b``."""


class NonIntegrableSuspected(EnergiaError):
    """Tail panels failed the Cauchy criterion within the panel budget."""


class Inconclusive(EnergiaError):
    """An empirical detector could not reach a verdict within its budget."""


class NonConvex(EnergiaError, ValueError):
    """A sampled function violates convexity or monotonicity requirements."""


class OutOfFamily(EnergiaError, ValueError):
    """A derived parameter leaves the admissible family."""


class SlopeOutOfRange(EnergiaError, ValueError):
    """A requested slope lies where the conjugate is identically +inf."""


class FitUnstable(EnergiaError):
    """An endpoint power-law fit was too poor to support a verdict."""


class RangeError(EnergiaError, ValueError):
    """A parameter lies outside the range where a formula applies."""


class OracleDisagreement(EnergiaError):
    """Symbolic and numeric routes disagree; treated as a hard failure."""


class ConfigError(EnergiaError, ValueError):
    """Configuration file could not be parsed."""
