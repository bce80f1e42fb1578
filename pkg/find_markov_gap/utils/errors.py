"""Exception hierarchy shared by the library and the command-line driver."""


class MarkovGapError(Exception):
    """Base class for every error raised by find_markov_gap."""

    exit_code = 4


class ConfigError(MarkovGapError, ValueError):
    exit_code = 2


class CovarianceValidationError(MarkovGapError, ValueError):
    """Covariance matrix is malformed (shape, Hermiticity, purity flag)."""


class CorruptCovarianceError(MarkovGapError, ValueError):
    """Spectrum falls outside [-1e-6, 1 + 1e-6] before clamping."""


class MaskError(MarkovGapError, IndexError):
    exit_code = 3


class GeometryError(MarkovGapError, ValueError):
    exit_code = 3


class ModelError(MarkovGapError, ValueError):
    pass


class NumericError(MarkovGapError, ArithmeticError):
    pass


class OracleCapacityError(MarkovGapError, ValueError):
    pass


class GuardrailError(MarkovGapError):
    exit_code = 6


EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_NOT_CONVERGED = 5
