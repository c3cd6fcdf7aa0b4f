"""Exception types.

Every error carries a short ``code`` string. The harness writes that code into
the per-trial CSV rows so failed trials stay visible in the results.
"""


class MDMPError(Exception):
    code = "Error"


class DimMismatchError(MDMPError, ValueError):
    code = "DimMismatch"


class NonFiniteError(MDMPError, ValueError):
    code = "NonFinite"


class FormatError(MDMPError, ValueError):
    code = "FormatError"


class EmptyPathsError(MDMPError, ValueError):
    code = "EmptyPaths"


class ZeroSignalError(MDMPError, ValueError):
    code = "ZeroSignal"


class InfeasiblePencilError(MDMPError, ValueError):
    code = "InfeasiblePencil"


class AllZeroError(MDMPError, ValueError):
    code = "AllZero"


class RankDeficientError(MDMPError, ArithmeticError):
    code = "RankDeficient"


class ComplexEigenvaluesError(MDMPError, ArithmeticError):
    code = "ComplexEigenvalues"


class DomainError(MDMPError, ValueError):
    code = "DomainError"


class PathCountMismatchError(MDMPError):
    code = "PathCountMismatch"


class AmbiguousPairingError(MDMPError):
    code = "AmbiguousPairing"


class WindowViolationError(MDMPError, ValueError):
    code = "WindowViolation"


class ConstraintViolationError(MDMPError, ValueError):
    code = "ConstraintViolation"


class ZeroTruthError(MDMPError, ValueError):
    code = "ZeroTruth"


class PreconditionError(MDMPError, ValueError):
    code = "Precondition"


class ConfigError(MDMPError, ValueError):
    code = "ConfigError"
