"""Exception hierarchy.

Every error carries the process exit code used by the command line front end:
2 for invalid input, 3 for numerical failures, 4 for I/O problems.
"""


class QWError(Exception):
    exit_code = 1


class ValidationError(QWError, ValueError):
    exit_code = 2


class NumericalError(QWError, ArithmeticError):
    exit_code = 3


class CoinIOError(QWError, OSError):
    exit_code = 4


# -- input / precondition failures ------------------------------------------
class EmptyWindow(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class ModulusMismatch(ValidationError):
    pass


class BetaZero(ValidationError):
    pass


class WindowMismatch(ValidationError):
    pass


class WindowTooSmall(ValidationError):
    pass


class BranchCut(ValidationError):
    pass


class StripViolation(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class SizeError(ValidationError):
    pass


class BoundaryLeak(ValidationError):
    pass


class ParseError(ValidationError):
    pass


# -- numerical failures -----------------------------------------------------
class NonConvergence(NumericalError):
    pass


class Degenerate(NumericalError):
    pass


class NearSingular(NumericalError):
    pass


class GrowthOverflow(NumericalError):
    pass


class ZeroWronskian(NumericalError):
    pass


class DiagonalizationFailure(NumericalError):
    pass
