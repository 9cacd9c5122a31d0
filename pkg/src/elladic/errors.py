"""Exception hierarchy.

Every error carries the CLI exit code it maps to: 2 for bad input,
3 for precision exhaustion, 4 for a mathematical failure.
"""


class ElladicError(Exception):
    exit_code = 4

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details

    def to_json(self):
        out = {"error": type(self).__name__, "message": str(self)}
        for key, value in self.details.items():
            out[key] = value if isinstance(value, (int, str, list, dict)) else str(value)
        return out


class ValidationError(ElladicError):
    exit_code = 2


class PrecisionExhausted(ElladicError):
    exit_code = 3


class MathematicalFailure(ElladicError):
    exit_code = 4


# input problems
class VarMismatch(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class BadExponent(ValidationError):
    pass


class NotContracting(ValidationError):
    pass


class DegreeTooHigh(ValidationError):
    pass


class OutsideRegion(ValidationError):
    pass


class CertificateMismatch(ValidationError):
    pass


class NotACycle(ValidationError):
    pass


class NotACocycle(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class DepthZero(ValidationError):
    pass


class NotInK1(ValidationError):
    pass


class DeterminantMismatch(ValidationError):
    pass


class NotCompatible(ValidationError):
    pass


# precision
class Inconclusive(PrecisionExhausted):
    pass


class BudgetExceeded(PrecisionExhausted):
    pass


# mathematical failures
class NonUnit(MathematicalFailure):
    pass


class NoRoot(MathematicalFailure):
    pass


class CongruenceTooWeak(MathematicalFailure):
    pass


class NormViolation(MathematicalFailure):
    pass


class NotClosed(MathematicalFailure):
    pass


class NoSolution(MathematicalFailure):
    pass


class NotABoundary(NoSolution):
    pass


class Degenerate(MathematicalFailure):
    pass


class NoIntertwiner(MathematicalFailure):
    pass


class NonInvertibleOnly(MathematicalFailure):
    pass
