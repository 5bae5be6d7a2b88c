"""Exception types shared by all entflow modules.

Every error belongs to one of three families, which the command line maps
to exit codes: bad input (2), a violated precondition (3) and numerical
failure (4).
"""


class EntflowError(Exception):
    exit_code = 1


class InvalidInput(EntflowError, ValueError):
    exit_code = 2


class PreconditionFailed(EntflowError):
    exit_code = 3


class NumericalFailure(EntflowError, ArithmeticError):
    exit_code = 4


# bad input
class NotHermitian(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class EmptyInput(InvalidInput):
    pass


class IndexOutOfRange(InvalidInput, IndexError):
    pass


class DegenerateInput(InvalidInput):
    pass


class InvalidSegments(InvalidInput):
    pass


class InvariantViolation(InvalidInput):
    pass


class NotPositiveDefinite(InvariantViolation):
    pass


class RankDeficientFrame(InvalidInput):
    pass


# violated preconditions
class TrivialEndpoint(PreconditionFailed):
    pass


class ProbabilityOutOfRange(PreconditionFailed):
    pass


class DeterministicCase(PreconditionFailed):
    pass


class CompletenessViolation(PreconditionFailed):
    pass


class ScheduleNotMonotone(PreconditionFailed):
    pass


class NonDifferentiablePoint(PreconditionFailed):
    pass


class NotApplicable(PreconditionFailed):
    pass


class EmptyRegion(PreconditionFailed):
    pass


class ResolutionTooCoarse(PreconditionFailed):
    pass


class NotLocal(PreconditionFailed):
    pass


# numerical failures
class NonIntegrableHazard(NumericalFailure):
    pass


class ConvergenceError(NumericalFailure):
    pass
