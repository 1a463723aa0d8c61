"""Exception hierarchy.

Two families matter to callers: :class:`DataError` (bad input data, graphs or
parameters) and :class:`DegenerateModelError` (a regression that cannot be
fitted meaningfully). The CLI maps them to distinct exit codes.
"""


class UcheckError(Exception):
    """Base class for every error raised by this package."""


class DataError(UcheckError):
    pass


class DegenerateModelError(UcheckError):
    pass


class UsageError(UcheckError):
    pass


# stats
class ZeroVariance(DataError):
    pass


class TooFewRows(DataError):
    pass


class UnknownVariable(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class BadRange(DataError, ValueError):
    pass


class CsvFormatError(DataError):
    pass


class RankDeficient(DegenerateModelError):
    pass


class ZeroResidualVariance(DegenerateModelError):
    pass


# graphs
class GraphError(DataError):
    pass


class CycleDetected(GraphError):
    pass


class UnknownNode(GraphError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class SelfLoop(GraphError):
    pass


class OverlappingSets(GraphError, ValueError):
    pass


class TooLarge(GraphError):
    pass


class LatentInAdjustmentSet(GraphError):
    pass


class GraphParseError(GraphError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class AssumptionViolated(GraphError):
    def __init__(self, violations):
        self.violations = list(violations)
        summary = "; ".join(f"{v.assumption}: {v.message}" for v in self.violations)
        super().__init__(f"assumption check failed ({summary})")


# test engine / simulation
class EmptyCandidateSet(DataError, ValueError):
    pass


class KeyMismatch(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DropNotSubset(DataError, ValueError):
    pass


class BadParameter(DataError, ValueError):
    pass


class MaxAttemptsExceeded(DataError):
    pass


class NegativeResidualVariance(BadParameter):
    pass
