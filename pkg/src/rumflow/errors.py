"""Exception types raised across the package.

Every error derives from ``RumflowError`` so callers (the CLI in particular)
can map the whole family onto a single exit code.
"""


class RumflowError(ValueError):
    """Base class for all domain errors."""


# instance construction
class InvalidInstance(RumflowError):
    pass


class UnknownAlternative(RumflowError):
    pass


class EmptyMenu(RumflowError):
    pass


class NotUpperSet(RumflowError):
    def __init__(self, message, missing=None):
        super().__init__(message)
        self.missing = missing


# dataset validation
class ParseError(RumflowError):
    pass


class SumNotOne(RumflowError):
    pass


class SumExceedsOne(RumflowError):
    pass


class MissingPair(RumflowError):
    pass


class ExtraPair(RumflowError):
    pass


class NegativeFrequency(RumflowError):
    pass


# polynomials and flows
class UncomputablePair(RumflowError):
    pass


class NegativeProbability(RumflowError):
    pass


class ConservationViolated(RumflowError):
    pass


class InconsistentBounds(RumflowError):
    pass


class NegativeArc(RumflowError):
    pass


class NotUnitFlow(RumflowError):
    pass


# enumeration guards and targets
class GroundTooLarge(RumflowError):
    pass


class InstanceTooLarge(RumflowError):
    pass


class NotEssential(RumflowError):
    pass


class MenusNotFull(RumflowError):
    pass


class PairNotEligible(RumflowError):
    pass


# bounds
class PairObservable(RumflowError):
    pass


class MenuOutsideRemarkScope(RumflowError):
    pass


class NotRationalizable(RumflowError):
    pass


# solver
class MalformedProgram(RumflowError):
    pass


# oracle / mr
class NoObservableData(RumflowError):
    pass


class PairNotObservable(RumflowError):
    pass
