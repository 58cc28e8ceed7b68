"""Exception hierarchy shared by all branchwalk modules."""


class BranchwalkError(Exception):
    """Base class for every error raised by this package."""


class GraphValidationError(BranchwalkError, ValueError):
    pass


class DuplicateNode(GraphValidationError):
    pass


class UnknownEndpoint(GraphValidationError):
    pass


class DuplicateEdge(GraphValidationError):
    pass


class SelfLoopAsEdge(GraphValidationError):
    pass


class HasDiagonal(BranchwalkError, ValueError):
    pass


class ParseError(BranchwalkError, ValueError):
    """Malformed graph or decomposition document.

    ``location`` is a JSON-pointer-like path to the offending field.
    """

    def __init__(self, message, location=""):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class UnknownNode(BranchwalkError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown node"


class PatternMismatch(BranchwalkError, ValueError):
    pass


class DegenerateAmplitudes(BranchwalkError, ValueError):
    pass


class ConditionViolated(BranchwalkError, ValueError):
    """An equivalence or splitting condition failed.

    ``lhs`` and ``rhs`` hold the two compared quantities (ratios or
    residuals) so callers can report both.
    """

    def __init__(self, message, lhs=None, rhs=None):
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(message)


class DivisionByZeroOperand(BranchwalkError, ZeroDivisionError):
    def __init__(self, operand):
        self.operand = operand
        super().__init__(f"denominator amplitude {operand!r} is zero")


class ChoiceOutOfRange(BranchwalkError, ValueError):
    pass


class StartNotNormalized(BranchwalkError, ValueError):
    pass


class StartNotInSpace(BranchwalkError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "start not in space"


class DimensionMismatch(BranchwalkError, ValueError):
    pass


class MagnitudeConditionViolated(ConditionViolated):
    pass


class InequalityViolated(ConditionViolated):
    pass


class ParityMismatch(BranchwalkError, ValueError):
    pass
