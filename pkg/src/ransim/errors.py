"""Exception hierarchy shared by every simulator module."""


class RanSimError(Exception):
    """Base class for simulator errors."""


class InvalidSpec(RanSimError, ValueError):
    pass


class InvalidValue(InvalidSpec):
    """A configuration field holds a value outside its domain."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class UnknownKey(RanSimError, KeyError):
    def __init__(self, path):
        self.path = path
        super().__init__(path)

    def __str__(self):
        return f"unknown configuration key {self.path!r}"


class ParseError(RanSimError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnknownNode(RanSimError, KeyError):
    pass


class NoPath(RanSimError):
    pass


class OutOfValidity(RanSimError, ValueError):
    pass


class EmptyAllocation(RanSimError, ValueError):
    pass


class UnsupportedHost(RanSimError, ValueError):
    pass


class DoubleApply(RanSimError):
    pass


class CapacityViolation(RanSimError, AssertionError):
    pass


class NonFiniteReward(RanSimError, ValueError):
    pass


class ZeroRate(RanSimError, ValueError):
    pass


class AllZero(RanSimError, ValueError):
    pass


class IncomparableSpecs(RanSimError, ValueError):
    pass


class InvariantViolation(RanSimError, AssertionError):
    pass
