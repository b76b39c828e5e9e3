"""Exception hierarchy for the moment toolkit.

Every error carries the CLI exit code it maps to:
    1  domain verdict is negative (no representing measure, no completion, ...)
    2  bad input or usage
    3  numerical failure
"""

from typing import Optional


class MomentKitError(Exception):
    """Base class for all toolkit errors."""
    exit_code = 2


class InputError(MomentKitError, ValueError):
    """Input does not satisfy an operation's preconditions."""
    exit_code = 2


class DomainVerdictError(MomentKitError):
    """The mathematical answer is negative."""
    exit_code = 1


class NumericalError(MomentKitError, ArithmeticError):
    """Floating-point computation could not deliver a trustworthy result."""
    exit_code = 3


# Input errors

class InsufficientMoments(InputError):
    def __init__(self, required: int, available: int, what: str = "moments"):
        self.required = required
        self.available = available
        super().__init__(f"Need at least {required} {what}, got {available}")


class MissingExactValues(InsufficientMoments):
    def __init__(self, required: int, available: int):
        super().__init__(required, available, what="exact rational entries")


class NonFiniteEntry(InputError):
    def __init__(self, index: int, value):
        self.index = index
        self.value = value
        super().__init__(f"Entry {index} is not a finite real: {value!r}")


class OrderTooLarge(InputError):
    def __init__(self, order: int, cap: int):
        self.order = order
        self.cap = cap
        super().__init__(f"Order {order} exceeds the enumeration cap {cap}")


class OddOffset(InputError):
    def __init__(self, offset: int):
        self.offset = offset
        super().__init__(f"Offset must be a nonnegative even integer, got {offset}")


class LengthMismatch(InputError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"Expected {expected} values, got {got}")


class TooFewEntries(InputError):
    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(f"Need at least {required} specified entries, got {available}")


class TrajectoryTooShort(InputError):
    def __init__(self, length: int, window: int):
        super().__init__(
            f"Trajectory of length {length} is shorter than window {window} (window must be >= 2)"
        )


class RealLambda(InputError):
    def __init__(self, value):
        super().__init__(f"Spectral parameter must be off the real axis, got {value}")


class UnknownBuiltin(InputError):
    def __init__(self, name: str, known):
        super().__init__(f"Unknown builtin sequence '{name}' (known: {', '.join(known)})")


class QOutOfRange(InputError):
    def __init__(self, q: float):
        super().__init__(f"q must lie in (0, 1), got {q}")


class AmbiguousMatch(InputError):
    def __init__(self, node: float, candidates):
        self.node = node
        self.candidates = tuple(candidates)
        super().__init__(f"Node {node} matches several reference nodes: {self.candidates}")


class MeasureMismatch(InputError):
    def __init__(self, max_error: float, tolerance: float):
        self.max_error = max_error
        super().__init__(
            f"Measure does not represent the sequence (max error {max_error:.3e} > {tolerance:.3e})"
        )


class InvalidMeasure(InputError):
    pass


# Domain verdicts

class NotPositive(DomainVerdictError):
    def __init__(self, report=None, message: str = "Sequence is not positive; no representing measure"):
        self.report = report
        super().__init__(message)


class SubsequenceNotPositive(DomainVerdictError):
    def __init__(self, report=None, message: str = "Specified subsequence is not positive"):
        self.report = report
        super().__init__(message)


class EvenStepNegativeNode(DomainVerdictError):
    def __init__(self, node: float):
        self.node = node
        super().__init__(f"Even step recovered a negative node {node}; no completion by root mapping")


class ZeroNodeWithOffset(DomainVerdictError):
    def __init__(self, offset: int):
        super().__init__(f"Recovered an atom at 0 while offset is {offset}; weight cannot be lifted")


class NonPositiveTrajectory(DomainVerdictError):
    def __init__(self, order: int, value: float):
        self.order = order
        self.value = value
        super().__init__(f"Smallest eigenvalue at order {order} is {value!r} <= 0; heuristic undefined")


# Numerical failures

class ConvergenceFailure(NumericalError):
    def __init__(self, detail: str, order: Optional[int] = None, iterations: Optional[int] = None):
        self.order = order
        self.iterations = iterations
        where = f" at order {order}" if order is not None else ""
        super().__init__(f"Eigensolver did not converge{where}: {detail}; retry in higher precision")


class MomentOverflow(NumericalError):
    def __init__(self, k_max: int):
        super().__init__(f"Moments up to index {k_max} overflow double precision")


class RankDeficient(NumericalError):
    def __init__(self, rank: int, requested: int):
        self.rank = rank
        self.requested = requested
        super().__init__(f"Hankel matrix has numerical rank {rank} < {requested}; retry with m = {rank}")
