"""Exception types shared across the package."""

from __future__ import annotations


class ShapeMismatchError(ValueError):
    """Binary tensor operation received operands of different shapes."""


class DivisionByZeroError(ArithmeticError):
    """Elementwise division hit x/0 with x != 0 (0/0 is defined as 0)."""


class AxisOutOfRangeError(IndexError):
    """Axis argument does not exist for the given tensor rank."""


class LengthMismatchError(ValueError):
    """Vector arguments do not have the expected lengths."""


class CoverError(ValueError):
    """Base class for invalid parameter covers."""


class EmptySetError(CoverError):
    def __init__(self, set_index: int):
        self.set_index = set_index
        super().__init__(f"cover set {set_index} is empty")


class UncoveredIndexError(CoverError):
    def __init__(self, index: int):
        self.index = index
        super().__init__(f"parameter index {index} is not covered by any set")


class IndexOutOfRangeError(CoverError):
    def __init__(self, index: int, d: int):
        self.index = index
        self.d = d
        super().__init__(f"cover contains index {index} outside [0, {d})")


class EmptyAxesError(CoverError):
    def __init__(self) -> None:
        super().__init__("axis cover needs at least one active axis")


class NonFiniteGradientError(ValueError):
    """Gradient passed to an optimizer step contains NaN or Inf."""


class InvalidScheduleError(ValueError):
    """Learning-rate schedule parameters are inconsistent."""


class InconsistentDimensionsError(ValueError):
    """Accumulator vectors passed together do not share a dimension."""


class ConfigError(ValueError):
    """Experiment configuration is invalid; message names the offending field."""


class InvariantViolationError(RuntimeError):
    """An audited run broke a monotonicity or sandwich invariant."""

    def __init__(self, message: str, step: int, index: int):
        self.step = step
        self.index = index
        super().__init__(f"{message} (step {step}, parameter index {index})")
