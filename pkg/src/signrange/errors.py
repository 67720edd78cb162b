"""Exception types shared across modules."""

from __future__ import annotations


class InsufficientMassError(ValueError):
    """A finite window lacks the mass a construction needs.

    ``level`` identifies the block level when block selection fails;
    ``shortfall`` quantifies how much mass is missing.
    """

    def __init__(self, message: str, level: int | None = None, shortfall: float | None = None):
        super().__init__(message)
        self.level = level
        self.shortfall = shortfall


class BracketViolationError(ValueError):
    """A constructed quantity fell outside its guaranteed bracket."""

    def __init__(self, message: str, level: int | None = None, inequality: str | None = None):
        super().__init__(message)
        self.level = level
        self.inequality = inequality


class TargetEscapeError(ValueError):
    """Greedy descent lost the target: no level image contains the pullback."""

    def __init__(self, message: str, level: int | None = None):
        super().__init__(message)
        self.level = level
