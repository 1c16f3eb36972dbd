"""Exception types shared across the stabilizer layers."""

from __future__ import annotations

from typing import Mapping, Optional


class SdstabError(RuntimeError):
    """Base class for every library error."""


class DimensionError(SdstabError, ValueError):
    """Raised when vector or state dimensions disagree."""


class NumericsError(SdstabError):
    """Raised when a field evaluation produces non-finite values."""


class BlowupError(SdstabError):
    """Raised when an integrated state leaves the finite range."""

    def __init__(self, last_time: float, detail: str = "") -> None:
        self.last_time = last_time
        message = f"trajectory blew up after t={last_time:.6g}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class EmptyScheduleError(SdstabError, ValueError):
    """Raised when a control schedule has no duration to integrate."""


class CLFConditionViolated(SdstabError):
    """Raised when the Lie-bracket CLF implication fails at a state."""

    def __init__(self, point, witnesses: Mapping[str, float]) -> None:
        self.point = point
        self.witnesses = dict(witnesses)
        super().__init__(self._build_message(point, self.witnesses))

    @staticmethod
    def _build_message(point, witnesses: Mapping[str, float]) -> str:
        details = ", ".join(f"{key}={value:.6g}" for key, value in witnesses.items())
        return f"CLF implication fails at x={list(point)}: {details}"


class AuthorityTooSmall(SdstabError):
    """Raised when the input direction cannot move Φ at the state."""


class BracketTooSmall(SdstabError):
    """Raised when the bracket witness is too small to solve the maneuver."""


class NoDecreaseFound(SdstabError):
    """Raised when dwell halving never produced an acceptable interval."""

    def __init__(self, point, halvings: int, label: str = "") -> None:
        self.point = point
        self.halvings = halvings
        self.label = label
        suffix = f" ({label})" if label else ""
        super().__init__(
            f"no admissible dwell found at x={list(point)} after {halvings} halvings{suffix}"
        )


class ClassKViolation(SdstabError, ValueError):
    """Raised when a comparison function is not of class K on its probe grid."""


class ChainViolation(SdstabError):
    """Raised when interpolant strictness fails on the probe grid."""

    def __init__(self, index: int, s: float, values: Mapping[str, float]) -> None:
        self.index = index
        self.s = s
        self.values = dict(values)
        chain = " < ".join(f"{key}={value:.6g}" for key, value in values.items())
        super().__init__(f"gain chain not strict at s={s:.6g} (grid index {index}): {chain}")


class NoPrimitiveFound(SdstabError):
    """Raised when the motion-primitive search exhausts its candidates."""

    def __init__(self, point, regime: str, candidates_tried: int) -> None:
        self.point = point
        self.regime = regime
        self.candidates_tried = candidates_tried
        super().__init__(
            f"no motion primitive accepted at xi={list(point)} in regime {regime} "
            f"after {candidates_tried} candidate(s)"
        )


class ConfigParseError(SdstabError, ValueError):
    """Raised when a scenario document cannot be parsed."""

    def __init__(self, message: str, *, line: Optional[int] = None, column: Optional[int] = None,
                 field: Optional[str] = None) -> None:
        self.line = line
        self.column = column
        self.field = field
        location = []
        if line is not None:
            location.append(f"line {line}")
        if column is not None:
            location.append(f"column {column}")
        if field is not None:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class ConfigValidationError(SdstabError, ValueError):
    """Raised when a parsed scenario violates one of its invariants."""

    def __init__(self, field: str, reason: str) -> None:
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


__all__ = [
    "AuthorityTooSmall",
    "BlowupError",
    "BracketTooSmall",
    "CLFConditionViolated",
    "ChainViolation",
    "ClassKViolation",
    "ConfigParseError",
    "ConfigValidationError",
    "DimensionError",
    "EmptyScheduleError",
    "NoDecreaseFound",
    "NoPrimitiveFound",
    "NumericsError",
    "SdstabError",
]
