"""Error types shared across the package.

Every error carries a stable machine-readable ``code`` so the HTTP service
and the CLI can translate failures uniformly.
"""

from __future__ import annotations


class XplainError(Exception):
    """Base class; ``code`` is the wire-level error identifier."""

    code: str = "Internal"

    def __init__(self, message: str = "", **details: object) -> None:
        super().__init__(message or self.code)
        self.message = message or self.code
        self.details = details


# map parsing / validation
class RaggedRowsError(XplainError):
    code = "RaggedRows"


class UnknownCellError(XplainError):
    code = "UnknownCell"


class MissingStartError(XplainError):
    code = "MissingStart"


class MissingDestinationError(XplainError):
    code = "MissingDestination"


class DuplicateStartError(XplainError):
    code = "DuplicateStart"


class DuplicateDestinationError(XplainError):
    code = "DuplicateDestination"


class UnreachableDestinationError(XplainError):
    code = "UnreachableDestination"


class EmptyMapError(XplainError):
    code = "EmptyMap"


# MDP construction / planning
class InvalidProbabilityError(XplainError):
    code = "InvalidProbability"


class NoValidActionError(XplainError):
    code = "NoValidAction"


class RouteCycleError(XplainError):
    code = "RouteCycle"


# explanation selection
class EmptySelectionError(XplainError):
    code = "EmptySelection"


class SegmentNotOnRouteError(XplainError):
    code = "SegmentNotOnRoute"


# dialogue state machine
class WrongStateError(XplainError):
    code = "WrongState"


class NotInExplanationError(XplainError):
    code = "NotInExplanation"


class PreferenceInvalidError(XplainError):
    """Raised when a preference fails validation; carries the violation list."""

    code = "PreferenceInvalid"

    def __init__(self, violations) -> None:
        super().__init__(
            "; ".join(v.message for v in violations),
            violations=[v.as_dict() for v in violations],
        )
        self.violations = list(violations)


class EventLimitExceededError(XplainError):
    code = "EventLimitExceeded"
