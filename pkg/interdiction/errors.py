"""Exception hierarchy for the interdiction solvers.

Every error carries a machine-readable ``code``; the CLI prints it and maps
``InfeasibleError`` to exit status 2, everything else to 1.
"""

from typing import Any, List, Optional, Sequence


class InterdictionError(Exception):
    """Base class for all solver and document errors."""

    code = "ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"code": self.code, "message": self.message}


class SchemaError(InterdictionError):
    """Document is malformed or does not match its schema."""

    code = "SCHEMA"

    def __init__(self, message: str, path: Optional[str] = None):
        if path:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path


class ValidationFailed(InterdictionError):
    """Instance parsed but violates one or more semantic invariants."""

    code = "INVALID_INSTANCE"

    def __init__(self, violations: Sequence[Any]):
        self.violations = list(violations)
        summary = "; ".join(f"{v.code}: {v.message}" for v in self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            summary += f" (+{more} more)"
        super().__init__(summary)


class TopologyError(InterdictionError):
    code = "TOPOLOGY_MISMATCH"


class InfeasibleError(InterdictionError):
    code = "INFEASIBLE"


class NonAbsorbingError(InterdictionError):
    """The chain can loop forever without reaching the target or a sensor."""

    code = "NONABSORBING"

    def __init__(self, recurrent_class: List[int], evader_index: Optional[int] = None):
        self.recurrent_class = sorted(recurrent_class)
        self.evader_index = evader_index
        who = f"evader {evader_index}" if evader_index is not None else "evader"
        super().__init__(
            f"{who} is trapped in recurrent class {self.recurrent_class} "
            "that reaches neither the target nor a sensor"
        )


class GuardExceededError(InterdictionError):
    code = "GUARD_EXCEEDED"


class NotConvexError(InterdictionError):
    code = "NOT_CONVEX"


class NondeterministicEvaderError(InterdictionError):
    code = "NONDETERMINISTIC"


class UnknownNodeError(InterdictionError):
    code = "UNKNOWN_NODE"


class DigestMismatchError(InterdictionError):
    code = "DIGEST_MISMATCH"


class NumericalError(InterdictionError):
    code = "NUMERICAL"


class ProblemMismatchError(InterdictionError):
    """Algorithm solves the other problem kind (FI vs BI)."""

    code = "PROBLEM_MISMATCH"


class UnknownAlgorithmError(InterdictionError):
    code = "UNKNOWN_ALGORITHM"
