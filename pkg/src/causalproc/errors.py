"""Exception types and diagnostic records shared across the package."""

import dataclasses


@dataclasses.dataclass(frozen=True)
class Violation:
    """One broken rule, with enough context to locate it."""

    rule: str
    location: str
    message: str


class CausalProcError(Exception):
    """Base class for all package errors."""


class ModelFormatError(CausalProcError, ValueError):
    """Model document is malformed (missing keys, wrong types, duplicate ids)."""


class StructureError(CausalProcError, ValueError):
    """Graph structure violates a model rule other than typing/acyclicity
    (bad root process, orphan events, references to unknown events)."""


class CycleError(CausalProcError, ValueError):
    """The edge set contains a directed cycle.

    ``cycle`` holds one offending node sequence, closed (first == last).
    """

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle: " + " -> ".join(self.cycle))


class BipartiteViolation(CausalProcError, ValueError):
    """An edge connects the wrong kinds of events."""

    def __init__(self, edge, message):
        self.edge = tuple(edge)
        super().__init__(message)


class TableDomainError(CausalProcError, ValueError):
    """A probability table is missing a subset key or has an extra one."""


class NormalizationError(CausalProcError, ValueError):
    """A cause-side table does not sum to one."""


class RangeError(CausalProcError, ValueError):
    """A probability lies outside [0, 1]."""


class UnknownCause(CausalProcError, KeyError):
    """An occurred-cause set mentions an event with no base probability."""


class InvalidSpec(CausalProcError, ValueError):
    """A compressed table spec violates its validity constraints.

    ``violations`` holds the individual violation records.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        msgs = "; ".join(v.message for v in self.violations)
        super().__init__(msgs or "invalid spec")


class NotSimple(CausalProcError, ValueError):
    """Operation requires a simple event."""


class NotParent(CausalProcError, ValueError):
    """A named cause is not a direct cause of the target event."""


class ShapeError(CausalProcError, ValueError):
    """Tables do not match the expected two-cause, two-effect topology."""


class ModelTooLarge(CausalProcError, RuntimeError):
    """Exact computation would exceed the configured size cap."""


class ZeroEvidence(CausalProcError, ValueError):
    """The conditioning evidence has probability zero."""


class NoAcceptedSamples(CausalProcError, RuntimeError):
    """Rejection sampling kept no sample consistent with the evidence."""


class NetImportError(CausalProcError, ValueError):
    """A discrete net cannot be converted (non-binary variables, bad tables)."""


class IllegalOrder(CausalProcError, ValueError):
    """An elicitation sequence is not a legal ordering of the subset lattice."""


class OutOfRange(CausalProcError, ValueError):
    """A committed value falls outside the legal range.

    ``lo``/``hi`` carry the range that was violated.
    """

    def __init__(self, value, lo, hi):
        self.value = value
        self.lo = lo
        self.hi = hi
        super().__init__(f"value {value} outside legal range [{lo}, {hi}]")


class SingletonDefault(CausalProcError, ValueError):
    """Single-event marginals must be given explicitly, never defaulted."""


class UndefinedConditional(CausalProcError, ValueError):
    """A conditional form references an uncommitted or zero-probability event."""


class SessionStateError(CausalProcError, RuntimeError):
    """An elicitation session operation was applied in the wrong state."""


class Incoherent(CausalProcError, RuntimeError):
    """Committed constraints admit no distribution (unreachable when ranges
    are enforced on every commit)."""


class NonConvergence(CausalProcError, RuntimeError):
    """Iterative fitting failed to reach the residual target.

    ``residual`` is the final worst-case constraint violation.
    """

    def __init__(self, residual, iterations):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"residual {residual:.3e} after {iterations} iterations"
        )
