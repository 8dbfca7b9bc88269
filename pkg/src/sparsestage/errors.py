"""Exception hierarchy.

Validation problems derive from ``ValidationError`` (also a ``ValueError``);
numerical breakdowns derive from ``NumericFailureError`` (also an
``ArithmeticError``).  The CLI maps the two families to exit codes 1 and 2.
"""


class SparseStageError(Exception):
    """Base class for all package errors."""


class ValidationError(SparseStageError, ValueError):
    """Inputs violate a documented precondition."""


class InvalidDimensionError(ValidationError):
    pass


class InvalidSparsityError(ValidationError):
    pass


class InvalidWeightError(ValidationError):
    pass


class InvalidSpectrumError(ValidationError):
    pass


class DomainError(ValidationError):
    """A formula was evaluated outside its mathematical domain."""


class ConditionViolatedError(DomainError):
    pass


class BudgetExceededError(ValidationError):
    pass


class NumericFailureError(SparseStageError, ArithmeticError):
    """NaN/Inf or an otherwise unusable numerical state."""


class DegenerateColumnError(NumericFailureError):
    pass


class SingularSystemError(NumericFailureError):
    pass


class ReplicationError(SparseStageError):
    """A Monte-Carlo replication failed; carries the cell coordinates."""

    def __init__(self, tau, mu, rep_index, cause):
        self.tau = tau
        self.mu = mu
        self.rep_index = rep_index
        self.cause = cause
        super().__init__(
            f"replication {rep_index} failed at tau={tau}, mu={mu}: "
            f"{type(cause).__name__}: {cause}"
        )

    def __reduce__(self):
        return (type(self), (self.tau, self.mu, self.rep_index, self.cause))


class GridError(SparseStageError):
    """One or more replications of a grid run failed."""

    def __init__(self, failures):
        self.failures = list(failures)
        cells = sorted({(f.mu, f.tau) for f in self.failures})
        lines = [f"{len(self.failures)} replication(s) failed in {len(cells)} cell(s):"]
        lines += [f"  mu={mu} tau={tau}" for mu, tau in cells]
        lines += [f"  first error: {self.failures[0]}"] if self.failures else []
        super().__init__("\n".join(lines))
