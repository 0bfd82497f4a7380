"""Exception types shared across the library.

The distinction that matters downstream: ``PoisonedStateError`` means a run
has produced non-finite numbers and must stop (the harness records it as a
divergence), while the ``ValueError`` subclasses indicate the caller broke a
documented contract.
"""


class ContractViolationError(ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(ValueError):
    """Input is structurally valid but numerically degenerate (e.g. rank-deficient)."""


class NumericalFailureError(RuntimeError):
    """An iterative kernel failed to converge or blew up."""


class PoisonedStateError(RuntimeError):
    """A gradient, update, or state buffer went non-finite; the run must abort."""


class UnsupportedEstimatorError(ValueError):
    """The problem does not expose what the estimator needs (e.g. categorical output)."""


class ConfigurationError(ValueError):
    """A run configuration is malformed or internally inconsistent."""
