"""Exception types shared across the package."""


class TopologyError(ValueError):
    """Edge specification references unknown nodes or is malformed."""


class UnknownNodeError(ValueError):
    """Node id not present in the graph."""


class ConstraintError(ValueError):
    """Constraint references a missing node or violates its own invariants."""


class InfeasibleInitError(ValueError):
    """Requested grid initialization cannot satisfy the separation distance."""


class DivergenceError(RuntimeError):
    """Projection produced a non-finite energy.

    Carries the partial trace accumulated before the blow-up in ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
