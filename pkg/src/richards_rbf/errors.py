"""Exception hierarchy shared by all modules."""


class RichardsError(Exception):
    """Base class for every error raised by the package."""


class ConfigurationError(RichardsError, ValueError):
    """Invalid parameters, grid sizes or configuration keys."""


class DomainError(RichardsError, ValueError):
    """Input outside the mathematical domain of a function."""


class IllConditionedStencil(RichardsError):
    """A local interpolation matrix is singular to working precision."""

    def __init__(self, center, condition):
        self.center = center
        self.condition = condition
        super().__init__(
            f"stencil centred at node {center} is ill-conditioned "
            f"(condition estimate {condition:.3e})"
        )


class StateError(RichardsError):
    """A field value makes the linearisation coefficients non-finite."""

    def __init__(self, node, message):
        self.node = node
        super().__init__(f"node {node}: {message}")


class SolverError(RichardsError):
    """The sparse solve failed or violated its residual contract."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class NonConvergenceError(RichardsError):
    """Picard iteration exhausted its budget without meeting the tolerance."""

    def __init__(self, message, deltas=()):
        self.deltas = list(deltas)
        super().__init__(message)


class OracleError(RichardsError):
    """The finite-difference reference solver failed to converge."""


class UnsupportedError(RichardsError):
    """Operation not available for the given input (e.g. non-grid nodes)."""
