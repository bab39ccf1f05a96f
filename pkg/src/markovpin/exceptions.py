"""Exception types raised by markovpin."""


class ModelError(ValueError):
    """Structural precondition of a kernel, chain or path violated."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge or to bracket a root."""


class TailBoundError(ConvergenceError):
    """The neglected mass of a truncated series exceeds tolerance."""


class CapExceededError(ValueError):
    """A system size exceeds the configured computational cap."""


class BudgetExceededError(ValueError):
    """A brute-force enumeration exceeds its budget."""
