class GuardError(ValueError):
    """Problem size exceeds the configured limit of an exhaustive routine."""


class InfeasibleError(RuntimeError):
    """Requests cannot be packed into the boxes available to them."""


class LocalityError(ValueError):
    """Characteristic function is not locally collaborative on the given graph."""
