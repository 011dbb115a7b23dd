class Unsupported(ValueError):
    """Quantity is undefined for the requested dimension (e.g. surface area at n=1)."""


class DomainError(ValueError):
    """Argument outside the positive orthant."""


class AllDegenerate(ValueError):
    """No usable (strictly positive) samples."""


class NoConvergence(RuntimeError):
    def __init__(self, message, last=None):
        super().__init__(message)
        self.last = last


class Censored(RuntimeError):
    """A simulated passage did not happen before the horizon."""

    def __init__(self, horizon: float):
        super().__init__(f"no passage before horizon {horizon:g}")
        self.horizon = horizon
