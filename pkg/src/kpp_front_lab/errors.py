from __future__ import annotations


class KppLabError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputs(KppLabError, ValueError):
    pass


class NonPositiveProfile(KppLabError, ValueError):
    pass


class PreconditionViolated(KppLabError, ValueError):
    pass


class ConfigError(KppLabError, ValueError):
    pass


class GridMisaligned(KppLabError, ValueError):
    pass


class NoConvergence(KppLabError, RuntimeError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"no convergence after {iterations} sweeps (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class UnstableBlowup(KppLabError, RuntimeError):
    pass


class DomainExhausted(KppLabError, RuntimeError):
    pass


class LevelNotReached(KppLabError, RuntimeError):
    pass
