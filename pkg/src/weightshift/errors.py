"""Exception types shared across the package."""


class WeightShiftError(Exception):
    pass


class ParityError(WeightShiftError, ValueError):
    """t and k have different parity."""


class DiagonalError(WeightShiftError, ValueError):
    """Evaluation requested on (or too close to) the diagonal singularity."""


class ConvergenceRefused(WeightShiftError):
    """A series or integral would not converge absolutely for these parameters."""


class NonConvergence(WeightShiftError, RuntimeError):
    """A numerical procedure failed to reach its tolerance."""


class EquivalentPoints(ConvergenceRefused):
    """The two arguments of the automorphic kernel lie in one orbit."""
