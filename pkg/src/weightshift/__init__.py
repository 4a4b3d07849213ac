"""Weight-shifting integral kernels on the modular surface."""

from .errors import (ConvergenceRefused, DiagonalError, EquivalentPoints, NonConvergence, ParityError,
                     WeightShiftError)
from .halfplane import HPoint, ModularMatrix, S, T
from .kernel import KernelInstance, TruncationPolicy, automorphic_kernel, periodized_K0
from .spectral import WeightParameters, convergence_report, derive

__version__ = "0.1.0"
