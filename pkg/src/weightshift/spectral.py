"""Spectral data derived from the weight parameters (t, k, q, lambda_K)."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, asdict
from enum import Enum

import numpy as np

from .errors import ParityError

INTEGER_TOL = 1e-9


class Degeneracy(str, Enum):
    NON_DEGENERATE = "NonDegenerate"
    DEGENERATE_NONLOG = "DegenerateNonLog"
    DEGENERATE_LOG = "DegenerateLog"


class PChoice(str, Enum):
    ROOT_Q = "Root_q"
    ROOT_TK2Q = "Root_tk2q"


class SingularPoint(str, Enum):
    ZERO = "Zero"
    ONE = "One"
    INFINITY = "Infinity"


@dataclass(frozen=True)
class WeightParameters:
    t: int
    k: int
    q: complex = 0j
    lambda_K: complex = 0.25 + 0j

    def __post_init__(self):
        for name in ("t", "k"):
            val = getattr(self, name)
            if int(val) != val:
                raise ValueError(f"{name} must be an integer")
            object.__setattr__(self, name, int(val))
        object.__setattr__(self, "q", complex(self.q))
        object.__setattr__(self, "lambda_K", complex(self.lambda_K))
        if (self.t - self.k) % 2:
            raise ParityError(f"t={self.t} and k={self.k} have different parity")

    @property
    def m(self) -> int:
        return (self.t - self.k) // 2

    @property
    def lambda_eff(self) -> complex:
        return self.lambda_K - (self.t / 2) * (1 - self.t / 2)

    def with_q(self, q) -> "WeightParameters":
        return WeightParameters(self.t, self.k, q, self.lambda_K)

    def with_lambda(self, lam) -> "WeightParameters":
        return WeightParameters(self.t, self.k, self.q, lam)


@dataclass(frozen=True)
class DerivedSpectralData:
    m: int
    lambda_K_eff: complex
    p: complex
    a: complex
    b: complex
    c_hde: complex
    alpha_f: float
    alpha_K: float
    degeneracy: Degeneracy
    p_choice: PChoice

    def as_json(self) -> dict:
        out = {}
        for key, val in asdict(self).items():
            if isinstance(val, complex):
                out[key] = val.real if val.imag == 0 else {"re": val.real, "im": val.imag}
            elif isinstance(val, Enum):
                out[key] = val.value
            else:
                out[key] = val
        return out


def _order_roots(r1: complex, r2: complex):
    # larger real part first, ties broken by larger imaginary part
    tie = abs(r1.real - r2.real) <= 1e-14 * max(1.0, abs(r1.real))
    if (tie and r2.imag > r1.imag) or (not tie and r2.real > r1.real):
        return r2, r1
    return r1, r2


def quadratic_roots(s: complex, prod: complex):
    """Roots of x^2 - s x + prod, ordered by real part (descending)."""
    disc = cmath.sqrt(s * s - 4 * prod)
    return _order_roots((s + disc) / 2, (s - disc) / 2)


def p_roots(params: WeightParameters):
    return params.q, (params.t + params.k) / 2 + params.q


def _is_int(x: complex, tol: float = INTEGER_TOL) -> bool:
    return abs(x.imag) < tol and abs(x.real - round(x.real)) < tol


def classify(a: complex, b: complex) -> Degeneracy:
    gap = a - b
    if not _is_int(gap):
        return Degeneracy.NON_DEGENERATE
    mgap = round(gap.real)
    b_nonpos_int = _is_int(b) and round(b.real) <= 0
    if mgap == 0 and b_nonpos_int:
        return Degeneracy.DEGENERATE_NONLOG
    if mgap >= 1 and b_nonpos_int and a.real > 0:
        return Degeneracy.DEGENERATE_NONLOG
    return Degeneracy.DEGENERATE_LOG


def derive(params: WeightParameters, p_choice: PChoice = PChoice.ROOT_Q) -> DerivedSpectralData:
    t, k, q = params.t, params.k, params.q
    lam_eff = params.lambda_eff
    p = p_roots(params)[0 if PChoice(p_choice) is PChoice.ROOT_Q else 1]
    c = 1 + (k - t) / 2
    s = 2 * p - t - 2 * q + 1
    prod = (p - q) * (1 + (k - t) / 2) + lam_eff
    a, b = quadratic_roots(s, prod)
    alpha_f = min((p - a).real, (p - b).real)
    alpha_K = -t / 2 - q.real + alpha_f
    return DerivedSpectralData(
        m=params.m, lambda_K_eff=complex(lam_eff), p=complex(p), a=complex(a), b=complex(b),
        c_hde=complex(c), alpha_f=float(alpha_f), alpha_K=float(alpha_K),
        degeneracy=classify(a, b), p_choice=PChoice(p_choice))


def candidate_alphas(params: WeightParameters, p_choice: PChoice = PChoice.ROOT_Q):
    """Kernel growth exponents attached to each exponent at infinity (subdominant first)."""
    d = derive(params, p_choice)
    base = -params.t / 2 - params.q.real
    return base + (d.p - d.a).real, base + (d.p - d.b).real


def indicial_exponents(params: WeightParameters, point) -> tuple:
    t, k, q = params.t, params.k, params.q
    point = SingularPoint(point)
    if point is SingularPoint.ZERO:
        return 0j, complex((t - k) / 2)
    if point is SingularPoint.ONE:
        return quadratic_roots((k + t + 4 * q) / 2, q * ((t + k) / 2 + q))[::-1]
    # f ~ z^{-r} at infinity
    return quadratic_roots(-(t + 2 * q - 1), params.lambda_eff - q * (1 - t - q))


def potential_Cf(z, params: WeightParameters):
    """Zero-order potential of the radial equation in the z coordinate."""
    t, k, q = params.t, params.k, params.q
    z = np.asarray(z, dtype=float)
    out = q * (-(1 - t - q) * z + (1 - t / 2 + k / 2)) / (1 - z)
    return out if out.ndim else complex(out)


def potential_Cf_x(x, params: WeightParameters):
    """Same potential in the x = -4z coordinate."""
    t, k, q = params.t, params.k, params.q
    x = np.asarray(x, dtype=float)
    out = q * ((1 - t - q) * x + 2 * (2 - t + k)) / (x + 4)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class ConvergenceReport:
    alpha_K: float
    input_growth_C: float
    periodized: bool
    automorphic: bool
    operator: bool
    local_abs_conv: bool
    pv_required: bool

    def as_json(self) -> dict:
        return asdict(self)


def convergence_report(params: WeightParameters, input_growth_C: float = 0.0,
                       data: DerivedSpectralData | None = None) -> ConvergenceReport:
    data = data or derive(params)
    aK = data.alpha_K
    gap = abs(params.t - params.k)
    return ConvergenceReport(
        alpha_K=aK,
        input_growth_C=float(input_growth_C),
        periodized=2 * aK < -1,
        automorphic=aK < -1,
        operator=aK < min(-1.0, -float(input_growth_C)),
        local_abs_conv=gap < 4,
        # |K| ~ r^{-|m|} at the diagonal: absolutely integrable only for |m| < 2
        pv_required=gap >= 4,
    )
