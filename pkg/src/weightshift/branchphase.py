"""Principal-branch powers, branch phase factors and the covariant factor P.

All complex powers use Arg in (-pi, pi] with the negative real axis sent to +pi,
independently of what the host ``atan2`` returns for signed zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DiagonalError
from .halfplane import HPoint, ModularMatrix, mobius_apply, automorphy_factor


def principal_arg(z):
    z = np.asarray(z, dtype=complex)
    arg = np.arctan2(z.imag, z.real)
    # atan2(-0.0, x<0) gives -pi; the convention here is +pi on the whole negative axis
    arg = np.where((z.imag == 0) & (z.real < 0), np.pi, arg)
    return arg if arg.ndim else float(arg)


def principal_log(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise ZeroDivisionError("logarithm of zero")
    return np.log(np.abs(z)) + 1j * principal_arg(z)


def principal_power(base, exponent):
    """exp(exponent * Log(base)) with the (-pi, pi] branch."""
    base = np.asarray(base, dtype=complex)
    if np.any(base == 0):
        raise ZeroDivisionError("principal power of zero base")
    if exponent == 0:
        out = np.ones(base.shape, dtype=complex)
        return out if out.ndim else complex(out)
    out = np.exp(exponent * principal_log(base))
    return out if np.ndim(out) else complex(out)


@dataclass(frozen=True)
class CovariantInputs:
    t: int
    k: int
    q: complex = 0j

    @property
    def m(self) -> float:
        return (self.t - self.k) / 2


@dataclass(frozen=True)
class PhaseIntegers:
    n_g: int
    n_mult: int
    n_d: int


def _branch_integer(lhs_arg: float, rhs_arg: float) -> int:
    n = round((lhs_arg - rhs_arg) / (2 * math.pi))
    if abs(lhs_arg - rhs_arg - 2 * math.pi * n) > 1e-9:
        raise ArithmeticError("branch integer relation violated")
    return int(n)


def phase_factors(g: ModularMatrix, t1: HPoint, t2: HPoint, t: int, k: int):
    """Return (eps_conj, eps_mult, eps_d, PhaseIntegers) for the transformation of P."""
    z1, z2c = t1.tau, t2.tau
    if z1 == z2c:
        raise DiagonalError("phase factors are undefined on the diagonal")
    c, d = g.c, g.d
    A = c * z2c + d
    Abar = c * z2c.conjugate() + d
    Bt = c * z1 + d
    n_g = math.floor((principal_arg(Bt) + principal_arg(c * z1.conjugate() + d) + math.pi) / (2 * math.pi))
    w1 = (z2c.conjugate() - z1) / (z2c - z1)
    w2 = A / Abar
    n_mult = _branch_integer(principal_arg(w1 * w2), principal_arg(w1) + principal_arg(w2))
    n_d = _branch_integer(principal_arg(A / Abar), principal_arg(A) - principal_arg(Abar))
    # each factor is exp(i pi n (t +- k)) with integer n, i.e. exactly +-1
    eps_conj = complex((-1) ** ((n_g * (t + k)) % 2))
    eps_mult = complex((-1) ** ((n_mult * (t - k)) % 2))
    eps_d = complex((-1) ** ((n_d * (t - k)) % 2))
    return eps_conj, eps_mult, eps_d, PhaseIntegers(n_g, n_mult, n_d)


def total_phase(g, t1, t2, t, k) -> complex:
    ec, em, ed, _ = phase_factors(g, t1, t2, t, k)
    return ec * em * ed


def covariant_P_array(z1, z2, t: int, k: int, q: complex = 0j, form: str = "compact"):
    """P on complex arrays. ``form`` is 'compact' (default) or 'factored'."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    v1, v2 = z1.imag, z2.imag
    m2 = t - k  # twice the diagonal exponent
    diff = z2 - z1
    if t == 0 and k == 0 and q == 0:
        return np.ones(np.broadcast(z1, z2).shape, dtype=complex)
    if m2 > 0 and np.any(diff == 0):
        raise DiagonalError("P has a pole on the diagonal when t > k")
    w1 = (np.conj(z2) - z1) / np.where(diff == 0, 1.0, diff)
    if m2 % 2 == 0:
        shift = w1 ** (m2 // 2) if m2 >= 0 else 1.0 / w1 ** (-m2 // 2)
    else:
        shift = principal_power(w1, m2 / 2)
    shift = np.where(diff == 0, 0.0, shift) if m2 < 0 else shift
    base = 2j / (z1 - np.conj(z2))
    if form == "compact":
        out = (principal_power(v1 * v2 + 0j, t / 2 + q) * principal_power(base, t + q)
               * principal_power(-2j / (np.conj(z1) - z2), q) * shift)
    elif form == "factored":
        pw = principal_power(v1 * v2 + 0j, t / 2) * base ** int(t) * shift
        pq = principal_power(4 * v1 * v2 / np.abs(z1 - np.conj(z2)) ** 2 + 0j, q)
        out = pw * pq
    else:
        raise ValueError(f"unknown form {form!r}")
    return out


def covariant_P(t1: HPoint, t2: HPoint, inputs: CovariantInputs, form: str = "compact") -> complex:
    return complex(covariant_P_array(t1.tau, t2.tau, inputs.t, inputs.k, inputs.q, form))


def covariance_residual(g: ModularMatrix, t1: HPoint, t2: HPoint, inputs: CovariantInputs,
                        form: str = "compact") -> float:
    """Relative residual of P(g t1, g t2) = E_total j_t j_k^{-1} P(t1, t2)."""
    lhs = covariant_P(mobius_apply(g, t1), mobius_apply(g, t2), inputs, form)
    rhs = (total_phase(g, t1, t2, inputs.t, inputs.k) * automorphy_factor(inputs.t, g, t1)
           / automorphy_factor(inputs.k, g, t2) * covariant_P(t1, t2, inputs, form))
    return abs(lhs - rhs) / max(abs(rhs), 1e-300)


def _check_offdiag(z1, z2):
    if np.any(np.asarray(z1) == np.asarray(z2)):
        raise DiagonalError("log-derivatives of P are singular on the diagonal")


def logderiv_P_array(z1, z2, t, k, q=0j):
    """(d/dtau1 ln P, d/dtau1bar ln P, d^2/dtau1 dtau1bar ln P)."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    _check_offdiag(z1, z2)
    v1 = z1.imag
    d1 = ((t / 2 + q) / (z1 - np.conj(z1)) - (t / 2 + k / 2 + q) / (z1 - np.conj(z2))
          - (t / 2 - k / 2) / (z1 - z2))
    d1bar = -(t / 2 + q) / (z1 - np.conj(z1)) - q / (np.conj(z1) - z2)
    d2 = -(t / 2 + q) / (4 * v1 ** 2) + 0j * v1
    return d1, d1bar, d2


def logderiv_P(t1: HPoint, t2: HPoint, inputs: CovariantInputs):
    d1, d1bar, d2 = logderiv_P_array(t1.tau, t2.tau, inputs.t, inputs.k, inputs.q)
    return complex(d1), complex(d1bar), complex(d2)


def aux_Q_array(z1, z2, t, k, q=0j):
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    _check_offdiag(z1, z2)
    v1 = z1.imag
    Q1 = (-(t / 2 + k / 2 + q) / (z1 - np.conj(z2)) - (t / 2 - k / 2) / (z1 - z2)
          - 1j * (t + q) / (2 * v1))
    Q2 = -q / (np.conj(z1) - z2) + 1j * q / (2 * v1)
    return Q1, Q2


def aux_Q(t1: HPoint, t2: HPoint, inputs: CovariantInputs):
    Q1, Q2 = aux_Q_array(t1.tau, t2.tau, inputs.t, inputs.k, inputs.q)
    return complex(Q1), complex(Q2)
