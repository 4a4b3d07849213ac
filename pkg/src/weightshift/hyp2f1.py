"""Gauss hypergeometric series, the basis at infinity and the subdominant invariant function.

The invariant factor f(z) of the kernel lives on z in (-inf, 0).  For
z <= anchor it is evaluated from the convergent expansion in 1/z; inside the
anchor the radial equation is integrated inward once per solution (in the
variable s = ln(-z)) and the dense output is reused for every evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DiagonalError, NonConvergence
from .spectral import Degeneracy, DerivedSpectralData, WeightParameters, derive, PChoice


def _nonpos_int(x: complex) -> bool:
    return abs(x.imag) < 1e-14 and x.real <= 0 and abs(x.real - round(x.real)) < 1e-14


def _coefficients(A, B, C, xmax, tol, max_terms, derivs):
    """Scalar Taylor coefficients until a certified relative tail bound holds uniformly on
    |x| <= xmax, or None when no uniform lower bound on |2F1| is available."""
    coefs = [1.0 + 0j]
    coef = 1.0 + 0j
    absum = 0.0  # sum of |c_n| xmax^n over n >= 1
    for n in range(1, max_terms + 1):
        j = n - 1
        coef = coef * (A + j) * (B + j) / ((C + j) * n)
        if coef == 0:
            return coefs, 0.0
        coefs.append(coef)
        mag = abs(coef) * xmax ** n
        absum += mag
        if n > abs(C) + 1:
            rb = xmax * max(1.0, (n + abs(A)) / (n + 1)) * (n + abs(B)) / (n - abs(C))
            rb *= (n + 2) / n if derivs else 1.0
            low = 1.0 - absum
            if low <= 0.25:
                return None
            if rb < 1:
                bound = mag * rb / (1 - rb)
                ok = bound <= tol * low
                if ok and derivs:
                    # derivative series is dominated termwise by n |c_n| xmax^(n-1)
                    dlow = abs(coefs[1]) - sum(m * abs(c) * xmax ** (m - 1) for m, c in enumerate(coefs) if m >= 2)
                    dbound = n * abs(coef) * xmax ** (n - 1) * rb / (1 - rb)
                    ok = dlow > 0 and dbound <= tol * dlow
                if ok:
                    return coefs, bound
    raise NonConvergence(f"2F1 series did not converge in {max_terms} terms (|x| <= {xmax})")


def _horner(coefs, x, derivs):
    val = np.full(x.shape, coefs[-1], dtype=complex)
    for c in reversed(coefs[:-1]):
        val = val * x + c
    d1 = d2 = np.zeros(x.shape, dtype=complex)
    if derivs >= 1 and len(coefs) > 1:
        dc = [n * c for n, c in enumerate(coefs)][1:]
        d1 = np.full(x.shape, dc[-1], dtype=complex)
        for c in reversed(dc[:-1]):
            d1 = d1 * x + c
    if derivs >= 2 and len(coefs) > 2:
        dc = [n * (n - 1) * c for n, c in enumerate(coefs)][2:]
        d2 = np.full(x.shape, dc[-1], dtype=complex)
        for c in reversed(dc[:-1]):
            d2 = d2 * x + c
    return val, d1, d2


def _series(A, B, C, x, tol=1e-16, max_terms=20000, derivs=0):
    """Power series of 2F1(A,B;C;x) on an array x with |x| < 1.

    Returns (value, first derivative, second derivative, tail bound).  The tail
    bound is a geometric majorant from a ratio bound valid for all later terms.
    """
    x = np.asarray(x, dtype=float)
    A, B, C = complex(A), complex(B), complex(C)
    if _nonpos_int(C) and not any(_nonpos_int(P) and P.real > C.real for P in (A, B)):
        raise ValueError("third parameter is a non-positive integer")
    xmax = float(np.max(np.abs(x))) if x.size else 0.0
    if xmax < 0.5:
        found = _coefficients(A, B, C, xmax, tol, max_terms, derivs)
        if found is not None:
            coefs, bound = found
            val, d1, d2 = _horner(coefs, x, derivs)
            return val, d1, d2, np.full(x.shape, bound)
    total = np.ones(x.shape, dtype=complex)
    d1 = np.zeros_like(total)
    d2 = np.zeros_like(total)
    coef = 1.0 + 0j
    xn = np.ones(x.shape)       # x^n
    xn1 = np.zeros(x.shape)     # x^(n-1)
    for n in range(1, max_terms + 1):
        j = n - 1
        coef = coef * (A + j) * (B + j) / ((C + j) * n)
        if coef == 0:
            # terminating series
            return total, d1, d2, np.zeros(x.shape)
        xn2, xn1, xn = xn1, xn, xn * x
        term = coef * xn
        total = total + term
        if derivs >= 1:
            d1 = d1 + n * coef * xn1
        if derivs >= 2 and n >= 2:
            d2 = d2 + n * (n - 1) * coef * xn2
        if n > abs(C) + 1:
            rb = xmax * max(1.0, (n + abs(A)) / (n + 1)) * (n + abs(B)) / (n - abs(C))
            rb *= (n + 2) / n if derivs else 1.0
            if rb < 1:
                bound = np.abs(term) * rb / (1 - rb)
                ok = np.all(bound <= tol * np.maximum(np.abs(total), 1e-300))
                if ok and derivs:
                    dbound = n * np.abs(coef) * np.abs(xn1) * rb / (1 - rb)
                    ok = np.all(dbound <= tol * np.maximum(np.abs(d1), 1e-300))
                if ok:
                    return total, d1, d2, bound
    raise NonConvergence(f"2F1 series did not converge in {max_terms} terms (|x| <= {xmax})")


@dataclass(frozen=True)
class HypSeriesSpec:
    a: complex
    b: complex
    c_hde: complex
    max_terms: int = 200_000
    tol: float = 1e-15


def gauss_2f1(spec: HypSeriesSpec, x: float):
    """2F1(a, b; c; x) for real x < 1, returned as (value, error_estimate)."""
    x = float(x)
    if x >= 1:
        raise ValueError("argument must be < 1")
    a, b, c = complex(spec.a), complex(spec.b), complex(spec.c_hde)
    if _nonpos_int(c):
        raise ValueError("c is a non-positive integer")
    if abs(x) <= 0.5:
        val, _, _, err = _series(a, b, c, np.array([x]), spec.tol, spec.max_terms)
        return complex(val[0]), float(err[0])
    if x < -0.5:
        # Pfaff: 2F1(a,b;c;x) = (1-x)^{-a} 2F1(a, c-b; c; x/(x-1))
        y = x / (x - 1)
        pre = math.exp(-a.real * math.log(1 - x)) * complex(math.cos(-a.imag * math.log(1 - x)),
                                                           math.sin(-a.imag * math.log(1 - x)))
        val, _, _, err = _series(a, c - b, c, np.array([y]), spec.tol, spec.max_terms)
        return complex(pre * val[0]), float(abs(pre) * err[0])
    val, _, _, err = _series(a, b, c, np.array([x]), spec.tol, spec.max_terms)
    return complex(val[0]), float(err[0])


def _neg_power(z, e):
    """z^e for negative real z with the principal branch (Arg z = +pi)."""
    e = complex(e)
    if e.imag == 0:
        return np.power(-np.asarray(z, dtype=float), e.real) * complex(np.exp(1j * np.pi * e.real))
    return np.exp(e * (np.log(-z) + 1j * np.pi))


# |x| bands for the series at infinity; far points need only a few terms
_BANDS = (1e-8, 1e-5, 1e-3, 1e-2)


def _banded_series(A, B, C, x, derivs):
    val = np.empty(x.shape, dtype=complex)
    d1 = np.empty(x.shape, dtype=complex)
    ax = np.abs(x)
    lo = 0.0
    for hi in _BANDS + (np.inf,):
        sel = (ax > lo) & (ax <= hi) if lo > 0 else ax <= hi
        if sel.any():
            v, d, _, _ = _series(A, B, C, x[sel], derivs=derivs, tol=1e-16)
            val[sel], d1[sel] = v, d
        lo = hi
    return val, d1


def basis_at_infinity(spectral: DerivedSpectralData, z, branch: str = "F1", derivative: bool = False):
    """Solutions z^{-a} F(a, a-c+1; a-b+1; 1/z) (F1) or the b-analogue (F2), for z <= -2."""
    z = np.asarray(z, dtype=float)
    if np.any(z > -2):
        raise ValueError("basis expansion used only for z <= -2")
    a, b, c = spectral.a, spectral.b, spectral.c_hde
    if branch == "F1":
        e, A, B, C = a, a, a - c + 1, a - b + 1
    elif branch == "F2":
        if spectral.degeneracy is Degeneracy.DEGENERATE_LOG:
            raise ValueError("second basis solution is logarithmic for these parameters")
        e, A, B, C = b, b, b - c + 1, b - a + 1
    else:
        raise ValueError(f"unknown branch {branch!r}")
    x = 1.0 / z
    F, dF = _banded_series(A, B, C, np.atleast_1d(x), 1 if derivative else 0)
    F, dF = F.reshape(x.shape), dF.reshape(x.shape)
    pw = _neg_power(z, -e)
    val = pw * F
    if not derivative:
        return val if val.ndim else complex(val)
    dval = pw * (-e / z * F - dF / z ** 2)
    return (val, dval) if val.ndim else (complex(val), complex(dval))


def z_ode_coefficients(params: WeightParameters, z):
    """(A2, A1, A0) with A2 f'' + A1 f' + A0 f = 0 for the radial equation in z."""
    t, k, q = params.t, params.k, params.q
    z = np.asarray(z, dtype=float)
    A2 = z * (1 - z)
    A1 = (k - t + 2) / 2 + (t + 2 * q - 2) * z
    Cf = q * (-(1 - t - q) * z + (1 - t / 2 + k / 2)) / (1 - z)
    A0 = Cf - params.lambda_eff
    return A2, A1, A0


def z_ode_residual(params: WeightParameters, z, f, fp, fpp):
    """Residual of the z-equation and the size of its largest term."""
    A2, A1, A0 = z_ode_coefficients(params, z)
    terms = (A2 * fpp, A1 * fp, A0 * f)
    res = terms[0] + terms[1] + terms[2]
    scale = np.maximum.reduce([np.abs(x) for x in terms])
    return res, scale


def hde_residual(spectral: DerivedSpectralData, z, w, wp, wpp):
    a, b, c = spectral.a, spectral.b, spectral.c_hde
    return z * (1 - z) * wpp + (c - (a + b + 1) * z) * wp - a * b * w


@dataclass
class SubdominantSolution:
    """The decaying solution f(z) = (1-z)^p F1(z), continued inward by integration."""

    params: WeightParameters
    spectral: DerivedSpectralData | None = None
    anchor_z: float = -8.0
    ode_tol: float = 1e-10
    floor_z: float = -1e-6
    _dense: object = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.spectral is None:
            self.spectral = derive(self.params, PChoice.ROOT_Q)
        if self.anchor_z > -2:
            raise ValueError("anchor must satisfy anchor_z <= -2")
        if not (self.anchor_z < self.floor_z < 0):
            raise ValueError("floor must lie between the anchor and 0")

    def _outer(self, z, derivative=True):
        p = complex(self.spectral.p)
        z = np.asarray(z, dtype=float)
        if p.imag == 0:
            S = np.power(1.0 - z, p.real)
        else:
            S = np.exp(p * np.log1p(-z))
        if not derivative:
            return S * basis_at_infinity(self.spectral, z, "F1"), None
        val, dval = basis_at_infinity(self.spectral, z, "F1", derivative=True)
        return S * val, S * (dval - p / (1 - z) * val)

    def _rhs(self, s, y):
        z = -math.exp(s)
        A2, A1, A0 = z_ode_coefficients(self.params, z)
        f, fs = y
        # z f_z = f_s and z^2 f_zz = f_ss - f_s
        fss = fs - (A1 * fs + z * A0 * f) / (1 - z)
        return [fs, fss]

    def _solve(self):
        if self._dense is not None:
            return self._dense
        z0 = self.anchor_z
        f0, fp0 = self._outer(np.array([z0]))
        y0 = np.array([f0[0], z0 * fp0[0]], dtype=complex)
        s0, s1 = math.log(-z0), math.log(-self.floor_z)
        scale = float(np.abs(y0).max())
        sol = solve_ivp(self._rhs, (s0, s1), y0, method="DOP853", rtol=self.ode_tol,
                        atol=self.ode_tol * 1e-6 * scale, dense_output=True)
        if not sol.success:
            raise NonConvergence(f"inward integration failed: {sol.message}")
        self._dense = sol.sol
        return self._dense

    def evaluate(self, z, derivative: bool = True):
        """Return (f(z), f'(z)) for an array of z < 0 (f' is None when not requested)."""
        z = np.asarray(z, dtype=float)
        if np.any(z >= 0):
            raise DiagonalError("f is evaluated on z < 0 only")
        if np.any(z > self.floor_z):
            raise DiagonalError(f"z closer to 0 than the integration floor {self.floor_z}")
        f = np.empty(z.shape, dtype=complex)
        fp = np.empty(z.shape, dtype=complex) if derivative else None
        outer = z <= self.anchor_z
        if outer.any():
            fo, fpo = self._outer(z[outer], derivative)
            f[outer] = fo
            if derivative:
                fp[outer] = fpo
        inner = ~outer
        if inner.any():
            dense = self._solve()
            zi = z[inner]
            y = dense(np.log(-zi))
            f[inner] = y[0]
            if derivative:
                fp[inner] = y[1] / zi
        return f, fp

    def value(self, z):
        return self.evaluate(z, derivative=False)[0]

    def second_derivative(self, z, rel_step=1e-3):
        """f'' by a 4th-order central difference of f' in ln(-z)."""
        z = np.asarray(z, dtype=float)
        s = np.log(-z)
        h = rel_step
        g = [self.evaluate(-np.exp(s + j * h))[1] * (-np.exp(s + j * h)) for j in (-2, -1, 1, 2)]
        fss_minus_fs = (g[0] - 8 * g[1] + 8 * g[2] - g[3]) / (12 * h)  # d(f_s)/ds = f_ss
        fs = self.evaluate(z)[1] * z
        return (fss_minus_fs - fs) / z ** 2


def f_subdominant(sol: SubdominantSolution, z):
    """(value, derivative) of the subdominant invariant function at z < 0."""
    f, fp = sol.evaluate(np.atleast_1d(np.asarray(z, dtype=float)))
    if np.ndim(z) == 0:
        return complex(f[0]), complex(fp[0])
    return f, fp
