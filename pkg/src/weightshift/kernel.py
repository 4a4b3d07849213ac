"""Seed, periodized and automorphic kernels, their Fourier modes and the Eisenstein majorant.

Sums are evaluated term by term in a fixed order and accumulated with exact
(``math.fsum``) or compensated summation.  Every truncated sum comes with a tail
estimate: a power-law envelope with exponent slack ``ENVELOPE_EPS`` whose constant
is fitted on the last computed octave of terms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .branchphase import covariant_P_array
from .errors import ConvergenceRefused, DiagonalError, EquivalentPoints
from .fitting import csum, loglog_slope
from .halfplane import (HPoint, automorphy_array, coset_arrays, distance_array,
                        orbit_points_near_domain, reduce_array, reduce_to_fundamental_domain)
from .hyp2f1 import SubdominantSolution
from .spectral import DerivedSpectralData, PChoice, WeightParameters, convergence_report, derive

ENVELOPE_EPS = 0.1
EQUIVALENCE_TOL = 1e-9
_CHUNK = 2_000_000  # complex entries per evaluation block


@dataclass(frozen=True)
class TruncationPolicy:
    period_N: int = 200
    coset_Q: int = 40
    tail_tol: float = 1e-8
    quad_points: int = 256
    # K0 uses at least period_scale * (height) translates, so the sum reaches the decay regime
    period_scale: float = 8.0

    def __post_init__(self):
        if self.period_N < 1 or self.coset_Q < 1 or not self.tail_tol > 0 or self.quad_points < 2:
            raise ValueError(f"invalid truncation policy {self}")


@dataclass
class KernelInstance:
    params: WeightParameters
    p_choice: PChoice = PChoice.ROOT_Q
    ode_tol: float = 1e-13
    floor_z: float = -1e-12
    spectral: DerivedSpectralData = field(init=False)
    solution: SubdominantSolution = field(init=False)

    def __post_init__(self):
        self.spectral = derive(self.params, self.p_choice)
        self.solution = SubdominantSolution(self.params, self.spectral, ode_tol=self.ode_tol,
                                            floor_z=self.floor_z)

    @classmethod
    def build(cls, t, k, q=0j, lambda_K=0.25, **kw) -> "KernelInstance":
        return cls(WeightParameters(t, k, q, lambda_K), **kw)

    @property
    def alpha_K(self) -> float:
        return self.spectral.alpha_K

    def K(self, z1, z2):
        """Seed kernel on broadcastable complex arrays (no diagonal points allowed)."""
        z1, z2 = np.broadcast_arrays(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
        p = self.params
        zz = invariant_z_array(z1, z2)
        if np.any(zz == 0):
            raise DiagonalError("seed kernel evaluated on the diagonal")
        f = self.solution.value(zz.ravel()).reshape(zz.shape)
        return covariant_P_array(z1, z2, p.t, p.k, p.q) * f


def invariant_z_array(z1, z2):
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    return -np.abs(z1 - z2) ** 2 / (4.0 * z1.imag * z2.imag)


def invariant_z(t1: HPoint, t2: HPoint) -> float:
    return float(invariant_z_array(t1.tau, t2.tau))


def seed_K(inst: KernelInstance, t1: HPoint, t2: HPoint) -> complex:
    if t1.tau == t2.tau:
        raise DiagonalError("seed kernel is singular on the diagonal")
    return complex(inst.K(t1.tau, t2.tau))


# ---------------------------------------------------------------- periodization

def _require(flag: bool, what: str, inst: KernelInstance):
    if not flag:
        raise ConvergenceRefused(f"{what} does not converge absolutely for alpha_K = {inst.alpha_K:.6g}")


def _effective_N(policy: TruncationPolicy, z1, z2) -> int:
    height = float(np.max(np.maximum(np.imag(z1), np.imag(z2))))
    spread = float(np.max(np.abs(np.real(z1) - np.real(z2))))
    return max(policy.period_N, int(math.ceil(policy.period_scale * height))) + int(math.ceil(spread))


def _k0_rows(inst: KernelInstance, w, tau2, N: int):
    """K0(w_j, tau2_j) for 1-d arrays, each summed over n = -N..N; returns (values, tails)."""
    w, tau2 = np.broadcast_arrays(np.atleast_1d(np.asarray(w, dtype=complex)),
                                  np.asarray(tau2, dtype=complex))
    n = np.arange(-N, N + 1, dtype=float)
    expo = 2 * inst.alpha_K + ENVELOPE_EPS
    octave = np.abs(n) > N / 2
    vals = np.empty(w.shape, dtype=complex)
    tails = np.empty(w.shape)
    rows = max(1, _CHUNK // n.size)
    for lo in range(0, w.size, rows):
        sl = slice(lo, lo + rows)
        terms = inst.K(w[sl, None], tau2[sl, None] + n[None, :])
        vals[sl] = csum(terms, axis=1)
        mag = np.abs(terms[:, octave]) / np.abs(n[octave]) ** expo
        const = mag.max(axis=1)
        if expo + 1 < 0:
            tails[sl] = 2 * const * N ** (expo + 1) / (-(expo + 1))
        else:
            tails[sl] = math.inf
    return vals, tails


def _check_translate(z1: complex, z2: complex):
    du = z1.real - z2.real
    if abs(z1.imag - z2.imag) <= 1e-12 and abs(du - round(du)) <= 1e-12:
        raise DiagonalError("the two points differ by an integer translation")


def periodized_K0(inst: KernelInstance, t1: HPoint, t2: HPoint, policy: TruncationPolicy | None = None):
    """(value, tail) of the sum of K(t1, t2 + n) over |n| <= N."""
    policy = policy or TruncationPolicy()
    _require(convergence_report(inst.params, data=inst.spectral).periodized, "periodized kernel", inst)
    _check_translate(t1.tau, t2.tau)
    N = _effective_N(policy, t1.tau, t2.tau)
    val, tail = _k0_rows(inst, np.array([t1.tau]), t2.tau, N)
    return complex(val[0]), float(tail[0])


# ---------------------------------------------------------------- Eisenstein majorant

def _half_line_integral(X, A, s):
    """Integral of (x^2 + A^2)^(-s) over x >= X >= 0."""
    full = 0.5 * A ** (1 - 2 * s) * special.beta(0.5, s - 0.5)
    return full * special.betaincc(0.5, s - 0.5, X ** 2 / (X ** 2 + A ** 2))


def eisenstein_tail_bound(tau: complex, s: float, Q: int) -> float:
    """Upper bound for the sum of Im(g tau)^s over bottom rows outside the box |c|,|d| <= Q.

    Coprimality is ignored (majorant); each row c is bounded by its integral in d,
    plus the largest term when the row's peak is not excluded.
    """
    if s <= 1:
        return math.inf
    u, v = tau.real, tau.imag
    total = 0.0
    beta = special.beta(0.5, s - 0.5)
    # rows c <= Q, |d| > Q
    for c in range(1, Q + 1):
        A = c * v
        X = max(0.0, Q - c * abs(u))
        # the peak term only needs separate accounting when it sits inside the summed range
        total += 2 * _half_line_integral(X, A, s) + (A ** (-2 * s) if X == 0 else 0.0)
    # rows c > Q, all d
    e1, e2 = 2 * s - 1, 2 * s
    rows = beta * v ** (1 - 2 * s) * Q ** (1 - e1) / (e1 - 1) + v ** (-2 * s) * Q ** (1 - e2) / (e2 - 1)
    return float(v ** s * (total + rows))


def _coset_im(tau, c, d):
    return np.imag(tau) / np.abs(c * tau + d) ** 2


def eisenstein(t: HPoint, s: float, Q: int = 40):
    """Coset sum of Im(g tau)^s over the box |c|, |d| <= Q, with a tail bound."""
    if s <= 1:
        raise ValueError("Eisenstein series requires s > 1")
    _, _, c, d = coset_arrays(int(Q))
    terms = _coset_im(t.tau, c, d) ** s
    return math.fsum(terms), eisenstein_tail_bound(t.tau, s, int(Q))


def _divisor_sigma(n: np.ndarray, e: float):
    out = np.zeros(n.shape)
    for j, m in enumerate(n):
        divs = [x for x in range(1, int(math.isqrt(m)) + 1) if m % x == 0]
        divs += [m // x for x in divs if x * x != m]
        out[j] = sum(float(x) ** e for x in divs)
    return out


@lru_cache(maxsize=32)
def _fourier_constants(s: float, terms: int):
    n = np.arange(1, terms + 1)
    phi = math.sqrt(math.pi) * special.gamma(s - 0.5) * special.zeta(2 * s - 1) / (
        special.gamma(s) * special.zeta(2 * s))
    pref = 2 * math.pi ** s / (special.gamma(s) * special.zeta(2 * s))
    coef = n ** (s - 0.5) * _divisor_sigma(n, 1 - 2 * s)
    return phi, pref, coef


def eisenstein_fourier(tau, s: float, terms: int = 60):
    """E(tau, s) from its Fourier expansion at the cusp (tau is reduced first).

    E = y^s + phi(s) y^(1-s) + pref sqrt(y) sum_{n != 0} |n|^(s-1/2) sigma_{1-2s}(|n|)
    K_{s-1/2}(2 pi |n| y) e(n x).
    """
    if s <= 1:
        raise ValueError("Eisenstein series requires s > 1")
    tau = np.asarray(tau, dtype=complex)
    z = reduce_array(tau.ravel())
    x, y = z.real[:, None], z.imag[:, None]
    phi, pref, coef = _fourier_constants(float(s), int(terms))
    n = np.arange(1, terms + 1)[None, :]
    modes = coef[None, :] * special.kv(s - 0.5, 2 * np.pi * n * y) * 2 * np.cos(2 * np.pi * n * x)
    val = y[:, 0] ** s + phi * y[:, 0] ** (1 - s) + pref * np.sqrt(y[:, 0]) * modes.sum(axis=1)
    val = val.reshape(tau.shape)
    return val if val.ndim else float(val)


# ---------------------------------------------------------------- automorphic kernel

def gamma_equivalent(t1: HPoint, t2: HPoint, tol: float = EQUIVALENCE_TOL) -> bool:
    a, _ = reduce_to_fundamental_domain(t1)
    # boundary identifications: compare against all orbit images of t2 touching the domain
    imgs = orbit_points_near_domain(t2, 2 * tol + 1e-12)
    return bool(np.min(distance_array(a.tau, imgs)) < tol)


def _box_blocks(Q: int):
    """Nested box sizes 4, 8, ... up to Q (always ends at Q)."""
    sizes, b = [], min(4, Q)
    while b < Q:
        sizes.append(b)
        b *= 2
    sizes.append(Q)
    return sizes


def _coset_sum(inst, policy, orbit_pt, other, weight, dual):
    """Sum over coset representatives of the orbit of ``orbit_pt``, growing the box until the
    envelope tail drops below ``tail_tol`` times the partial sum or the box reaches coset_Q."""
    s_env = -(inst.alpha_K + ENVELOPE_EPS)
    a_all, b_all, c_all, d_all = coset_arrays(policy.coset_Q)
    box = np.maximum(c_all, np.abs(d_all))
    done = np.zeros(c_all.shape, dtype=bool)
    vals = np.zeros(c_all.shape, dtype=complex)
    k0_tails = np.zeros(c_all.shape)
    imgs = ((a_all * orbit_pt + b_all) / (c_all * orbit_pt + d_all)).real + 1j * _coset_im(orbit_pt, c_all, d_all)
    j = automorphy_array(weight, c_all, d_all, orbit_pt)
    for Qb in _box_blocks(policy.coset_Q):
        sel = (box <= Qb) & ~done
        w = imgs[sel]
        if dual:
            N = _effective_N(policy, w, other)
            v0, t0 = _k0_rows(inst, w, other, N)
            vals[sel] = v0 / j[sel]
        else:
            N = _effective_N(policy, other, w)
            v0, t0 = _k0_rows_first(inst, other, w, N)
            vals[sel] = v0 * j[sel]
        k0_tails[sel] = t0
        done |= sel
        # envelope constant from the last octave of the current box
        octave = done & (box > Qb / 2) & (c_all > 0)
        if not octave.any():
            octave = done & (c_all > 0)
        const = float(np.max(np.abs(vals[octave]) / imgs[octave].imag ** s_env)) if octave.any() else 0.0
        env_tail = const * eisenstein_tail_bound(orbit_pt, s_env, Qb) if s_env > 1 else math.inf
        partial = csum(vals[done])
        tail = env_tail + float(math.fsum(k0_tails[done]))
        if tail <= policy.tail_tol * abs(partial):
            break
    return complex(partial), float(tail), int(Qb)


def _k0_rows_first(inst, z1, w, N):
    """K0(z1, w_j) with the fixed point in the first slot."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    return _k0_rows(inst, np.full(w.shape, complex(z1)), w, N)


@dataclass(frozen=True)
class KernelValue:
    value: complex
    tail: float
    route: str
    box: int


def automorphic_kernel_detail(inst: KernelInstance, t1: HPoint, t2: HPoint,
                              policy: TruncationPolicy | None = None, route: str = "auto") -> KernelValue:
    """The automorphic kernel with route and effective coset box recorded.

    ``primal`` sums K0(t1, g t2) j_k(g, t2) over cosets.  ``dual`` uses covariance of the
    seed kernel to sum j_t(g, t1)^(-1) K0(g t1, t2) instead (even weights only); both
    enumerate the same group elements.  ``auto`` sums over the orbit of the lower point.
    """
    policy = policy or TruncationPolicy()
    _require(convergence_report(inst.params, data=inst.spectral).automorphic, "automorphic kernel", inst)
    if gamma_equivalent(t1, t2):
        raise EquivalentPoints(f"{t1} and {t2} are equivalent under the modular group")
    even = inst.params.t % 2 == 0 and inst.params.k % 2 == 0
    if route == "auto":
        route = "dual" if (even and t2.v > t1.v) else "primal"
    if route == "dual":
        if not even:
            raise ValueError("the dual route needs even weights")
        val, tail, box = _coset_sum(inst, policy, t1.tau, t2.tau, inst.params.t, dual=True)
    elif route == "primal":
        val, tail, box = _coset_sum(inst, policy, t2.tau, t1.tau, inst.params.k, dual=False)
    else:
        raise ValueError(f"unknown route {route!r}")
    return KernelValue(val, tail, route, box)


def automorphic_kernel(inst: KernelInstance, t1: HPoint, t2: HPoint,
                       policy: TruncationPolicy | None = None, route: str = "auto"):
    r = automorphic_kernel_detail(inst, t1, t2, policy, route)
    return r.value, r.tail


# ---------------------------------------------------------------- Fourier modes

def _require_periodized(inst):
    _require(convergence_report(inst.params, data=inst.spectral).periodized, "Fourier coefficient", inst)


def fourier_coefficient_wrapped(inst: KernelInstance, t1: HPoint, v2: float, n: int,
                                policy: TruncationPolicy | None = None):
    """Trapezoid rule over one period of K0(t1, u + i v2) e(-n u); returns (value, tail)."""
    policy = policy or TruncationPolicy()
    _require_periodized(inst)
    M = policy.quad_points
    u = np.arange(M) / M
    pts = u + 1j * v2
    if np.any((np.abs(pts.imag - t1.v) <= 1e-12)
              & (np.abs((pts.real - t1.u) - np.round(pts.real - t1.u)) <= 1e-12)):
        raise DiagonalError("quadrature node hits a translate of the first point")
    N = _effective_N(policy, t1.tau, pts)
    vals, tails = _k0_rows_first(inst, t1.tau, pts, N)
    coef = csum(vals * np.exp(-2j * np.pi * n * u)) / M
    return complex(coef), float(tails.max())


def fourier_coefficient_unfolded(inst: KernelInstance, t1: HPoint, v2: float, n: int,
                                 rel_tol: float = 1e-10):
    """Real-line integral of K(t1, u + i v2) e(-n u); returns (value, error estimate)."""
    _require_periodized(inst)
    if abs(v2 - t1.v) <= 1e-12:
        raise ValueError("unfolded integral crosses the diagonal when v2 equals Im(t1)")
    W = v2 + t1.v
    z1 = t1.tau

    def g(y):
        return complex(inst.K(z1, t1.u + W * y + 1j * v2)) * W

    kw = dict(limit=500, epsabs=0.0, epsrel=rel_tol)
    parts, err = [], 0.0
    if n == 0:
        for comp in (lambda y: g(y).real, lambda y: g(y).imag):
            val, e = integrate.quad(comp, -np.inf, np.inf, **kw)
            parts.append(val)
            err += e
        val = complex(parts[0], parts[1])
    else:
        om = 2 * np.pi * abs(n) * W
        sym = lambda y: g(y) + g(-y)
        asym = lambda y: g(y) - g(-y)
        qw = dict(limlst=200, limit=500, epsabs=1e-300)
        with warnings.catch_warnings():
            # cycle-level warnings are common for tiny coefficients; the error estimate is returned
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            cr, e1 = integrate.quad(lambda y: sym(y).real, 0, np.inf, weight="cos", wvar=om, **qw)
            ci, e2 = integrate.quad(lambda y: sym(y).imag, 0, np.inf, weight="cos", wvar=om, **qw)
            sr, e3 = integrate.quad(lambda y: asym(y).real, 0, np.inf, weight="sin", wvar=om, **qw)
            si, e4 = integrate.quad(lambda y: asym(y).imag, 0, np.inf, weight="sin", wvar=om, **qw)
        sgn = 1 if n > 0 else -1
        val = complex(cr, ci) - 1j * sgn * complex(sr, si)
        err = e1 + e2 + e3 + e4
    # centering the integration at u = Re(t1) multiplies by e(-n Re t1)
    return complex(val * np.exp(-2j * np.pi * n * t1.u)), float(err)


def fourier_coefficient(inst: KernelInstance, t1: HPoint, v2: float, n: int,
                        policy: TruncationPolicy | None = None, method: str = "wrapped") -> complex:
    if method == "wrapped":
        return fourier_coefficient_wrapped(inst, t1, v2, n, policy)[0]
    if method == "unfolded":
        return fourier_coefficient_unfolded(inst, t1, v2, n)[0]
    raise ValueError(f"unknown method {method!r}")


def kernel_l1_norm(inst: KernelInstance, t1: HPoint, v2: float, rel_tol: float = 1e-10) -> float:
    """Integral of |K(t1, u + i v2)| over the real line (bounds every Fourier coefficient)."""
    W = v2 + t1.v
    val, _ = integrate.quad(lambda y: abs(complex(inst.K(t1.tau, t1.u + W * y + 1j * v2))) * W,
                            -np.inf, np.inf, limit=500, epsabs=0.0, epsrel=rel_tol)
    return float(val)


# ---------------------------------------------------------------- diagonal behaviour

@dataclass(frozen=True)
class SingularityFit:
    order_estimate: float
    stderr: float
    log_flag: bool
    log_r2: float


def singularity_fit_detail(inst: KernelInstance, t1: HPoint, direction: float = 0.7,
                           r_range=(1e-4, 1e-2), samples: int = 24) -> SingularityFit:
    r = np.geomspace(r_range[0], r_range[1], samples)
    pts = t1.tau + r * np.exp(1j * direction)
    mag = np.abs(inst.K(t1.tau, pts))
    slope, err = loglog_slope(r, mag)
    # |K| ~ A + B log(1/r): linear in log(1/r) with a positive coefficient
    L = np.log(1 / r)
    B, A = np.polyfit(L, mag, 1)
    fit = A + B * L
    r2 = 1 - float(np.sum((mag - fit) ** 2) / np.sum((mag - mag.mean()) ** 2))
    log_flag = bool(r2 > 0.999 and B > 0 and abs(slope) < 0.5)
    return SingularityFit(slope, err, log_flag, r2)


def singularity_fit(inst: KernelInstance, t1: HPoint, direction: float = 0.7):
    fit = singularity_fit_detail(inst, t1, direction)
    return fit.order_estimate, fit.log_flag
