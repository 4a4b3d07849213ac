"""The regularized integral operator on automorphic inputs.

U phi(tau1) is split with a smooth, Gamma-invariant partition of unity psi built
from a radial bump around the orbit of the singular point tau_s:

    U phi = int_F Kern phi (1 - psi) dmu  +  (1 / w_s) PV int_{d(., tau_s) < R} Kern phi chi dmu

The first piece is a smooth integral over the truncated fundamental domain; the
second is a hyperbolic principal value in geodesic polar coordinates.  With chi
the indicator of the disc this is exactly the excise-and-add-back definition; a
smooth chi gives the same value while keeping the domain integrand smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, special
from scipy.interpolate import griddata

from .errors import ConvergenceRefused, NonConvergence
from .fitting import csum
from .halfplane import (HPoint, automorphy_array, automorphy_factor, coset_arrays, distance_array,
                        effective_stabilizer_order, isolation_radius, orbit_points_near_domain,
                        polar_point, reduce_to_fundamental_domain)
from .kernel import (ENVELOPE_EPS, KernelInstance, TruncationPolicy, _coset_im, _k0_rows,
                     eisenstein_fourier, eisenstein_tail_bound)
from .spectral import convergence_report

CONTRACTION = 0.9  # required ratio between successive principal-value shell sums


# ---------------------------------------------------------------- inputs

@dataclass(frozen=True)
class InputForm:
    kind: str
    weight: int
    growth_C: float
    s: float | None = None
    Q: int = 40
    table: tuple | None = None

    @classmethod
    def eisenstein(cls, s: float, Q: int = 40) -> "InputForm":
        if not s > 1:
            raise ValueError("Eisenstein input needs s > 1")
        return cls("EisensteinWeight0", 0, float(s), s=float(s), Q=int(Q))

    @classmethod
    def sampled(cls, points, values, weight: int, growth_C: float) -> "InputForm":
        pts = tuple(complex(p) for p in points)
        vals = tuple(complex(x) for x in values)
        return cls("SampledGrid", int(weight), float(growth_C), table=(pts, vals))

    @property
    def eigenvalue(self):
        return self.s * (1 - self.s) if self.kind == "EisensteinWeight0" else None

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=complex)
        if self.kind == "EisensteinWeight0":
            return np.asarray(eisenstein_fourier(tau, self.s), dtype=complex)
        return self._sampled(tau)

    def _sampled(self, tau):
        pts, vals = (np.array(x) for x in self.table)
        flat = tau.ravel()
        red = np.empty(flat.shape, dtype=complex)
        fac = np.empty(flat.shape, dtype=complex)
        for j, z in enumerate(flat):
            star, g = reduce_to_fundamental_domain(HPoint.from_complex(z))
            red[j] = star.tau
            fac[j] = automorphy_factor(self.weight, g, HPoint.from_complex(z))
        xy = np.column_stack([pts.real, pts.imag])
        q = np.column_stack([red.real, red.imag])
        out = griddata(xy, vals, q, method="linear")
        miss = np.isnan(out)
        if miss.any():
            out[miss] = griddata(xy, vals, q[miss], method="nearest")
        # phi(g tau) = j_k(g, tau) phi(tau)
        return (out / fac).reshape(tau.shape)


@dataclass(frozen=True)
class QuadratureSpec:
    cusp_height_Y: float = 20.0
    grid_u: int = 40
    grid_v: int = 40
    pv_R: float | None = None
    pv_rho: float = 0.5
    pv_shells: int = 10
    angular_nodes: int = 64
    radial_nodes: int = 6
    domain_shift: int = 0

    def __post_init__(self):
        if not 0.3 <= self.pv_rho <= 0.8:
            raise ValueError("shell ratio must lie in [0.3, 0.8]")
        if self.angular_nodes < 64:
            raise ValueError("at least 64 angular nodes are required")
        if self.pv_shells < 4 or self.grid_u < 4 or self.grid_v < 4:
            raise ValueError("quadrature resolution too small")
        if self.cusp_height_Y <= 1:
            raise ValueError("cusp height must exceed 1")


# ---------------------------------------------------------------- principal value

@dataclass(frozen=True)
class PVResult:
    value: complex
    cauchy_gap: float
    extrapolation: float
    partial_sums: tuple
    shells: tuple


def _shell_nodes(center, r_lo, r_hi, nr, nth):
    x, wx = leggauss(nr)
    half, mid = (r_hi - r_lo) / 2, (r_hi + r_lo) / 2
    r = mid + half * x
    th = 2 * np.pi * np.arange(nth) / nth
    pts = polar_point(center, r[:, None], th[None, :])
    w = (half * wx * np.sinh(r))[:, None] * np.full(nth, 2 * np.pi / nth)[None, :]
    return pts.ravel(), w.ravel()


def pv_nodes(center: complex, spec: QuadratureSpec, R: float):
    """Nodes and weights of every shell, outermost first."""
    out = []
    for j in range(spec.pv_shells):
        hi, lo = R * spec.pv_rho ** j, R * spec.pv_rho ** (j + 1)
        out.append(_shell_nodes(center, lo, hi, spec.radial_nodes, spec.angular_nodes))
    return out


def pv_from_shells(shells) -> PVResult:
    """Limit of the annulus partial sums, extrapolated geometrically from the last two shells."""
    shells = np.asarray(shells, dtype=complex)
    partial = np.cumsum(shells)
    gaps = np.abs(shells)
    scale = max(float(np.abs(partial).max()), 1e-300)
    # a Cauchy sequence of annuli needs the shell sums to contract, not merely decrease
    if not (gaps[-1] < CONTRACTION * gaps[-2] and gaps[-2] < CONTRACTION * gaps[-3]) and gaps[-3] > 1e-14 * scale:
        raise NonConvergence(f"principal-value shells are not contracting: {gaps[-3:]}")
    ratio = shells[-1] / shells[-2] if shells[-2] != 0 else 0.0
    extra = shells[-1] * ratio / (1 - ratio) if abs(ratio) < 1 else 0.0
    return PVResult(complex(partial[-1] + extra), float(gaps[-1]), float(abs(extra)),
                    tuple(complex(x) for x in partial), tuple(complex(x) for x in shells))


def pv_local_integral(integrand, center: HPoint, spec: QuadratureSpec, R: float | None = None):
    """Hyperbolic principal value of a vectorized integrand over the disc of radius R.

    Returns (value, cauchy_gap), where the gap is the contribution of the last shell.
    """
    if R is None:
        R = default_radius(center, spec)
    if R >= isolation_radius(center):
        raise ValueError("disc radius must stay below the isolation radius")
    shells = []
    for pts, w in pv_nodes(center.tau, spec, R):
        shells.append(csum(np.asarray(integrand(pts), dtype=complex) * w))
    res = pv_from_shells(shells)
    return res.value, res.cauchy_gap


def default_radius(center: HPoint, spec: QuadratureSpec) -> float:
    if spec.pv_R is not None:
        return spec.pv_R
    return min(0.5, 0.6 * isolation_radius(center))


# ---------------------------------------------------------------- kernel field

class KernelField:
    """The automorphic kernel in its second variable, tau1 fixed.

    The orbit of tau1 over the coset box is precomputed once; each evaluation point
    then costs one periodized sum per orbit point.
    """

    def __init__(self, inst: KernelInstance, tau1: complex, policy: TruncationPolicy):
        if inst.params.t % 2 or inst.params.k % 2:
            raise ValueError("the operator kernel is assembled for even weights only")
        self.inst, self.tau1, self.policy = inst, complex(tau1), policy
        a, b, c, d = coset_arrays(policy.coset_Q)
        self.orbit = ((a * tau1 + b) / (c * tau1 + d)).real + 1j * _coset_im(tau1, c, d)
        self.coef = 1.0 / automorphy_array(inst.params.t, c, d, tau1)
        self.box = np.maximum(c, np.abs(d))
        self.octave = (self.box > policy.coset_Q / 2) & (c > 0)
        self.s_env = -(inst.alpha_K + ENVELOPE_EPS)
        self.env = eisenstein_tail_bound(tau1, self.s_env, policy.coset_Q) if self.s_env > 1 else math.inf

    def heights_N(self, tau2):
        v = np.imag(tau2)
        return np.maximum(self.policy.period_N, np.ceil(self.policy.period_scale * v)).astype(int) + 2

    def __call__(self, tau2):
        tau2 = np.atleast_1d(np.asarray(tau2, dtype=complex))
        M = self.orbit.size
        vals = np.empty(tau2.shape, dtype=complex)
        tails = np.empty(tau2.shape)
        Ns = self.heights_N(tau2)
        for N in np.unique(Ns):
            idx = np.nonzero(Ns == N)[0]
            w = np.repeat(self.orbit[None, :], idx.size, axis=0)
            t2 = np.repeat(tau2[idx, None], M, axis=1)
            k0, k0t = _k0_rows(self.inst, w.ravel(), t2.ravel(), int(N))
            k0 = k0.reshape(idx.size, M)
            k0t = k0t.reshape(idx.size, M)
            vals[idx] = csum(k0 * self.coef[None, :], axis=1)
            const = np.max(np.abs(k0[:, self.octave]) / self.orbit[self.octave].imag ** self.s_env, axis=1)
            tails[idx] = const * self.env + k0t.sum(axis=1)
        return vals, tails


# ---------------------------------------------------------------- operator

def bump(d, R):
    """Smooth radial cut-off: 1 for d <= 0.3 R, 0 for d >= R."""
    x = np.clip((np.asarray(d, dtype=float) - 0.3 * R) / (0.7 * R), 0.0, 1.0)

    def h(y):
        return np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)

    return h(1 - x) / (h(1 - x) + h(x))


def domain_grid(nu: int, nv: int, Y: float, shift: int = 0):
    """Tensor Gauss nodes on the fundamental domain (translated by ``shift``) below height Y.

    Returns complex nodes and weights for the measure du dv / v^2 (v integrated in log v).
    """
    xu, wu = leggauss(nu)
    xv, wv = leggauss(nv)
    u = 0.5 * xu
    wu = 0.5 * wu
    lo = 0.5 * np.log(1 - u ** 2)
    hi = math.log(Y)
    half = (hi - lo) / 2
    lv = (hi + lo)[:, None] / 2 + half[:, None] * xv[None, :]
    v = np.exp(lv)
    pts = (u[:, None] + shift) + 1j * v
    wts = wu[:, None] * half[:, None] * wv[None, :] / v
    return pts.ravel(), wts.ravel()


@dataclass
class OperatorResult:
    value: complex
    error_budget: float
    breakdown: dict = field(default_factory=dict)


def _check_inputs(inst: KernelInstance, phi: InputForm):
    rep = convergence_report(inst.params, phi.growth_C, inst.spectral)
    if not rep.operator:
        raise ConvergenceRefused(
            f"operator integral needs alpha_K < min(-1, -C); alpha_K = {rep.alpha_K:.6g}, C = {phi.growth_C:.6g}")
    if phi.weight != inst.params.k:
        raise ValueError(f"input weight {phi.weight} differs from kernel weight k = {inst.params.k}")


def _domain_integral(field_, phi, psi_centers, R, nu, nv, Y, shift):
    pts, w = domain_grid(nu, nv, Y, shift)
    psi = np.zeros(pts.shape)
    for c in psi_centers:
        psi += bump(distance_array(pts, c), R)
    kv, kt = field_(pts)
    ph = phi(pts)
    integrand = kv * ph * (1 - psi)
    return complex(csum(integrand * w)), float(np.sum(kt * np.abs(ph) * (1 - psi) * w)), pts, integrand


def apply_operator_detail(inst: KernelInstance, phi: InputForm, t1: HPoint,
                          spec: QuadratureSpec | None = None,
                          policy: TruncationPolicy | None = None) -> OperatorResult:
    spec = spec or QuadratureSpec()
    policy = policy or TruncationPolicy(period_N=40, coset_Q=10)
    _check_inputs(inst, phi)
    star, _ = reduce_to_fundamental_domain(t1)
    w_s = effective_stabilizer_order(star)
    R = default_radius(star, spec)
    field_ = KernelField(inst, t1.tau, policy)
    # the periodized sum supplies integer translates, so compare modulo 1
    lifted = field_.orbit - np.round(field_.orbit.real - star.u)
    if float(np.min(distance_array(lifted, star.tau))) > 1e-9:
        raise ValueError("coset box does not contain the element moving tau1 into the domain; raise coset_Q")

    shift = spec.domain_shift
    centers = orbit_points_near_domain(star, 1.5 * R + 0.05) + shift
    Y = spec.cusp_height_Y
    fine, ktail_f, pts, integrand = _domain_integral(field_, phi, centers, R, spec.grid_u, spec.grid_v, Y, shift)
    cu, cv = max(4, (2 * spec.grid_u) // 3), max(4, (2 * spec.grid_v) // 3)
    coarse, _, _, _ = _domain_integral(field_, phi, centers, R, cu, cv, Y, shift)
    quad_err = abs(fine - coarse)

    # cusp tail: |Kern phi| <= A v^(alpha_K + 1 + C + eps) above the top rows
    e = inst.alpha_K + phi.growth_C + ENVELOPE_EPS
    top = pts.imag >= Y / 2
    A = float(np.max(np.abs(integrand[top]) / pts.imag[top] ** (e + 1))) if top.any() else math.inf
    cusp_tail = A * Y ** e / (-e) if e < 0 else math.inf

    # local principal value around tau_s, weighted by the stabilizer order
    center = star.tau + shift
    shells, ktail_pv = [], 0.0
    for nodes, wts in pv_nodes(center, spec, R):
        kv, kt = field_(nodes)
        ph = phi(nodes)
        chi = bump(distance_array(nodes, center), R)
        shells.append(csum(kv * ph * chi * wts))
        ktail_pv += float(np.sum(kt * np.abs(ph) * chi * wts))
    pv = pv_from_shells(shells)
    local = pv.value / w_s

    value = fine + local
    kernel_tail = ktail_f + ktail_pv / w_s
    pv_err = (pv.cauchy_gap + pv.extrapolation) / w_s
    budget = quad_err + cusp_tail + pv_err + kernel_tail
    breakdown = dict(domain=fine, local=local, sector_weight=1.0 / w_s, stabilizer_order=w_s,
                     radius=R, tau_s=star.tau, quadrature=quad_err, cusp_tail=cusp_tail,
                     pv_gap=pv_err, kernel_tail=kernel_tail, pv_partial_sums=pv.partial_sums)
    return OperatorResult(complex(value), float(budget), breakdown)


def apply_operator(inst: KernelInstance, phi: InputForm, t1: HPoint,
                   spec: QuadratureSpec | None = None, policy: TruncationPolicy | None = None):
    res = apply_operator_detail(inst, phi, t1, spec, policy)
    return res.value, res.error_budget


# ---------------------------------------------------------------- scalar oracle

def selberg_transform(inst: KernelInstance, s: float) -> float:
    """h(s) = int_H f(z(i, tau)) Im(tau)^s dmu for the weight-0, q = 0 kernel.

    For t = k = 0 the kernel is a point-pair invariant, so U E(., s) = h(s) E(., s).
    The angular integral of Im^s about i is 2 pi P_{-s}(cosh r), a terminating-free 2F1.
    """
    p = inst.params
    if p.t or p.k or p.q:
        raise ValueError("the scalar transform applies to t = k = 0, q = 0 only")

    def radial(r):
        z = -math.sinh(r / 2) ** 2
        f = complex(inst.solution.value(np.array([z]))[0])
        ang = 2 * math.pi * special.hyp2f1(s, 1 - s, 1, (1 - math.cosh(r)) / 2)
        return f * ang * math.sinh(r)

    lo = 2 * math.asinh(math.sqrt(-inst.floor_z))
    # integrand decays like exp((alpha_K + s) r)
    hi = 2.0 + 80.0 / max(-(inst.alpha_K + s), 0.05)
    kw = dict(epsabs=0, epsrel=1e-11, limit=400)
    re1, _ = integrate.quad(lambda r: radial(r).real, lo, 2.0, **kw)
    re2, _ = integrate.quad(lambda r: radial(r).real, 2.0, hi, **kw)
    im1, _ = integrate.quad(lambda r: radial(r).imag, lo, 2.0, **kw)
    im2, _ = integrate.quad(lambda r: radial(r).imag, 2.0, hi, **kw)
    return complex(re1 + re2, im1 + im2)
