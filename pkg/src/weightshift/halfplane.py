"""Upper half-plane geometry and the action of SL(2, Z).

Scalar entry points work with ``HPoint`` / ``ModularMatrix``; the
underscore-free ``*_array`` helpers take plain complex numpy arrays and are
what the kernel sums use internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

ELLIPTIC_TOL = 1e-9
RHO = complex(0.5, math.sqrt(3) / 2)


@dataclass(frozen=True)
class HPoint:
    u: float
    v: float

    def __post_init__(self):
        if not (self.v > 0) or not math.isfinite(self.v) or not math.isfinite(self.u):
            raise ValueError(f"not a point of the upper half-plane: u={self.u}, v={self.v}")
        object.__setattr__(self, "u", float(self.u))
        object.__setattr__(self, "v", float(self.v))

    @classmethod
    def from_complex(cls, tau) -> "HPoint":
        tau = complex(tau)
        return cls(tau.real, tau.imag)

    @property
    def tau(self) -> complex:
        return complex(self.u, self.v)

    def __complex__(self):
        return self.tau


@dataclass(frozen=True)
class ModularMatrix:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            val = getattr(self, name)
            if int(val) != val:
                raise ValueError(f"entry {name}={val} is not an integer")
            object.__setattr__(self, name, int(val))
        if self.a * self.d - self.b * self.c != 1:
            raise ValueError(f"determinant of {self.entries} is not 1")

    @property
    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: "ModularMatrix") -> "ModularMatrix":
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return ModularMatrix(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    def inverse(self) -> "ModularMatrix":
        return ModularMatrix(self.d, -self.b, -self.c, self.a)

    def __neg__(self) -> "ModularMatrix":
        return ModularMatrix(-self.a, -self.b, -self.c, -self.d)

    def is_identity_up_to_sign(self) -> bool:
        return self.b == 0 and self.c == 0 and abs(self.a) == 1


IDENTITY = ModularMatrix(1, 0, 0, 1)
S = ModularMatrix(0, -1, 1, 0)
T = ModularMatrix(1, 1, 0, 1)


def T_power(n: int) -> ModularMatrix:
    return ModularMatrix(1, n, 0, 1)


def mobius_apply(g: ModularMatrix, tau: HPoint) -> HPoint:
    z = tau.tau
    w = (g.a * z + g.b) / (g.c * z + g.d)
    # the imaginary part is recomputed from v/|cz+d|^2 so that it stays positive
    return HPoint(w.real, tau.v / abs(g.c * z + g.d) ** 2)


def mobius_array(a, b, c, d, tau):
    """Vectorized Mobius action on complex arrays (entries may be arrays)."""
    tau = np.asarray(tau, dtype=complex)
    den = c * tau + d
    w = (a * tau + b) / den
    return w.real + 1j * (tau.imag / np.abs(den) ** 2)


def automorphy_factor(k: int, g: ModularMatrix, tau: HPoint) -> complex:
    """j_k(g, tau) = ((c tau + d)/|c tau + d|)^k."""
    j = g.c * tau.tau + g.d
    return (j / abs(j)) ** int(k)


def automorphy_array(k: int, c, d, tau):
    j = c * np.asarray(tau, dtype=complex) + d
    return (j / np.abs(j)) ** int(k)


def hyperbolic_distance(t1: HPoint, t2: HPoint) -> float:
    return float(distance_array(t1.tau, t2.tau))


def distance_array(t1, t2):
    t1 = np.asarray(t1, dtype=complex)
    t2 = np.asarray(t2, dtype=complex)
    # 2 asinh form: accurate near the diagonal, equivalent to the cosh identity
    return 2.0 * np.arcsinh(np.abs(t1 - t2) / (2.0 * np.sqrt(t1.imag * t2.imag)))


def reduce_to_fundamental_domain(tau: HPoint, max_iter: int = 10_000):
    """Return (tau_star, gamma) with tau_star = gamma tau in the closed standard domain."""
    z = tau.tau
    g = IDENTITY
    for _ in range(max_iter):
        moved = False
        if abs(z.real) > 0.5:
            n = math.floor(z.real + 0.5)
            z = complex(z.real - n, z.imag)
            g = T_power(-n) @ g
            moved = True
        if abs(z) ** 2 < 1.0 - 1e-15:
            z = complex(-z.real, z.imag) / abs(z) ** 2
            g = S @ g
            moved = True
        if not moved:
            return HPoint(z.real, z.imag), g
    raise RuntimeError("fundamental-domain reduction did not terminate; input too close to the real axis")


def reduce_array(tau, max_iter: int = 10_000):
    """Vectorized reduction; returns reduced points only."""
    z = np.array(tau, dtype=complex, copy=True)
    for _ in range(max_iter):
        n = np.floor(z.real + 0.5)
        shift = np.abs(z.real) > 0.5
        z = np.where(shift, z - n, z)
        inv = np.abs(z) ** 2 < 1.0 - 1e-15
        z = np.where(inv, -np.conj(z) / np.where(inv, np.abs(z) ** 2, 1.0), z)
        if not (shift.any() or inv.any()):
            return z
    raise RuntimeError("fundamental-domain reduction did not terminate")


def in_closed_domain(tau: HPoint, tol: float = 1e-12) -> bool:
    return abs(tau.u) <= 0.5 + tol and abs(tau.tau) >= 1.0 - tol


def _search_bound(tau: HPoint) -> int:
    return int(math.ceil(max(10.0, 4.0 * (1.0 + abs(tau.u) + 1.0 / tau.v))))


@lru_cache(maxsize=None)
def _bottom_rows(bound: int):
    rows = [(c, d) for c in range(0, bound + 1) for d in range(-bound, bound + 1)
            if math.gcd(c, d) == 1 and (c > 0 or d == 1)]
    return np.array(rows, dtype=float)


def isolation_radius(tau: HPoint) -> float:
    """Half the minimal distance from tau to the rest of its orbit."""
    star, _ = reduce_to_fundamental_domain(tau)
    rows = _bottom_rows(_search_bound(star))
    c, d = rows[:, 0], rows[:, 1]
    z = star.tau
    den = c * z + d
    # Re(g z) for any top row completing (c, d); other completions differ by integers
    a = np.array([_top_row(int(ci), int(di))[0] for ci, di in zip(c, d)], dtype=float)
    b = np.array([_top_row(int(ci), int(di))[1] for ci, di in zip(c, d)], dtype=float)
    img = (a * z + b) / den
    best = math.inf
    for shift in (-1.0, 0.0, 1.0):
        n = np.round(z.real - img.real) + shift
        pts = img.real + n + 1j * (star.v / np.abs(den) ** 2)
        dist = distance_array(pts, z)
        dist = dist[dist > ELLIPTIC_TOL]
        if dist.size:
            best = min(best, float(dist.min()))
    return 0.5 * best


def effective_stabilizer_order(tau: HPoint, tol: float = ELLIPTIC_TOL) -> int:
    star, _ = reduce_to_fundamental_domain(tau)
    z = star.tau
    if distance_array(z, 1j) < tol:
        return 2
    if distance_array(z, RHO) < tol or distance_array(z, RHO - 1) < tol:
        return 3
    return 1


def _top_row(c: int, d: int):
    if c == 0:
        return (1, 0) if d == 1 else (-1, 0)
    a = pow(d, -1, c) if c > 1 else 0
    b = (a * d - 1) // c
    return a, b


def coset_representatives(Q: int):
    """Representatives of Gamma_inf \\ Gamma with |c|, |d| <= Q, ordered by (c, d)."""
    if Q < 1:
        raise ValueError("Q must be at least 1")
    return [ModularMatrix(*_top_row(c, d), c, d) for c, d in _coset_rows(int(Q))]


@lru_cache(maxsize=64)
def _coset_rows(Q: int):
    rows = [(0, 1)]
    rows += [(c, d) for c in range(1, Q + 1) for d in range(-Q, Q + 1) if math.gcd(c, d) == 1]
    return tuple(rows)


@lru_cache(maxsize=64)
def coset_arrays(Q: int):
    """(a, b, c, d) integer arrays of the coset representatives, in order."""
    mats = coset_representatives(Q)
    return tuple(np.array([getattr(m, x) for m in mats], dtype=float) for x in "abcd")


def polar_point(center, r, theta):
    """Point at hyperbolic distance r and angle theta from center (geodesic polar frame)."""
    center = complex(center)
    w = np.tanh(np.asarray(r, dtype=float) / 2.0) * np.exp(1j * np.asarray(theta, dtype=float))
    return (center - np.conj(center) * w) / (1.0 - w)


def orbit_points_near_domain(tau: HPoint, reach: float):
    """Orbit points of tau lying within hyperbolic distance ``reach`` of the closed domain.

    Used to build Gamma-invariant cut-off functions on the fundamental domain.
    """
    star, _ = reduce_to_fundamental_domain(tau)
    rows = _bottom_rows(12)
    out = []
    for c, d in rows:
        a, b = _top_row(int(c), int(d))
        img = mobius_apply(ModularMatrix(a, b, int(c), int(d)), star)
        for n in range(-3, 4):
            p = complex(img.u + n, img.v)
            if _distance_to_domain(p) <= reach:
                out.append(p)
    pts = np.array(out)
    # de-duplicate stabilizer images
    keep = []
    for p in pts:
        if all(abs(p - q) > 1e-9 for q in keep):
            keep.append(p)
    return np.array(keep)


def _distance_to_domain(p: complex) -> float:
    # crude upper bound on distance: sample the boundary of the truncated domain
    if abs(p.real) <= 0.5 and abs(p) >= 1.0:
        return 0.0
    u = np.linspace(-0.5, 0.5, 201)
    arc = u + 1j * np.sqrt(1 - u ** 2)
    side = np.concatenate([-0.5 + 1j * np.geomspace(math.sqrt(3) / 2, 50, 200),
                           0.5 + 1j * np.geomspace(math.sqrt(3) / 2, 50, 200)])
    return float(distance_array(p, np.concatenate([arc, side])).min())
