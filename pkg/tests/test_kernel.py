import math

import numpy as np
import pytest
from hypothesis import assume, given, settings

from weightshift.errors import ConvergenceRefused, DiagonalError, EquivalentPoints
from weightshift.halfplane import HPoint, S, T, automorphy_factor, mobius_apply
from weightshift.kernel import (KernelInstance, TruncationPolicy, automorphic_kernel, automorphic_kernel_detail,
                                eisenstein, eisenstein_fourier, eisenstein_tail_bound, fourier_coefficient,
                                invariant_z, kernel_l1_norm, periodized_K0, seed_K, singularity_fit)
from weightshift.spectral import WeightParameters

from conftest import hpoints, modular_matrices

INST = {
    "scalar": KernelInstance(WeightParameters(0, 0, 0, -3.3)),
    "m1": KernelInstance(WeightParameters(2, 0, 0.3 + 0.1j, -2.0)),
    "even": KernelInstance(WeightParameters(2, 2, 0, -6.0)),
}


def test_invariant_z_examples():
    assert invariant_z(HPoint(0, 1), HPoint(0, 1)) == 0
    assert invariant_z(HPoint(0, 2), HPoint(0, 1)) == -1 / 8


@settings(max_examples=40)
@given(modular_matrices(), hpoints(), hpoints())
def test_seed_covariance(g, a, b):
    assume(abs(a.tau - b.tau) > 1e-2)
    inst = INST["m1"]
    p = inst.params
    lhs = seed_K(inst, mobius_apply(g, a), mobius_apply(g, b))
    rhs = automorphy_factor(p.t, g, a) / automorphy_factor(p.k, g, b) * seed_K(inst, a, b)
    assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


@settings(max_examples=40)
@given(hpoints(), hpoints())
def test_magnitude_symmetry(a, b):
    assume(abs(a.tau - b.tau) > 1e-2)
    inst = INST["m1"]
    k1, k2 = seed_K(inst, a, b), seed_K(inst, b, a)
    assert abs(abs(k1) - abs(k2)) <= 1e-10 * abs(k1)


def test_diagonal_rejected():
    with pytest.raises(DiagonalError):
        seed_K(INST["scalar"], HPoint(0, 1), HPoint(0, 1))


def test_cusp_decay_of_seed_kernel():
    inst = INST["m1"]
    vs = np.geomspace(1e2, 1e4, 12)
    slope = np.polyfit(np.log(vs), np.log(np.abs(inst.K(1j, 0.2 + 1j * vs))), 1)[0]
    assert abs(slope - inst.alpha_K) < 0.05


def test_K0_periodic_within_tail():
    inst = INST["m1"]
    t1, t2 = HPoint(0.13, 1.2), HPoint(0.41, 0.8)
    v0, e0 = periodized_K0(inst, t1, t2)
    v1, e1 = periodized_K0(inst, t1, HPoint(1.41, 0.8))
    assert abs(v1 - v0) <= 2 * max(e0, e1)
    assert e0 > 0


def test_K0_tail_shrinks_with_N():
    inst = INST["scalar"]
    t1, t2 = HPoint(0.13, 1.2), HPoint(0.41, 0.8)
    _, ta = periodized_K0(inst, t1, t2, TruncationPolicy(period_N=100))
    _, tb = periodized_K0(inst, t1, t2, TruncationPolicy(period_N=200))
    assert abs(math.log2(ta / tb) + (2 * inst.alpha_K + 0.1 + 1)) < 0.35


def test_K0_refused_below_threshold():
    with pytest.raises(ConvergenceRefused):
        periodized_K0(KernelInstance(WeightParameters(0, 0, 0, 0.3)), HPoint(0, 1), HPoint(0.3, 2))


def test_eisenstein_coset_sum_matches_fourier_expansion():
    for s in (4.0, 2.0):
        for z in (1j, 0.3 + 1.1j, -0.45 + 0.9j):
            val, tail = eisenstein(HPoint.from_complex(z), s, 40)
            ref = eisenstein_fourier(z, s)
            assert abs(val - ref) <= tail


def test_eisenstein_tail_bound_is_rigorous():
    # the bound at Q must exceed the true remainder, taken from the Fourier expansion
    for s in (4.0, 2.0, 1.2):
        tau = HPoint(0.2, 1.1)
        val, _ = eisenstein(tau, s, 20)
        remainder = abs(eisenstein_fourier(tau.tau, s) - val)
        assert eisenstein_tail_bound(tau.tau, s, 20) >= remainder


def test_eisenstein_stabilizes_as_Q_doubles():
    tau = HPoint(0, 1)
    e10, t10 = eisenstein(tau, 4.0, 10)
    e20, t20 = eisenstein(tau, 4.0, 20)
    assert abs(e20 - e10) <= t10


def test_automorphic_two_sided_automorphy():
    inst = INST["even"]
    t1, t2 = HPoint(0.13, 1.2), HPoint(0.41, 0.8)
    base = automorphic_kernel_detail(inst, t1, t2)
    for g in (S, T):
        img = automorphic_kernel_detail(inst, t1, mobius_apply(g, t2))
        assert abs(img.value * automorphy_factor(2, g, t2) - base.value) <= 2 * max(img.tail, base.tail)
        img = automorphic_kernel_detail(inst, mobius_apply(g, t1), t2)
        assert abs(img.value - automorphy_factor(2, g, t1) * base.value) <= 2 * max(img.tail, base.tail)


def test_primal_and_dual_routes_agree():
    inst = INST["scalar"]
    t1, t2 = HPoint(0.13, 1.2), HPoint(0.41, 1.6)
    p = automorphic_kernel_detail(inst, t1, t2, route="primal")
    d = automorphic_kernel_detail(inst, t1, t2, route="dual")
    assert abs(p.value - d.value) <= 2 * max(p.tail, d.tail)


def test_weight_two_kernel_vanishes_at_i():
    # j_2(S, i) = -1 and S fixes i
    inst = INST["even"]
    val, tail = automorphic_kernel(inst, HPoint(0, 1), HPoint(0.3, 2.0))
    assert abs(val) <= tail


def test_automorphic_refusals():
    with pytest.raises(ConvergenceRefused):
        automorphic_kernel(KernelInstance(WeightParameters(0, 0, 0, 0.1)), HPoint(0, 1.2), HPoint(0.3, 0.9))
    t = HPoint(0.2, 1.3)
    with pytest.raises(EquivalentPoints):
        automorphic_kernel(INST["scalar"], t, mobius_apply(S, t))


def test_fourier_routes_agree_and_L1_bound():
    inst = INST["scalar"]
    t1 = HPoint(0.1, 1.0)
    for v2 in (0.5, 2.0):
        for n in (0, 1):
            a = fourier_coefficient(inst, t1, v2, n, method="wrapped")
            b = fourier_coefficient(inst, t1, v2, n, method="unfolded")
            assert abs(a - b) <= 1e-6 * abs(b)
    c5 = fourier_coefficient(inst, t1, 2.0, 5, method="unfolded")
    assert abs(c5) <= 1.05 * kernel_l1_norm(inst, t1, 2.0)


def test_zero_mode_decay():
    inst = INST["scalar"]
    vs = np.geomspace(100, 1000, 8)
    c0 = [fourier_coefficient(inst, HPoint(0, 1), v, 0, method="unfolded") for v in vs]
    slope = np.polyfit(np.log(vs), np.log(np.abs(c0)), 1)[0]
    assert abs(slope - (inst.alpha_K + 1)) < 0.1


@pytest.mark.parametrize("t,k,order", [(2, 0, -1.0), (0, 2, -1.0), (4, 0, -2.0)])
def test_pole_order(t, k, order):
    inst = KernelInstance(WeightParameters(t, k, 0.3 + 0.1j, 0.13 + 0.4j))
    est, log_flag = singularity_fit(inst, HPoint(0.2, 1.1))
    assert abs(est - order) < 0.1 and not log_flag


def test_log_singularity():
    est, log_flag = singularity_fit(KernelInstance(WeightParameters(0, 0, 0, 0.25)), HPoint(0.2, 1.1))
    assert log_flag and abs(est) < 0.5
