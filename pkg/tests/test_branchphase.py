import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from weightshift.branchphase import (CovariantInputs, aux_Q, covariance_residual, covariant_P, logderiv_P,
                                     phase_factors, principal_power, total_phase)
from weightshift.errors import DiagonalError
from weightshift.halfplane import IDENTITY, HPoint, ModularMatrix, T, mobius_apply

from conftest import complex_q, hpoints, modular_matrices

weights = st.integers(-4, 4)


def test_principal_power_examples():
    assert principal_power(1, 0.3 + 2j) == 1
    assert abs(principal_power(-1 + 0j, 0.5) - 1j) < 1e-15
    assert abs(principal_power(2j, 2) + 4) < 1e-14


def test_phase_family_with_bottom_row_zero_minus_one():
    t1, t2 = HPoint(0.2, 1.1), HPoint(-0.4, 0.6)
    *_, raw = phase_factors(ModularMatrix(-1, 3, 0, -1), t1, t2, 1, 0)
    assert raw.n_g == 1
    ec, em, ed, raw = phase_factors(IDENTITY, t1, t2, 3, 1)
    assert (raw.n_g, raw.n_mult, raw.n_d) == (0, 0, 0) and ec == em == ed == 1


@given(modular_matrices(), hpoints(), hpoints(), weights, weights)
def test_phase_product_trivial_for_equal_parity(g, a, b, t, k):
    assume(a.tau != b.tau)
    k = k if (t - k) % 2 == 0 else k + 1
    assert total_phase(g, a, b, t, k) == 1


def test_P_examples():
    a, b = HPoint(0.3, 0.9), HPoint(-1.2, 2.5)
    assert covariant_P(a, b, CovariantInputs(0, 0, 0)) == 1
    val = covariant_P(HPoint(0, 1), HPoint(0, 2), CovariantInputs(2, 2, 0))
    assert abs(val - 8 / 9) < 1e-14


@given(modular_matrices(), hpoints(), hpoints(), weights, weights, complex_q,
       st.sampled_from(["compact", "factored"]))
def test_P_covariance(g, a, b, t, k, q, form):
    assume(abs(a.tau - b.tau) > 1e-3)
    res = covariance_residual(g, a, b, CovariantInputs(t, k, q), form)
    assert res < 1e-10


@given(hpoints(), hpoints(), weights, weights, complex_q)
def test_compact_and_factored_agree(a, b, t, k, q):
    assume(abs(a.tau - b.tau) > 1e-3)
    inp = CovariantInputs(t, k, q)
    p1, p2 = covariant_P(a, b, inp, "compact"), covariant_P(a, b, inp, "factored")
    assert abs(p1 - p2) <= 1e-10 * abs(p1)


def test_logderiv_examples():
    a, b = HPoint(0.2, 1.4), HPoint(-0.5, 0.7)
    _, _, d2 = logderiv_P(a, b, CovariantInputs(2, 0, 0))
    assert abs(d2 + 1 / (4 * a.v ** 2)) < 1e-14
    assert logderiv_P(a, b, CovariantInputs(0, 0, 0)) == (0, 0, 0)
    with pytest.raises(DiagonalError):
        logderiv_P(a, a, CovariantInputs(2, 0, 0))


def test_logderiv_against_finite_difference():
    inp = CovariantInputs(2, 0, 1)
    t1, t2 = HPoint(0, 1), HPoint(0, 2)
    h = 1e-5

    def P(z):
        return covariant_P(HPoint.from_complex(z), t2, inp)

    # log of a ratio stays off the branch cut
    z = t1.tau
    du = cmath.log(P(z + h) / P(z - h)) / (2 * h)
    dv = cmath.log(P(z + 1j * h) / P(z - 1j * h)) / (2 * h)
    d1, d1bar, _ = logderiv_P(t1, t2, inp)
    assert abs(d1 - (du - 1j * dv) / 2) < 1e-6
    assert abs(d1bar - (du + 1j * dv) / 2) < 1e-6


@given(modular_matrices(), hpoints(), hpoints(), weights, weights, complex_q)
def test_aux_Q_weight_two_covariance(g, a, b, t, k, q):
    assume(abs(a.tau - b.tau) > 1e-3)
    inp = CovariantInputs(t, k, q)
    Q1, Q2 = aux_Q(a, b, inp)
    G1, G2 = aux_Q(mobius_apply(g, a), mobius_apply(g, b), inp)
    j = g.c * a.tau + g.d
    assert abs(G1 - j ** 2 * Q1) <= 1e-8 * max(1.0, abs(j ** 2 * Q1))
    assert abs(G2 - j.conjugate() ** 2 * Q2) <= 1e-8 * max(1.0, abs(j ** 2 * Q2))


def test_aux_Q2_vanishes_without_q():
    _, Q2 = aux_Q(HPoint(0.1, 1), HPoint(0.5, 3), CovariantInputs(3, 1, 0))
    assert Q2 == 0
