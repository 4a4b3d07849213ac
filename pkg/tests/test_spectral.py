import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weightshift.errors import ParityError
from weightshift.spectral import (Degeneracy, PChoice, WeightParameters, candidate_alphas, convergence_report,
                                  derive, indicial_exponents, p_roots, potential_Cf, potential_Cf_x)

from conftest import complex_q

lambdas = st.builds(complex, st.floats(-6, 6), st.floats(-3, 3))


@st.composite
def params(draw):
    t = draw(st.integers(-4, 4))
    k = t + 2 * draw(st.integers(-2, 2))
    return WeightParameters(t, k, draw(complex_q), draw(lambdas))


def test_parity_enforced():
    with pytest.raises(ParityError):
        WeightParameters(3, 2)


def test_scalar_example():
    d = derive(WeightParameters(0, 0, 0, 0.25))
    assert (d.a, d.b, d.c_hde) == (0.5, 0.5, 1)
    assert d.degeneracy is Degeneracy.DEGENERATE_LOG


@given(params(), st.sampled_from(list(PChoice)))
def test_ab_relation(prm, choice):
    d = derive(prm, choice)
    assert abs((d.a - d.b) ** 2 - (1 - 4 * prm.lambda_K)) <= 1e-12 * max(1, abs(1 - 4 * prm.lambda_K))


@given(params())
def test_equal_weights_give_c_one(prm):
    prm = WeightParameters(prm.t, prm.t, prm.q, prm.lambda_K)
    assert derive(prm).c_hde == 1


@given(params(), complex_q)
def test_alpha_K_independent_of_p_and_q(prm, dq):
    a = derive(prm, PChoice.ROOT_Q).alpha_K
    assert abs(a - derive(prm, PChoice.ROOT_TK2Q).alpha_K) < 1e-12
    assert abs(a - derive(prm.with_q(prm.q + dq)).alpha_K) < 1e-12


@given(params())
def test_candidate_exponents_sum(prm):
    a1, a2 = candidate_alphas(prm)
    assert abs(a1 + a2 + 1) < 1e-12
    assert derive(prm).alpha_K == pytest.approx(min(a1, a2), abs=1e-12)


def test_indicial_examples():
    assert set(indicial_exponents(WeightParameters(4, 2), "Zero")) == {0, 1}
    r = indicial_exponents(WeightParameters(0, 0, 0, 0.25), "Infinity")
    assert abs(r[0] - 0.5) < 1e-8 and abs(r[1] - 0.5) < 1e-8


@given(params())
def test_exponents_at_one_are_p_roots(prm):
    key = lambda z: (round(z.real, 9), round(z.imag, 9))
    assert sorted(map(key, indicial_exponents(prm, "One"))) == sorted(map(key, p_roots(prm)))


@given(params(), st.floats(-50, 0))
def test_potential_forms(prm, z):
    assert abs(potential_Cf(z, prm) - potential_Cf_x(-4 * z, prm)) < 1e-11 * max(1, abs(prm.q) * 10)


def test_potential_examples():
    assert np.all(potential_Cf(np.linspace(-5, 0, 7), WeightParameters(2, 0, 0)) == 0)
    prm = WeightParameters(2, 4, 0.3 - 0.1j)
    assert abs(potential_Cf(0.0, prm) - prm.q * (1 - 1 + 2)) < 1e-15


def test_convergence_flags():
    # lambda_K = -3 for t = k = 0 gives a = (1 + sqrt 13)/2, alpha_K = -2.30
    rep = convergence_report(WeightParameters(0, 0, 0, -3.0), 1.0)
    assert rep.automorphic and rep.operator and rep.periodized
    rep = convergence_report(WeightParameters(0, 0, 0, 0.3))
    assert rep.alpha_K == pytest.approx(-0.5) and not rep.automorphic
    rep = convergence_report(WeightParameters(2, 0, 0, -1.0))
    assert rep.local_abs_conv and not rep.pv_required
    assert convergence_report(WeightParameters(4, 0, 0, -1.0)).pv_required


def test_operator_flag_threshold():
    prm = WeightParameters(0, 0, 0, -1.3 * 2.3)  # a = 2.3, alpha_K = -2.3
    assert convergence_report(prm, 2.2).operator
    assert not convergence_report(prm, 2.4).operator
