import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weightshift.hyp2f1 import (HypSeriesSpec, SubdominantSolution, _series, basis_at_infinity, f_subdominant,
                                gauss_2f1, hde_residual, z_ode_residual)
from weightshift.spectral import PChoice, WeightParameters, derive

cparam = st.builds(complex, st.floats(-3, 3), st.floats(-2, 2))


def mp_f(prm: WeightParameters, z: float):
    """Independent oracle: f = (1-z)^p z^{-a} 2F1(a, a-c+1; a-b+1; 1/z) in 40-digit arithmetic."""
    d = derive(prm)
    with mp.workdps(40):
        a, b, c, p = (mp.mpc(x) for x in (d.a, d.b, d.c_hde, d.p))
        zz = mp.mpf(z)
        zpow = mp.exp(-a * (mp.log(-zz) + 1j * mp.pi))
        return complex((1 - zz) ** p * zpow * mp.hyp2f1(a, a - c + 1, a - b + 1, 1 / zz))


def test_gauss_examples():
    assert gauss_2f1(HypSeriesSpec(0.3, 1.2j, 2.5), 0.0)[0] == 1
    val, _ = gauss_2f1(HypSeriesSpec(1, 1, 2), -1.0)
    assert abs(val - math.log(2)) < 1e-13


@given(cparam, cparam, st.floats(0.5, 4), st.floats(-0.95, 0.45))
def test_gauss_against_mpmath(a, b, c, x):
    val, _ = gauss_2f1(HypSeriesSpec(a, b, c), x)
    ref = complex(mp.hyp2f1(a, b, c, x))
    assert abs(val - ref) <= 1e-11 * max(1.0, abs(ref))
    assert abs(gauss_2f1(HypSeriesSpec(b, a, c), x)[0] - val) <= 1e-13 * max(1.0, abs(val))


def test_series_solves_hde():
    d = derive(WeightParameters(0, 2, 0.3, -2.0))
    w, wp, wpp, _ = _series(d.a, d.b, d.c_hde, np.array([-0.3]), derivs=2)
    assert abs(hde_residual(d, -0.3, w[0], wp[0], wpp[0])) < 1e-10
    assert hde_residual(d, -0.3, 0, 0, 0) == 0


def test_basis_example_half_half_one():
    d = derive(WeightParameters(0, 0, 0, 0.25))
    val = basis_at_infinity(d, -1e6, "F1")
    ref = -1j * 1e-3 * complex(mp.hyp2f1(0.5, 0.5, 1, -1e-6))
    assert abs(val - ref) < 1e-16
    assert abs(val - (-1j * 1e-3 * (1 - 2.5e-7))) < 1e-15
    with pytest.raises(ValueError):
        basis_at_infinity(d, -1e6, "F2")


@pytest.mark.parametrize("prm", [WeightParameters(0, 0, 0, -3.3), WeightParameters(2, 0, 0.2, -4 + 0.5j),
                                 WeightParameters(0, 2, 0.3, 1.7)])
def test_basis_slopes(prm):
    d = derive(prm)
    zs = -np.geomspace(1e3, 1e6, 16)
    for branch, e in (("F1", d.a), ("F2", d.b)):
        y = np.abs(basis_at_infinity(d, zs, branch))
        slope = np.polyfit(np.log(-zs), np.log(y), 1)[0]
        assert abs(slope + e.real) < 0.05


PARAMS = [WeightParameters(0, 0, 0, 0.25), WeightParameters(2, 0, 0.3 + 0.1j, -2.0),
          WeightParameters(0, 2, 0.2, -1.5 + 0.3j), WeightParameters(4, 0, 0.5, -2.0),
          WeightParameters(1, 3, -0.4j, 3.0 - 1j)]


@pytest.mark.parametrize("prm", PARAMS)
def test_subdominant_against_mpmath(prm):
    sol = SubdominantSolution(prm, ode_tol=1e-13, floor_z=-1e-12)
    for z in (-50.0, -8.0, -3.0, -0.7, -0.05, -1e-4):
        val, _ = f_subdominant(sol, z)
        ref = mp_f(prm, z)
        assert abs(val - ref) <= 1e-11 * max(1.0, abs(ref)), z


@pytest.mark.parametrize("prm", PARAMS)
def test_subdominant_solves_z_equation(prm):
    sol = SubdominantSolution(prm, ode_tol=1e-13)
    for z in (-0.3, -3.0, -30.0):
        f, fp = sol.evaluate(np.array([z]))
        res, scale = z_ode_residual(prm, z, f[0], fp[0], sol.second_derivative(np.array([z]))[0])
        assert abs(res) / scale < 1e-8


def test_exponent_zero_solution_near_diagonal():
    # m > 0: f ~ const + c z^m, so log|f| flattens as z -> 0-
    prm = WeightParameters(4, 0, 0.3 + 0.2j, -1.7)
    sol = SubdominantSolution(prm, ode_tol=1e-13, floor_z=-1e-12)
    zs = -np.geomspace(1e-8, 1e-6, 10)
    slope = np.polyfit(np.log(-zs), np.log(np.abs(sol.value(zs))), 1)[0]
    assert abs(slope) < 0.05


def test_both_p_choices_span_same_space():
    prm = WeightParameters(2, 0, 0.3, -2.5)
    f_q = SubdominantSolution(prm, derive(prm, PChoice.ROOT_Q), ode_tol=1e-13)
    f_t = SubdominantSolution(prm, derive(prm, PChoice.ROOT_TK2Q), ode_tol=1e-13)
    zs = np.array([-0.5, -2.0, -12.0, -40.0])
    a, b = f_q.value(zs), f_t.value(zs)
    # both are the decaying solution of one equation, hence proportional
    ratio = b / a
    assert np.max(np.abs(ratio - ratio[0])) < 1e-9 * abs(ratio[0])


def test_evaluation_domain():
    sol = SubdominantSolution(WeightParameters(0, 0, 0, -3.0))
    with pytest.raises(ValueError):
        sol.evaluate(np.array([0.0]))
