import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weightshift.halfplane import HPoint, ModularMatrix
from weightshift.spectral import WeightParameters
from weightshift.verify import (delta_q_check, fd_laplacian, fd_laplacian_array, radial_check, run_suite,
                                slope_estimator)

from conftest import complex_q


def test_fd_laplacian_power():
    s = 0.7 + 0.2j
    tau = HPoint(0.3, 1.4)
    val = fd_laplacian(0, lambda p: p.v ** s, tau, 1e-3)
    assert abs(val - s * (1 - s) * tau.v ** s) < 1e-6


def test_fd_laplacian_weight_term():
    # f = e^{iu} v^2: f_uu = -f, f_vv = 2 e^{iu}, f_u = i f
    k = 2
    f = lambda z: np.exp(1j * z.real) * z.imag ** 2
    z = 0.2 + 0.9j
    exact = -z.imag ** 2 * (-f(z) + 2 * np.exp(1j * z.real)) + 1j * k * z.imag * 1j * f(z)
    assert abs(fd_laplacian_array(k, f, z, 1e-3) - exact) < 1e-6


def test_fd_laplacian_rejects_crossing():
    with pytest.raises(ValueError):
        fd_laplacian_array(0, lambda p: p, 0.1 + 1e-4j, 1e-3)


def test_richardson_order():
    f = lambda z: np.exp(-z.imag) * np.cos(3 * z.real)
    z = 0.1 + 0.8j
    exact = fd_laplacian_array(0, f, z, 1e-4)
    e1 = abs(fd_laplacian_array(0, f, z, 2e-2) - exact)
    e2 = abs(fd_laplacian_array(0, f, z, 1e-2) - exact)
    assert 3.5 < e1 / e2 < 4.5


def test_radial_examples():
    r = radial_check(WeightParameters(0, 0), 2.0)
    assert abs(r["x"] - 0.5) < 1e-15
    assert r["laplacian_residual"] < 1e-5
    with pytest.raises(ValueError):
        radial_check(WeightParameters(0, 0), 1.0)


@given(st.integers(-3, 3), st.integers(-2, 2), complex_q, st.sampled_from([1.5, 3.0, 7.0]))
def test_radial_potential_identity(t, dk, q, y):
    r = radial_check(WeightParameters(t, t + 2 * dk, q, 0.3), y)
    assert r["potential_residual"] < 1e-11
    assert r["x_residual"] < 1e-12 and r["x_plus_2_residual"] < 1e-12


def test_delta_q_constant_function():
    for t in (0, 2, -2, 4):
        r = delta_q_check(WeightParameters(t, t), 0.2 + 1.1j, -0.3 + 0.6j, F=lambda z: np.ones_like(z))
        assert abs(r["rhs"] - (t / 2) * (1 - t / 2)) < 1e-12
        assert r["residual"] < 1e-4


@given(st.integers(-3, 3), st.integers(-2, 2), complex_q)
def test_delta_q_expansion(t, dk, q):
    g = ModularMatrix(2, 1, 1, 1)
    r = delta_q_check(WeightParameters(t, t + 2 * dk, q), 0.2 + 1.1j, -0.3 + 0.6j, g=g)
    assert r["residual"] < 1e-4
    assert r["invariance_residual"] < 1e-4


def test_slope_estimator_examples():
    x = np.geomspace(1, 1e3, 12)
    s, _ = slope_estimator(np.column_stack([np.log(x), -2 * np.log(x)]))
    assert abs(s + 2) < 1e-12
    s, _ = slope_estimator(np.column_stack([np.log(x), np.full(x.size, 0.3)]))
    assert abs(s) < 1e-12
    with pytest.raises(ValueError):
        slope_estimator(np.column_stack([np.log(x[:5]), np.log(x[:5])]))
    with pytest.raises(ValueError):
        narrow = np.geomspace(1, 50, 12)
        slope_estimator(np.column_stack([np.log(narrow), np.log(narrow)]))


def test_slope_estimator_noise(rng):
    x = np.geomspace(1, 1e3, 40)
    y = x ** -1.5 * np.exp(0.01 * rng.standard_normal(x.size))
    s, err = slope_estimator(np.column_stack([np.log(x), np.log(y)]))
    assert abs(s + 1.5) <= 3 * err


def test_hde_suite_includes_scalar_example():
    rep = run_suite("hde", 42, budget=0.2)
    assert rep.ok
    assert any("(1/2,1/2,1)" in c["property"] and c["pass"] for c in rep.cases)


def test_reports_are_deterministic_and_json():
    a = run_suite("covariance", 42, budget=0.1).to_json(timing=False)
    b = run_suite("covariance", 42, budget=0.1).to_json(timing=False)
    assert a == b
    data = json.loads(a)
    assert set(data) == {"suite", "seed", "cases", "passed", "failed", "wall_ms"}
    case = data["cases"][0]
    assert {"property", "digest", "measured", "expected", "tolerance", "pass", "kind"} <= set(case)


def test_wrong_eigenvalue_is_reported():
    rep = run_suite("eigenvalue", 7, budget=0.2, lambda_shift=0.5)
    checks = [c for c in rep.cases if c["property"].startswith("Delta_t K")]
    assert checks and not any(c["pass"] for c in checks)


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope", 1)
