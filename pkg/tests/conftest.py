import math

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from weightshift.halfplane import HPoint, ModularMatrix, _top_row

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def hpoints(draw, umax=2.0, vmin=0.2, vmax=4.0):
    u = draw(st.floats(-umax, umax))
    logv = draw(st.floats(math.log(vmin), math.log(vmax)))
    return HPoint(u, math.exp(logv))


@st.composite
def modular_matrices(draw, bound=7):
    c = draw(st.integers(0, bound))
    if c == 0:
        sign = draw(st.sampled_from([1, -1]))
        return ModularMatrix(sign, draw(st.integers(-5, 5)) * sign, 0, sign)
    d = draw(st.integers(-bound, bound).filter(lambda d: math.gcd(c, d) == 1))
    a, b = _top_row(c, d)
    n = draw(st.integers(-3, 3))
    g = ModularMatrix(a + n * c, b + n * d, c, d)
    return -g if draw(st.booleans()) else g


complex_q = st.builds(complex, st.floats(-0.8, 0.8), st.floats(-0.8, 0.8))


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(1234)
