import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from obslab.quadrature import QuadratureFailure, adaptive, cumulative_panels, gauss_panel


def test_polynomial_exactness():
    # 20-point Gauss integrates degree-39 polynomials exactly
    assert gauss_panel(lambda x: x**39 + x**4, -1.0, 2.0) == pytest.approx(
        (2.0**40 - 1.0) / 40 + (2.0**5 + 1.0) / 5, rel=1e-13)


def test_adaptive_oscillatory():
    val = adaptive(lambda x: np.sin(50.0 * x), 0.0, math.pi, rel_tol=1e-10)
    assert val == pytest.approx((1 - math.cos(50 * math.pi)) / 50.0, abs=1e-12)


def test_adaptive_depth_cap():
    with pytest.raises(QuadratureFailure):
        adaptive(lambda x: np.abs(x) ** -0.9, 0.0, 1.0, rel_tol=1e-13, depth_cap=6)


@given(st.floats(0.2, 3.0), st.floats(-2.0, 2.0))
def test_adaptive_gaussian_moments(s, mu):
    val = adaptive(lambda x: np.exp(-((x - mu) / s) ** 2), mu - 12 * s, mu + 12 * s)
    assert val == pytest.approx(math.sqrt(math.pi) * s, rel=1e-8)


def test_cumulative_matches_adaptive():
    pts = np.linspace(0.0, 2.0, 257)
    cum = cumulative_panels(lambda t: np.exp(-t * t), pts)
    ref = adaptive(lambda t: np.exp(-t * t), 0.0, 2.0)
    assert cum[-1] == pytest.approx(ref, rel=1e-12)
    assert np.all(np.diff(cum) > 0)
