import numpy as np
import pytest

from cylstokes.chebyshev import ChebyshevInterval


def test_nodes_increase_and_hit_endpoints():
    c = ChebyshevInterval(1.0, 3.0, 17)
    assert c.nodes[0] == pytest.approx(1.0) and c.nodes[-1] == pytest.approx(3.0)
    assert np.all(np.diff(c.nodes) > 0)


def test_differentiation_exact_for_polynomials():
    c = ChebyshevInterval(-0.5, 2.0, 12)
    x = c.nodes
    assert np.allclose(c.diff_matrix @ x**7, 7 * x**6, atol=1e-9)


def test_clenshaw_curtis_moments():
    for n in (9, 10):
        c = ChebyshevInterval(0.0, 2.0, n)
        for p in range(n):
            assert abs(np.sum(c.quadrature_weights * c.nodes**p) - 2.0 ** (p + 1) / (p + 1)) < 1e-11 * 2**p


def test_barycentric_interpolation():
    c = ChebyshevInterval(0.0, np.pi, 40)
    pts = np.array([0.0, 0.3, 1.7, np.pi])
    assert np.allclose(c.interpolation_matrix(pts) @ np.sin(c.nodes), np.sin(pts), atol=1e-13)


def test_rejects_degenerate_interval():
    with pytest.raises(ValueError):
        ChebyshevInterval(1.0, 1.0, 8)
