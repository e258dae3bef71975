import numpy as np
import pytest

from cylstokes.symbols import (
    boundary_symbol_a0,
    def_symbols,
    double_layer_symbol,
    double_layer_symbol_composed,
    jump_coefficient,
    jump_coefficient_halfspace,
    laplace_double_layer_symbol,
    pressure_single_layer_symbol,
    stokes_boundary_symbols,
    stokes_coefficients,
    stokes_symbol,
    stokes_symbol_inverse,
    velocity_single_layer_symbol,
)

from oracles import LAPLACE_DOUBLE_LAYER_LIMITS, stokes_block

NU = np.array([1.0, 0.0])
XI_T = np.array([0.0, 1.3])


def test_symbol_matches_oracle_and_inverse():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n = int(rng.integers(2, 4))
        xi = rng.normal(size=n)
        v0 = rng.uniform(0, 10)
        assert np.allclose(stokes_symbol(xi, v0), stokes_block(xi, v0), atol=1e-14)
        assert np.max(np.abs(stokes_symbol(xi, v0) @ stokes_symbol_inverse(xi, v0) - np.eye(n + 1))) < 1e-12


def test_zero_covector_and_negative_v0_rejected():
    with pytest.raises(ValueError):
        stokes_symbol(np.zeros(2), 1.0)
    with pytest.raises(ValueError):
        stokes_coefficients(-1.0)


def test_deformation_symbol_adjoint_identity():
    xi = np.array([0.7, -1.1])
    d = def_symbols(xi)
    lhs = 2 * d["def_star"] @ d["def"]
    assert np.allclose(lhs, np.dot(xi, xi) * np.eye(2) + np.outer(xi, xi), atol=1e-14)


def test_laplace_double_layer_limits():
    rep = boundary_symbol_a0(laplace_double_layer_symbol(-NU), XI_T, NU)
    assert abs(rep.a0[0, 0]) < 1e-10
    assert rep.a0_plus[0, 0].real == pytest.approx(LAPLACE_DOUBLE_LAYER_LIMITS[0], abs=1e-10)
    assert rep.a0_minus[0, 0].real == pytest.approx(LAPLACE_DOUBLE_LAYER_LIMITS[1], abs=1e-10)


def test_halfspace_convention_flips_with_orientation():
    a = double_layer_symbol(1.0, NU)
    assert np.allclose(jump_coefficient(a, NU), jump_coefficient_halfspace(a, -NU))
    assert np.allclose(jump_coefficient(a, NU), -jump_coefficient_halfspace(a, NU))


def test_jump_coefficient_refuses_even_symbols():
    with pytest.raises(ValueError):
        jump_coefficient(velocity_single_layer_symbol(1.0), NU)


@pytest.mark.parametrize("v0", [0.0, 1.0, 5.0])
def test_quadrature_reproduces_closed_forms(v0):
    cf = stokes_boundary_symbols(v0, XI_T, NU)
    K = boundary_symbol_a0(double_layer_symbol(v0, NU), XI_T, NU)
    A = boundary_symbol_a0(velocity_single_layer_symbol(v0), XI_T, NU)
    C = boundary_symbol_a0(pressure_single_layer_symbol(v0), XI_T, NU)
    assert np.max(np.abs(K.a0 - cf["double_layer_K"])) < 1e-8
    assert np.max(np.abs(K.jc + 1j * np.eye(2))) < 1e-12
    assert np.max(np.abs(A.a0 - cf["single_layer_velocity"])) < 1e-8
    assert np.max(np.abs(C.a0 - cf["single_layer_pressure"])) < 1e-8
    _, g = stokes_coefficients(v0)
    assert np.allclose(C.a0_plus - C.a0, (-g / 2 * NU)[None, :], atol=1e-12)


@pytest.mark.parametrize("v0", [0.0, 2.0])
def test_double_layer_closed_form_equals_composition(v0):
    rng = np.random.default_rng(3)
    a, b = double_layer_symbol(v0, NU), double_layer_symbol_composed(v0, NU)
    for xi in rng.normal(size=(10, 2)):
        assert np.allclose(a(xi), b(xi), atol=1e-13)


def test_single_layer_boundary_symbol_is_hermitian_positive():
    cf = stokes_boundary_symbols(1.0, XI_T, NU)
    s = cf["single_layer_velocity"]
    assert np.allclose(s, s.conj().T)
    assert np.all(np.linalg.eigvalsh(s) > 0)
