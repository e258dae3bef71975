import numpy as np
import pytest

from cylstokes.cylinder import (
    PotentialPair,
    assemble_xi_closed_torus,
    assemble_xi_hat,
    def_mode_matrices,
    green_identity_check,
    invertibility_scan,
    kernel_report,
    mode_block,
)
from cylstokes.spectral import Arc, StateField, make_grid

from oracles import CIRCLE_KERNEL_DIM_AT_ZERO, TORUS_KERNEL_DIMS, stokes_block


def _random_state(grid, rng, band=6):
    c = np.zeros((3, grid.n_modes), complex)
    sel = np.abs(grid.band_indices[:, 0]) <= band
    c[:, sel] = rng.normal(size=(3, sel.sum())) + 1j * rng.normal(size=(3, sel.sum()))
    return StateField.from_stacked(grid, grid.from_modes(c))


def test_potentials_validation():
    g = make_grid(8)
    bad = np.zeros((8, 2, 2), complex)
    bad[:, 0, 1] = 1j
    with pytest.raises(ValueError):
        PotentialPair(g, bad, np.zeros(8))
    with pytest.raises(ValueError):
        PotentialPair(g, -np.ones((8, 2, 2)) * np.eye(2), np.zeros(8), ("nonnegative",))
    p = PotentialPair.constant(g, 1.0, 0.0)
    assert p.is_constant and p.v_positive_somewhere() and not p.v0_positive_somewhere()


def test_def_packing_is_isometric():
    rng = np.random.default_rng(0)
    xi = rng.normal(size=(5, 2))
    D = def_mode_matrices(xi)
    for j in range(5):
        gram = 2 * D[j].conj().T @ D[j]
        assert np.allclose(gram, stokes_block(xi[j], 0.0)[:2, :2], atol=1e-13)


def test_mode_block_matches_oracle():
    xi = np.array([[0.4, -1.2]])
    assert np.allclose(mode_block(xi, 0.5 * np.eye(2)[None], 2.0)[0],
                       stokes_block(xi[0], 2.0) + np.diag([0.5, 0.5, 0.0]), atol=1e-14)


@pytest.mark.parametrize("tau", [0.0, 1.5])
def test_indicial_matrix_hermitian_variable_potentials(tau):
    g = make_grid(16)
    p = PotentialPair.scalar(g, lambda x: 1 + 0.5 * np.cos(x), lambda x: 1 + 0.2 * np.sin(x))
    assert assemble_xi_hat(tau, g, p).hermitian_defect() < 1e-13


def test_constant_potential_scan_matches_dense_svd():
    g = make_grid(16)
    p = PotentialPair.constant(g, 1.0, 1.0)
    fast = invertibility_scan([2.0], g, p)[0]
    dense = kernel_report(assemble_xi_hat(2.0, g, p).matrix, 2.0)
    assert fast.min_singular_value == pytest.approx(dense.min_singular_value, rel=1e-10)


def test_kernel_at_zero_frequency():
    g = make_grid(32)
    rep = kernel_report(assemble_xi_hat(0.0, g, PotentialPair.constant(g, 0.0, 0.0)).matrix)
    assert rep.kernel_dim == CIRCLE_KERNEL_DIM_AT_ZERO and rep.gap >= 1e4


@pytest.mark.parametrize("case", sorted(TORUS_KERNEL_DIMS))
def test_closed_torus_kernel_cases(case):
    g = make_grid(16, d=2)
    _, rep = assemble_xi_closed_torus(g, PotentialPair.constant(g, case[0], case[1], 2))
    assert rep.kernel_dim == TORUS_KERNEL_DIMS[case]


def test_closed_torus_dense_route_for_variable_potentials():
    g = make_grid(8, d=2)
    v = lambda x, y: 1 + 0.3 * np.cos(x)
    _, rep = assemble_xi_closed_torus(g, PotentialPair.scalar(g, v, lambda x, y: 0 * x, 2))
    assert rep.kernel_dim == 1


@pytest.mark.parametrize("tau", [0.0, 1.0, 3.0])
def test_green_identity_full_circle_and_arc(tau):
    rng = np.random.default_rng(int(tau) + 7)
    g = make_grid(32)
    p = PotentialPair.scalar(g, lambda x: 1 + 0.5 * np.cos(x), lambda x: 1 + 0.3 * np.sin(x))
    U, W = _random_state(g, rng), _random_state(g, rng)
    full = green_identity_check(tau, U, W, p)
    assert full.residual < 1e-9 * max(1, abs(full.lhs))
    assert full.boundary_value == 0
    part = green_identity_check(tau, U, W, p, Arc(0.5, 2.5))
    assert part.residual < 1e-6 * max(1, abs(part.lhs))
    assert abs(part.boundary_value) > 1e-6
