import numpy as np
import pytest

from cylstokes.bvp import (
    AxialWindow,
    BoundaryData,
    ConstantsEstimate,
    CylinderDomain,
    ManufacturedState,
    NavierStokesDivergence,
    advection,
    estimate_product_constant,
    estimate_solution_constant,
    sobolev_norm,
    solve_dirichlet_bie,
    solve_dirichlet_direct,
    solve_navier_stokes,
    solve_nonhomogeneous,
    stokes_residual,
)
from cylstokes.cylinder import PotentialPair
from cylstokes.spectral import Arc, make_grid

GRID = make_grid(64)
ONES = PotentialPair.constant(GRID, 1.0, 1.0)
ARC = Arc(0.0, np.pi)
WINDOW = AxialWindow(12.0, 128)
STATE = ManufacturedState((((1.0, 1, 0.3, 0.0, 1.0),), ((0.5, 2, -0.2, 0.5, 1.2),), ((0.7, 1, 1.0, -0.3, 0.9),)))


def test_axial_transform_round_trip_and_derivative():
    t = WINDOW.nodes
    g = np.exp(-t**2 / 2)
    assert np.allclose(WINDOW.inverse(WINDOW.forward(g)), g, atol=1e-14)
    assert np.allclose(WINDOW.derivative(g), -t * g, atol=1e-10)
    c = WINDOW.forward(np.exp(1j * WINDOW.taus[3] * t))
    assert abs(c[3] - 1) < 1e-12


def test_window_rejects_odd_sizes():
    with pytest.raises(ValueError):
        AxialWindow(5.0, 31)


def test_boundary_data_decay_check():
    BoundaryData.gaussian(WINDOW, np.eye(2), width=1.0).check_window()
    with pytest.raises(ValueError):
        BoundaryData.gaussian(WINDOW, np.eye(2), width=6.0).check_window()


def test_boundary_l2_norm_matches_trapezoid():
    f = BoundaryData.gaussian(WINDOW, [[1.0, 0.0], [0.5, 0.5]])
    direct = np.sqrt(np.sum(np.abs(f.values) ** 2) * WINDOW.spacing)
    assert f.norm(0.0) == pytest.approx(direct, rel=1e-12)
    assert f.norm(1.5) > f.norm(0.5) > f.norm(0.0)


def test_torus_norm_routes_agree():
    rng = np.random.default_rng(0)
    n, lengths = 16, (2 * np.pi, 3.0)
    c = np.zeros((n, n), complex)
    for a, b in rng.integers(-5, 6, size=(8, 2)):
        c[a % n, b % n] = rng.normal() + 1j * rng.normal()
    vals = np.fft.ifft2(c) * n * n
    for m in range(0, 4):
        assert sobolev_norm(vals, m, lengths) == pytest.approx(sobolev_norm(vals, m, lengths, "derivatives"),
                                                               rel=1e-12)
    x = np.arange(32) * 2 * np.pi / 32
    assert sobolev_norm(np.exp(1j * x), 1, (2 * np.pi,)) == pytest.approx(np.sqrt(2 * 2 * np.pi), rel=1e-13)
    assert sobolev_norm(np.exp(1j * x), -1, (2 * np.pi,)) == pytest.approx(np.sqrt(np.pi), rel=1e-13)


def test_subdomain_norm_analytic():
    dom = CylinderDomain.for_arc(ARC, AxialWindow(12.0, 256), 24)
    x, t = dom.cheb.nodes[:, None], dom.window.nodes[None, :]
    u = x * np.exp(-t**2 / 2)
    rp = np.sqrt(np.pi)
    exact = (np.pi**3 / 3) * rp + np.pi * rp + (np.pi**3 / 3) * rp / 2
    assert sobolev_norm(u, 1, dom) ** 2 == pytest.approx(exact, rel=1e-10)
    with pytest.raises(ValueError):
        sobolev_norm(u, 1, dom, route="multiplier")


def test_manufactured_forcing_consistent_with_residual():
    dom = CylinderDomain.for_arc(ARC, WINDOW, 48)
    p = PotentialPair.scalar(GRID, lambda x: 1 + 0.5 * np.cos(x), lambda x: 1 + 0.3 * np.sin(x))
    h, r = STATE.forcing(p)
    x, t = dom.cheb.nodes[:, None], dom.window.nodes[None, :]
    forcing = np.concatenate([h(x, t), r(x, t)[None]])
    rv, rp = stokes_residual(STATE.on_domain(dom), p, forcing)
    assert rv < 1e-8 and rp < 1e-10


def test_direct_solver_recovers_manufactured_state_with_variable_potentials():
    p = PotentialPair.scalar(GRID, lambda x: 1 + 0.5 * np.cos(x), lambda x: 1 + 0.3 * np.sin(x))
    h, r = STATE.forcing(p)
    fld, rep = solve_nonhomogeneous(h, r, STATE.boundary_data(ARC, WINDOW), p, ARC, method="direct", n_nodes=40)
    exact = STATE.on_domain(fld.domain)
    assert fld.interior_l2(exact) / exact.interior_l2() < 1e-6
    assert rep.residual < 1e-6 and rep.extras["convergence_check"] < 1e-6


def test_full_cylinder_route_needs_constant_potentials():
    p = PotentialPair.scalar(GRID, lambda x: 1 + 0.5 * np.cos(x), 1.0)
    h, r = STATE.forcing(p)
    with pytest.raises(NotImplementedError):
        solve_nonhomogeneous(h, r, STATE.boundary_data(ARC, WINDOW), p, ARC, method="bie")


def test_bie_and_direct_agree():
    f = BoundaryData.gaussian(WINDOW, [[1.0, 0.5], [-0.3, 0.8]])
    ref, rd = solve_dirichlet_direct(f, ONES, ARC, n_nodes=40)
    fld, rb = solve_dirichlet_bie(f, ONES, ARC, "double", n_nodes=40, threads=4)
    assert fld.interior_l2(ref) / ref.interior_l2() < 1e-5
    assert rb.boundary_mismatch < 1e-8 and rb.residual < 1e-6
    assert rb.constant_ratio == pytest.approx(rd.constant_ratio, rel=1e-5)


def test_zero_data_gives_zero_solution():
    fld, rep = solve_dirichlet_direct(BoundaryData.zeros(WINDOW), ONES, ARC, n_nodes=24, verify_nodes=None)
    assert np.all(fld.stacked() == 0) and rep.constant_ratio == 0


def test_homogeneous_forcing_reduces_to_plain_solver():
    f = BoundaryData.gaussian(WINDOW, np.eye(2))
    a, _ = solve_nonhomogeneous(None, None, f, ONES, ARC, method="direct", n_nodes=24)
    b, _ = solve_dirichlet_direct(f, ONES, ARC, n_nodes=24)
    assert np.array_equal(a.stacked(), b.stacked())


def test_advection_of_linear_fields():
    dom = CylinderDomain.for_arc(ARC, WINDOW, 16)
    x = np.broadcast_to(dom.cheb.nodes[:, None], dom.shape)
    u = np.stack([np.ones(dom.shape), np.zeros(dom.shape)])
    v = np.stack([x, 2 * x])
    adv = advection(u, v, dom)
    assert np.allclose(adv[0], 1.0) and np.allclose(adv[1], 2.0)


def test_constant_estimates_positive_and_monotone_in_samples():
    dom = CylinderDomain.for_arc(ARC, WINDOW, 32)
    a = estimate_product_constant(dom, 1, 20, seed=0)
    b = estimate_product_constant(dom, 1, 40, seed=0)
    assert 0 < a <= b
    torus = estimate_product_constant(make_grid(16, d=2), 0, 10, seed=0)
    assert torus > 0
    cm = estimate_solution_constant(ONES, ARC, WINDOW, 1, 5, seed=0, n_nodes=32)
    assert cm > 0


def test_navier_stokes_zero_data_one_iteration():
    const = ConstantsEstimate(1, 0.06, 2.0, 0, 0)
    fld, rep = solve_navier_stokes(None, BoundaryData.zeros(WINDOW), ONES, ARC, constants=const, n_nodes=32)
    assert rep.iterations == 1 and np.all(fld.stacked() == 0)


def test_navier_stokes_small_data_contracts():
    const = ConstantsEstimate(1, 0.06, 2.0, 0, 0)
    f = BoundaryData.gaussian(WINDOW, [[0.05, 0.02], [-0.02, 0.04]])
    fld, rep = solve_navier_stokes(None, f, ONES, ARC, constants=const, n_nodes=32)
    assert rep.converged and max(rep.ratios) < 0.55
    assert rep.final_residual < 1e-8
    assert rep.data_norm < rep.zeta


def test_navier_stokes_strict_mode_refuses_large_data():
    const = ConstantsEstimate(1, 0.06, 2.0, 0, 0)
    f = BoundaryData.gaussian(WINDOW, 20 * np.eye(2))
    with pytest.raises(NavierStokesDivergence):
        solve_navier_stokes(None, f, ONES, ARC, constants=const, strict=True, n_nodes=32)


@pytest.mark.parametrize("seed", [0, 5])
def test_product_constant_stable_when_samples_double(seed):
    dom = CylinderDomain.for_arc(ARC, WINDOW, 32)
    a = estimate_product_constant(dom, 1, 100, seed=seed)
    b = estimate_product_constant(dom, 1, 200, seed=seed)
    assert (b - a) / b < 0.1
