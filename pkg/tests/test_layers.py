from fractions import Fraction

import numpy as np
import pytest

from cylstokes.cylinder import PotentialPair
from cylstokes.layers import (
    IndicialResolvent,
    SingularIndicialError,
    _bernoulli_numbers,
    _periodic_power_sum,
    boundary_operators,
    collocation_solve,
    double_layer_source,
    dtn_matrix,
    invertibility_scan_boundary,
    layer_potential,
    one_sided_trace,
    operator_identity_check,
    pompeiu_check,
    single_layer_source,
)
from cylstokes.spectral import Arc, make_grid

from oracles import BERNOULLI, brute_force_response, inverse_power_sum_2pi

GRID = make_grid(64)
ONES = PotentialPair.constant(GRID, 1.0, 1.0)
ARC = Arc(0.0, np.pi)


def test_bernoulli_numbers_exact():
    vals = _bernoulli_numbers(len(BERNOULLI) - 1)
    assert [Fraction(v).limit_denominator(1000) for v in vals] == BERNOULLI


@pytest.mark.parametrize("n", [1, 2])
def test_periodic_power_sums(n):
    y = np.array([0.3, 2.0, 5.9])
    assert np.allclose(_periodic_power_sum(n, y, 2 * np.pi), inverse_power_sum_2pi(n, y), atol=1e-13)


def test_response_matches_brute_force_sum():
    res = IndicialResolvent(1.0, ONES, n_band=256)
    b0, b1 = single_layer_source([1.0, 0.5])
    x = np.array([0.7, 2.0])
    fast = res.response(0.0, b0, b1).evaluate(x)
    brute = brute_force_response(1.0, 1.0, 1.0, 0.0, b0, b1, x, 400_000)
    assert np.max(np.abs(fast - brute)) < 1e-5


def test_tail_makes_response_independent_of_band():
    x = np.array([0.4, 1.9, 4.0])
    for b0, b1 in (single_layer_source([1.0, -0.3]), double_layer_source([0.2, 1.0], 1.0, 2.0)):
        a = IndicialResolvent(2.0, ONES, n_band=256).response(1.0, b0, b1).evaluate(x)
        b = IndicialResolvent(2.0, ONES, n_band=2048).response(1.0, b0, b1).evaluate(x)
        assert np.max(np.abs(a - b)) < 1e-9


def test_fast_and_generic_paths_agree():
    g = make_grid(32)
    p = PotentialPair.constant(g, 1.0, 1.0)
    b0, b1 = double_layer_source([1.0, 0.4], -1.0, 1.0)
    x = np.array([1.0, 3.0])
    fast = IndicialResolvent(1.0, p, method="fast", n_band=15).response(0.2, b0, b1).evaluate(x)
    gen = IndicialResolvent(1.0, p, method="generic").response(0.2, b0, b1).evaluate(x)
    assert np.max(np.abs(fast - gen)) < 1e-12


def test_response_refuses_source_point_and_singular_operator():
    res = IndicialResolvent(1.0, ONES, n_band=64)
    with pytest.raises(ValueError):
        res.response(0.5, *single_layer_source([1, 0])).evaluate(0.5)
    with pytest.raises(SingularIndicialError):
        IndicialResolvent(0.0, PotentialPair.constant(GRID, 0.0, 0.0))


def test_one_sided_traces_of_double_layer_jump_by_density():
    res = IndicialResolvent(1.0, ONES)
    fld = layer_potential(res, ARC, np.array([1.0, 0.0, 0.0, 0.0]), "double")
    kmax = float(np.max(np.abs(res.k)))
    inside = one_sided_trace(fld, 0.0, +1, kmax).value
    outside = one_sided_trace(fld, 0.0, -1, kmax).value
    assert abs((inside - outside)[0] - 1.0) < 1e-8
    assert abs((inside - outside)[1]) < 1e-8


@pytest.mark.parametrize("tau", [0.0, 1.0, 3.0])
def test_boundary_family_relations(tau):
    fam = boundary_operators(tau, ARC, ONES)
    assert np.max(np.abs(fam.double_layer_half_jump - 0.5 * np.eye(4))) < 1e-8
    assert np.max(np.abs(fam.conormal_half_jump + 0.5 * np.eye(4))) < 1e-8
    assert fam.single_layer_jump < 1e-10
    assert fam.hermitian_defect < 1e-9 and fam.adjoint_defect < 1e-9
    assert operator_identity_check(fam) < 1e-9
    _, residual = dtn_matrix(tau, ARC, ONES, fam)
    assert residual < 1e-8


def test_variable_potentials_generic_route():
    p = PotentialPair.scalar(GRID, lambda x: 1 + 0.5 * np.cos(x), lambda x: 1 + 0.3 * np.sin(x))
    fam = boundary_operators(1.0, ARC, p)
    assert operator_identity_check(fam) < 1e-5
    assert dtn_matrix(1.0, ARC, p, fam)[1] < 1e-4


def test_collocation_reproduces_point_source_field():
    res = IndicialResolvent(1.5, ONES)
    U = res.response(4.5, *single_layer_source([1.0, 0.3]))
    data = np.concatenate([U.evaluate(0.0)[:2, 0], U.evaluate(np.pi)[:2, 0]])
    cheb, sol, _ = collocation_solve(1.5, ARC, ONES, data, 48)
    assert np.max(np.abs(sol[:, :, 0] - U.evaluate(cheb.nodes))) < 1e-9


def test_cauchy_representation():
    out = pompeiu_check(1.0, ARC, ONES, [(4.0, np.array([1.0, 0.5]))])
    assert out["interior_error"] < 1e-9 and out["exterior_leakage"] < 1e-9


def test_boundary_scan_negative_control_flags_zero_only():
    zero = PotentialPair.constant(GRID, 0.0, 0.0)
    with pytest.warns(UserWarning):
        rows = invertibility_scan_boundary([0.0, 2.0], zero, ARC)
    assert rows[0].xi_singular and not rows[1].xi_singular
    assert min(rows[1].min_sv_single, rows[1].min_sv_double) > 1e-6
