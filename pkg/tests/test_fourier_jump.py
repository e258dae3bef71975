import numpy as np
import pytest

from cylstokes.fourier_jump import jump_functional, odd_parity_defect, pv_inverse_ft, residue_integrals

from oracles import PV_LIMITS, RESIDUE_VALUES


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_residue_integrals(a):
    for name, (val, exact) in residue_integrals(a).items():
        assert exact == pytest.approx(RESIDUE_VALUES[name](a), rel=1e-14)
        assert abs(val - exact) < 1e-8


def test_residue_integrals_reject_nonpositive():
    with pytest.raises(ValueError):
        residue_integrals(0.0)


def test_pv_limits_small_grid():
    rep = pv_inverse_ft(n_samples=2**16, half_width=2.0**7)
    assert abs(rep.right_limit - PV_LIMITS["plus"]) < 5e-3
    assert abs(rep.left_limit - PV_LIMITS["minus"]) < 5e-3
    assert abs(rep.jump - 1j) < 1e-2


def test_pv_refinement_stays_at_roundoff():
    # the extrapolated limits are already exact to ~1e-9 at 2**14, so refinement cannot halve the
    # estimate; check that it stays at round-off level and the limits do not drift
    reps = [pv_inverse_ft(n_samples=n) for n in (2**14, 2**16, 2**18)]
    for rep in reps:
        assert rep.extrapolation_error_estimate < 1e-7
        assert abs(rep.right_limit - PV_LIMITS["plus"]) < 1e-6
    assert abs(reps[-1].right_limit - reps[0].right_limit) < 1e-7


def test_jump_functional_two_routes_agree():
    rep = jump_functional(lambda x: (2 * x + 1) / (x**2 + 4), n_samples=2**18, half_width=2.0**9)
    assert abs(rep.jump - 2j) < 1e-3
    assert abs(rep.average - rep.predicted_average) < 1e-3


def test_jump_functional_refuses_non_odd_principal_part():
    with pytest.raises(ValueError):
        jump_functional(lambda x: np.abs(x) / (1 + x**2), n_samples=2**14, half_width=2.0**7)


def test_odd_parity_defect():
    assert odd_parity_defect(lambda x: x / (1 + x**2)) < 1e-12
    assert odd_parity_defect(lambda x: 1 / (1 + x**2)) > 0.5
