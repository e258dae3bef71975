"""Acceptance criteria: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py``.
"""
import numpy as np
import pytest

from cylstokes import checks
from cylstokes.bvp import (
    AxialWindow,
    BoundaryData,
    CylinderDomain,
    ManufacturedState,
    estimate_constants,
    sobolev_norm,
    solve_dirichlet_bie,
    solve_dirichlet_direct,
    solve_navier_stokes,
    solve_nonhomogeneous,
)
from cylstokes.cylinder import PotentialPair
from cylstokes.spectral import Arc, make_grid

RESULTS: dict[int, str] = {}


def _verdict(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {title}: {detail}"
    RESULTS[number] = line
    print(line)
    assert ok, line


def _suite_verdict(number, title, rows):
    bad = [r for r in rows if not r.passed]
    worst = max((abs(r.measured - r.expected) for r in rows if r.tolerance > 0), default=0.0)
    detail = f"{len(rows) - len(bad)}/{len(rows)} checks, worst numeric deviation {worst:.2e}"
    if bad:
        detail += "; failing: " + ", ".join(r.check for r in bad[:5])
    _verdict(number, title, not bad, detail)


def test_criterion_01_principal_symbol_inverse():
    rows = [r for r in checks.symbols_suite(n_random=100, seed=1) if r.check == "principal_symbol.inverse"]
    _suite_verdict(1, "principal symbol times its inverse is the identity", rows)


def test_criterion_02_residue_integrals():
    rows = [r for r in checks.fourier_suite() if r.anchor == "fourier.residue-integrals"]
    _suite_verdict(2, "rational integrals match closed forms", rows)


def test_criterion_03_principal_value_and_jump_functional():
    rows = [r for r in checks.fourier_suite(n_samples=2**20) if r.anchor != "fourier.residue-integrals"]
    _suite_verdict(3, "one-sided limits of inverse transforms", rows)


def test_criterion_04_laplace_double_layer():
    rows = [r for r in checks.symbols_suite() if r.anchor == "symbols.laplace-double-layer"]
    _suite_verdict(4, "Laplace double layer boundary symbol and limits", rows)


def test_criterion_05_stokes_boundary_symbols():
    rows = [r for r in checks.symbols_suite(v0s=(0.0, 1.0, 5.0))
            if r.anchor.startswith("symbols.") and r.anchor not in ("symbols.laplace-double-layer",
                                                                    "symbols.adn-inverse")]
    _suite_verdict(5, "Stokes boundary symbols by quadrature vs closed form", rows)


def test_criterion_06_kernel_dimensions():
    rows = [r for r in checks.invertibility_suite(sizes=(32, 64)) if r.check.startswith("kernel.")]
    _suite_verdict(6, "kernel dimensions on the circle and closed torus", rows)


def test_criterion_07_green_identity():
    rows = [r for r in checks.green_suite(taus=(0.0, 1.0, 3.0), n_pairs=10) if r.anchor == "indicial.green-identity"]
    _suite_verdict(7, "Green identity on an arc", rows)


@pytest.fixture(scope="module")
def jump_rows():
    return checks.jumps_suite(taus=(0.0, 1.0, 3.0, 10.0))


def test_criterion_08_jump_relations(jump_rows):
    anchors = {"layers.double-layer-jump", "layers.conormal-single-layer-jump", "layers.single-layer-continuity"}
    _suite_verdict(8, "jump relations on the cylinder", [r for r in jump_rows if r.anchor in anchors])


def test_criterion_09_operator_identities(jump_rows):
    anchors = {"layers.single-double-intertwining", "layers.dtn-identity", "layers.conormal-double-layer-continuity"}
    _suite_verdict(9, "boundary operator identities", [r for r in jump_rows if r.anchor in anchors])


def test_criterion_10_invertibility_scans():
    rows = [r for r in checks.invertibility_suite(sizes=(32, 64)) if r.check.startswith("scan.")]
    rows += checks.boundary_invertibility_suite()
    bounds = {r.check: r.measured for r in rows if r.check.startswith(("scan.positive", "boundary_scan.single",
                                                                       "boundary_scan.double"))}
    bad = [r for r in rows if not r.passed]
    detail = "lower bounds " + ", ".join(f"{k}={v:.3g}" for k, v in sorted(bounds.items()))
    if bad:
        detail += "; failing: " + ", ".join(r.check for r in bad[:5])
    _verdict(10, "invertibility scans and the zero-frequency negative control", not bad, detail)


def test_criterion_11_dirichlet_well_posedness():
    grid = make_grid(64)
    pots = PotentialPair.constant(grid, 1.0, 1.0)
    arc = Arc(0.0, np.pi)
    window = AxialWindow(16.0, 256)
    f = BoundaryData.gaussian(window, [[1.0, 0.5], [-0.3, 0.8]], width=1.0)
    ref, _ = solve_dirichlet_direct(f, pots, arc)
    errs = {}
    for kind in ("double", "single"):
        fld, _ = solve_dirichlet_bie(f, pots, arc, kind, threads=4)
        errs[kind] = fld.interior_l2(ref) / ref.interior_l2()
    state = ManufacturedState((((1.0, 1, 0.3, 0.0, 1.0),), ((0.5, 2, -0.2, 0.5, 1.2),), ((0.7, 1, 1.0, -0.3, 0.9),)))
    h, r = state.forcing(pots)
    fld, _ = solve_nonhomogeneous(h, r, state.boundary_data(arc, window), pots, arc, method="bie", threads=4)
    exact = state.on_domain(fld.domain)
    errs["manufactured"] = fld.interior_l2(exact) / exact.interior_l2()
    ok = errs["double"] < 1e-5 and errs["single"] < 1e-5 and errs["manufactured"] < 1e-6
    _verdict(11, "boundary-integral and direct solutions agree",
             ok, ", ".join(f"{k} {v:.2e}" for k, v in errs.items()))


def test_criterion_12_navier_stokes_small_data():
    grid = make_grid(64)
    pots = PotentialPair.constant(grid, 1.0, 1.0)
    arc = Arc(0.0, np.pi)
    window = AxialWindow(16.0, 256)
    dom = CylinderDomain.for_arc(arc, window, 64)
    f = BoundaryData.gaussian(window, [[0.02, 0.01], [-0.006, 0.016]], width=1.0)
    x, t = dom.cheb.nodes[:, None], window.nodes[None, :]
    h = np.stack([0.01 * np.cos(x) * np.exp(-t**2 / 2), -0.01 * np.cos(x) * np.exp(-t**2 / 2)])
    const = estimate_constants(1, pots, arc, window, n_pairs=200, n_samples=40, seed=0, probes=[(h, f)])
    data = sobolev_norm(h, 0, dom) + f.norm(1.5)
    fld, rep = solve_navier_stokes(h, f, pots, arc, m=1, constants=const)
    max_ratio = max(rep.ratios) if rep.ratios else 0.0
    ok = (data <= const.zeta and max_ratio <= 0.55 and rep.converged and rep.iterations <= 30
          and rep.final_residual < 1e-8 and rep.solution_norm <= rep.apriori_bound)
    detail = (f"data {data:.3e} <= zeta {const.zeta:.3e}, max ratio {max_ratio:.3e}, {rep.iterations} iterations, "
              f"residual {rep.final_residual:.2e}, |u|+|p| {rep.solution_norm:.3e} <= bound {rep.apriori_bound:.3e}")
    _verdict(12, "small-data Navier-Stokes by Picard iteration", ok, detail)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
