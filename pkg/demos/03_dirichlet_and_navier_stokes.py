"""Dirichlet problem on a strip of the cylinder, then the small-data Navier-Stokes iteration.

Solves the linear problem three ways (double-layer and single-layer boundary
integral equations, direct collocation) and compares them, then runs Picard
iteration for the nonlinear problem with sampled constants.
"""
import numpy as np

from cylstokes.bvp import (AxialWindow, BoundaryData, CylinderDomain, estimate_constants, sobolev_norm,
                           solve_dirichlet_bie, solve_dirichlet_direct, solve_navier_stokes)
from cylstokes.cylinder import PotentialPair
from cylstokes.spectral import Arc, make_grid

grid = make_grid(64)
pots = PotentialPair.constant(grid, 1.0, 1.0)
arc = Arc(0.0, np.pi)
window = AxialWindow(16.0, 256)

f = BoundaryData.gaussian(window, [[1.0, 0.5], [-0.3, 0.8]], width=1.0)
direct, rep = solve_dirichlet_direct(f, pots, arc)
print(f"direct: |u| = {rep.velocity_norm:.4f}  |p| = {rep.pressure_norm:.4f}  residual {rep.residual:.1e}")
for kind in ("double", "single"):
    fld, rep = solve_dirichlet_bie(f, pots, arc, kind, threads=4)
    print(f"bie/{kind}: relative difference to direct {fld.interior_l2(direct) / direct.interior_l2():.1e}")

dom = CylinderDomain.for_arc(arc, window, 64)
small = BoundaryData.gaussian(window, [[0.02, 0.01], [-0.006, 0.016]], width=1.0)
x, t = dom.cheb.nodes[:, None], window.nodes[None, :]
h = np.stack([0.01 * np.cos(x) * np.exp(-t**2 / 2), -0.01 * np.cos(x) * np.exp(-t**2 / 2)])
const = estimate_constants(1, pots, arc, window, probes=[(h, small)])
print(f"\nsampled constants: product {const.product_constant:.3f}  solution {const.solution_constant:.3f}  "
      f"zeta {const.zeta:.3f}")
print(f"data norm {sobolev_norm(h, 0, dom) + small.norm(1.5):.4f}")
_, ns = solve_navier_stokes(h, small, pots, arc, m=1, constants=const)
for k, (d, r) in enumerate(zip(ns.differences, [None] + list(ns.ratios)), 1):
    print(f"  iteration {k}: |difference| {d:.2e}" + (f"  ratio {r:.2e}" if r is not None else ""))
print(f"NS residual {ns.final_residual:.1e}, |u|+|p| {ns.solution_norm:.4f} <= bound {ns.apriori_bound:.4f}")
