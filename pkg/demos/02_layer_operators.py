"""Boundary operators of a strip (0, pi) x R in the cylinder at a few axial frequencies.

Prints the measured half-jumps and the smallest singular values of the single
layer and of 1/2 + K, which stay away from zero when both potentials are positive.
"""
import numpy as np

from cylstokes.cylinder import PotentialPair
from cylstokes.layers import boundary_operators
from cylstokes.spectral import Arc, make_grid

grid = make_grid(64)
arc = Arc(0.0, np.pi)
pots = PotentialPair.constant(grid, 1.0, 1.0)
eye = np.eye(4)

print(" tau   |DL jump - I/2|  |conormal SL jump + I/2|  min sv S  min sv 1/2+K")
for tau in (0.0, 1.0, 3.0, 10.0):
    fam = boundary_operators(tau, arc, pots)
    dl = np.abs(fam.double_layer_half_jump - 0.5 * eye).max()
    sl = np.abs(fam.conormal_half_jump + 0.5 * eye).max()
    s_min = np.linalg.svd(fam.S_hat, compute_uv=False).min()
    k_min = np.linalg.svd(0.5 * eye + fam.K_hat, compute_uv=False).min()
    print(f"{tau:5.1f}   {dl:14.2e}  {sl:23.2e}  {s_min:8.4f}  {k_min:12.4f}")
