"""Generalized Stokes operators on flat product cylinders.

Spectral assembly of the axial-frequency family, layer potentials with their
jump relations, Dirichlet solvers and a small-data Navier-Stokes iteration.
"""
__version__ = "0.1.0"
