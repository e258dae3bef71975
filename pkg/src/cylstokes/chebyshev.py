"""Chebyshev-Lobatto collocation on an interval."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = ["ChebyshevInterval"]


@dataclass(frozen=True)
class ChebyshevInterval:
    """``n`` Lobatto nodes on ``[a, b]`` in increasing order."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if self.n < 3 or not self.b > self.a:
            raise ValueError("need n >= 3 and b > a")

    @cached_property
    def reference_nodes(self) -> np.ndarray:
        return -np.cos(np.pi * np.arange(self.n) / (self.n - 1))

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.a + (self.reference_nodes + 1) * (self.b - self.a) / 2

    @cached_property
    def barycentric_weights(self) -> np.ndarray:
        w = (-1.0) ** np.arange(self.n)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @cached_property
    def diff_matrix(self) -> np.ndarray:
        x = self.reference_nodes
        w = self.barycentric_weights
        dx = x[:, None] - x[None, :]
        np.fill_diagonal(dx, 1.0)
        D = (w[None, :] / w[:, None]) / dx
        np.fill_diagonal(D, 0.0)
        np.fill_diagonal(D, -D.sum(axis=1))
        return D * (2 / (self.b - self.a))

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        """Clenshaw-Curtis weights on ``[a, b]``."""
        n = self.n - 1
        theta = np.pi * np.arange(n + 1) / n
        w = np.zeros(n + 1)
        v = np.ones(n - 1)
        if n % 2 == 0:
            w[0] = w[n] = 1.0 / (n * n - 1)
            for k in range(1, n // 2):
                v -= 2 * np.cos(2 * k * theta[1:-1]) / (4 * k * k - 1)
            v -= np.cos(n * theta[1:-1]) / (n * n - 1)
        else:
            w[0] = w[n] = 1.0 / (n * n)
            for k in range(1, (n - 1) // 2 + 1):
                v -= 2 * np.cos(2 * k * theta[1:-1]) / (4 * k * k - 1)
        w[1:-1] = 2 * v / n
        return w * (self.b - self.a) / 2

    def interpolation_matrix(self, points) -> np.ndarray:
        """Barycentric interpolation from node values to ``points``."""
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        w = self.barycentric_weights
        diff = pts[:, None] - self.nodes[None, :]
        exact = diff == 0
        with np.errstate(divide="ignore", invalid="ignore"):
            c = w[None, :] / diff
            P = c / c.sum(axis=1, keepdims=True)
        rows = exact.any(axis=1)
        P[rows] = exact[rows].astype(float)
        return P
