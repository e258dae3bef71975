"""Periodic grids, Fourier-mode bases, spectral derivatives and quadrature.

Fields live on uniform grids over a flat torus of dimension 1 or 2.  All
operator matrices elsewhere in the package are written in the orthonormal
Fourier basis ``phi_m(x) = exp(i k_m . x) / L**(d/2)`` restricted to the
band ``|m_j| <= K`` with ``K = N/2 - 1``; the Nyquist mode is excluded so
that derivative matrices stay exactly skew-adjoint.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "PeriodicGrid",
    "ScalarField",
    "VectorField",
    "StateField",
    "Arc",
    "make_grid",
    "spectral_derivative",
    "inner_product",
    "delta_mode_coefficients",
    "smooth_step",
    "cutoff_bump",
    "arc_plateau",
    "trig_interpolate",
]


@dataclass(frozen=True)
class PeriodicGrid:
    n_points: int
    circumference: float
    dimension: int = 1

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2):
            raise ValueError("grid dimension must be 1 or 2")
        if self.n_points < 4 or self.n_points % 2:
            raise ValueError(
                f"n_points must be even and >= 4 (got {self.n_points}); "
                "odd or tiny grids alias the Nyquist mode"
            )
        if not self.circumference > 0:
            raise ValueError("circumference must be positive")

    @property
    def spacing(self) -> float:
        return self.circumference / self.n_points

    @property
    def band_limit(self) -> int:
        return self.n_points // 2 - 1

    @property
    def size(self) -> int:
        return self.n_points**self.dimension

    @cached_property
    def axis_nodes(self) -> np.ndarray:
        return np.arange(self.n_points) * self.spacing

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates, shape ``(size,)`` for d=1 and ``(size, 2)`` for d=2."""
        if self.dimension == 1:
            return self.axis_nodes.copy()
        xx, yy = np.meshgrid(self.axis_nodes, self.axis_nodes, indexing="ij")
        return np.stack([xx.ravel(), yy.ravel()], axis=1)

    @property
    def weight(self) -> float:
        return self.spacing**self.dimension

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Sorted 1-D wave numbers ``2 pi m / L`` for ``m = -N/2 .. N/2-1``."""
        m = np.arange(-(self.n_points // 2), self.n_points // 2)
        return 2 * np.pi * m / self.circumference

    @cached_property
    def band_indices(self) -> np.ndarray:
        """Integer mode indices of the retained band, shape ``(M, d)``."""
        m = np.arange(-self.band_limit, self.band_limit + 1)
        if self.dimension == 1:
            return m[:, None]
        a, b = np.meshgrid(m, m, indexing="ij")
        return np.stack([a.ravel(), b.ravel()], axis=1)

    @property
    def n_modes(self) -> int:
        return len(self.band_indices)

    @cached_property
    def band_wavevectors(self) -> np.ndarray:
        return 2 * np.pi * self.band_indices / self.circumference

    @cached_property
    def synthesis(self) -> np.ndarray:
        """Matrix ``Phi[j, m] = phi_m(x_j)`` from band coefficients to node values."""
        x = self.nodes.reshape(self.size, self.dimension)
        phase = x @ self.band_wavevectors.T
        return np.exp(1j * phase) / self.circumference ** (self.dimension / 2)

    def to_modes(self, values: np.ndarray) -> np.ndarray:
        """Orthonormal band coefficients of node samples (last axis = nodes)."""
        values = np.asarray(values, dtype=complex)
        return (values @ self.synthesis.conj()) * self.weight

    def from_modes(self, coeffs: np.ndarray) -> np.ndarray:
        return np.asarray(coeffs, dtype=complex) @ self.synthesis.T

    def evaluate_modes(self, coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Evaluate band coefficients at arbitrary points (d=1: 1-D array)."""
        pts = np.asarray(points, dtype=float).reshape(-1, self.dimension)
        basis = np.exp(1j * pts @ self.band_wavevectors.T)
        basis /= self.circumference ** (self.dimension / 2)
        return np.asarray(coeffs) @ basis.T


@dataclass(frozen=True)
class ScalarField:
    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex).ravel()
        if vals.shape != (self.grid.size,):
            raise ValueError("values must have one entry per grid node")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid: PeriodicGrid, func) -> "ScalarField":
        if grid.dimension == 1:
            return cls(grid, func(grid.nodes))
        return cls(grid, func(grid.nodes[:, 0], grid.nodes[:, 1]))


@dataclass(frozen=True)
class VectorField:
    """``d+1`` components ordered tangential first, axial last."""

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 2 or vals.shape[1] != self.grid.size:
            raise ValueError("vector field values must have shape (components, nodes)")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_components(cls, components: list[ScalarField]) -> "VectorField":
        grids = {c.grid for c in components}
        if len(grids) != 1:
            raise ValueError("all components must share the grid")
        return cls(components[0].grid, np.stack([c.values for c in components]))

    @property
    def components(self) -> list[ScalarField]:
        return [ScalarField(self.grid, v) for v in self.values]


@dataclass(frozen=True)
class StateField:
    velocity: VectorField
    pressure: ScalarField

    def __post_init__(self) -> None:
        if self.velocity.grid != self.pressure.grid:
            raise ValueError("velocity and pressure must share the grid")

    @property
    def grid(self) -> PeriodicGrid:
        return self.pressure.grid

    def stacked(self) -> np.ndarray:
        return np.vstack([self.velocity.values, self.pressure.values[None, :]])

    @classmethod
    def from_stacked(cls, grid: PeriodicGrid, values: np.ndarray) -> "StateField":
        return cls(VectorField(grid, values[:-1]), ScalarField(grid, values[-1]))


@dataclass(frozen=True)
class Arc:
    """Sub-interval ``(alpha, beta)`` of a circle; outward normals are -x at alpha, +x at beta."""

    alpha: float
    beta: float
    circumference: float = 2 * np.pi

    def __post_init__(self) -> None:
        if not 0 < self.beta - self.alpha < self.circumference:
            raise ValueError("arc must satisfy 0 < beta - alpha < L")

    @property
    def length(self) -> float:
        return self.beta - self.alpha

    @property
    def points(self) -> tuple[float, float]:
        return (self.alpha, self.beta)

    @property
    def normals(self) -> tuple[float, float]:
        return (-1.0, 1.0)

    def contains(self, x: np.ndarray) -> np.ndarray:
        y = np.mod(np.asarray(x, dtype=float) - self.alpha, self.circumference)
        return (y > 0) & (y < self.length)


def make_grid(n_points: int, circumference: float = 2 * np.pi, d: int = 1) -> PeriodicGrid:
    return PeriodicGrid(int(n_points), float(circumference), int(d))


def _band_multiplier(grid: PeriodicGrid) -> np.ndarray:
    k = 2 * np.pi * np.fft.fftfreq(grid.n_points, d=1.0 / grid.n_points) / grid.circumference
    k[grid.n_points // 2] = 0.0
    return k


def spectral_derivative(f: ScalarField, axis: int = 0) -> ScalarField:
    grid = f.grid
    if not 0 <= axis < grid.dimension:
        raise ValueError(f"axis {axis} out of range for a {grid.dimension}-d grid")
    k = _band_multiplier(grid)
    shape = (grid.n_points,) * grid.dimension
    vals = f.values.reshape(shape)
    spec = np.fft.fft(vals, axis=axis)
    bshape = [1] * grid.dimension
    bshape[axis] = grid.n_points
    out = np.fft.ifft(1j * k.reshape(bshape) * spec, axis=axis)
    return ScalarField(grid, out.ravel())


def trig_interpolate(values: np.ndarray, circumference: float, points: np.ndarray) -> np.ndarray:
    """Band-limited (Nyquist-free) interpolant of 1-D periodic samples at ``points``.

    ``values`` may carry leading axes; the last axis holds the node samples.
    """
    values = np.asarray(values, dtype=complex)
    n = values.shape[-1]
    band = n // 2 - 1
    coeffs = np.fft.fft(values, axis=-1) / n
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    keep = np.abs(m) <= band
    k = 2 * np.pi * m[keep] / circumference
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    basis = np.exp(1j * np.outer(k, pts))
    return coeffs[..., keep] @ basis


def _upsample(values: np.ndarray, factor: int) -> np.ndarray:
    """Zero-pad the band of 1-D periodic samples (last axis) onto a finer grid."""
    values = np.asarray(values, dtype=complex)
    n = values.shape[-1]
    coeffs = np.fft.fft(values, axis=-1)
    coeffs[..., n // 2] = 0.0
    fine = np.zeros(values.shape[:-1] + (n * factor,), dtype=complex)
    half = n // 2
    fine[..., :half] = coeffs[..., :half]
    fine[..., -half + 1:] = coeffs[..., -half + 1:]
    return np.fft.ifft(fine, axis=-1) * factor


def spectral_arc_weights(n_points: int, circumference: float, alpha: float, beta: float) -> np.ndarray:
    """Node weights integrating every Nyquist-free band-limited function exactly over (alpha, beta)."""
    m = np.arange(-(n_points // 2) + 1, n_points // 2)
    k = 2 * np.pi * m / circumference
    with np.errstate(divide="ignore", invalid="ignore"):
        integ = np.where(
            m == 0,
            beta - alpha,
            (np.exp(1j * k * beta) - np.exp(1j * k * alpha)) / (1j * np.where(m == 0, 1, k)),
        )
    x = np.arange(n_points) * circumference / n_points
    w = (np.exp(-1j * np.outer(x, k)) @ integ) / n_points
    return w.real


def gregory_arc_weights(n_points: int, circumference: float, alpha: float, beta: float) -> np.ndarray:
    """Trapezoid weights with fourth-order Gregory end corrections; arc ends must sit on nodes."""
    h = circumference / n_points
    ia, ib = alpha / h, beta / h
    if abs(ia - round(ia)) > 1e-9 or abs(ib - round(ib)) > 1e-9:
        raise ValueError("Gregory weights need arc endpoints on grid nodes")
    ia, ib = int(round(ia)), int(round(ib))
    count = ib - ia
    if count < 8:
        raise ValueError("arc too short for Gregory end corrections")
    local = np.ones(count + 1)
    local[:4] = np.array([3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0, 1.0])
    local[-4:] = np.array([1.0, 23.0 / 24.0, 7.0 / 6.0, 3.0 / 8.0])
    w = np.zeros(n_points)
    idx = np.arange(ia, ib + 1) % n_points
    np.add.at(w, idx, local * h)
    return w


def inner_product(f, g, region=None, quadrature: str = "spectral") -> complex:
    """Quadrature inner product ``(f, g) = int f . conj(g)``, conjugate-linear in ``g``.

    ``region`` is ``None`` (whole torus), a boolean node mask, or an :class:`Arc`
    (d=1 only).  Arc integrals are exact for band-limited inputs: the product is
    formed on a doubled grid and integrated with spectral arc weights.
    """
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    grid = f.grid
    fv = np.atleast_2d(f.values)
    gv = np.atleast_2d(g.values)
    if region is None:
        return complex(np.sum(fv * gv.conj()) * grid.weight)
    if isinstance(region, Arc):
        if grid.dimension != 1:
            raise ValueError("arc regions need a 1-D grid")
        if quadrature == "gregory":
            w = gregory_arc_weights(grid.n_points, grid.circumference, region.alpha, region.beta)
            return complex(np.sum(fv * gv.conj() * w))
        ff = _upsample(fv, 2)
        gf = _upsample(gv, 2)
        w = spectral_arc_weights(2 * grid.n_points, grid.circumference, region.alpha, region.beta)
        return complex(np.sum(ff * gf.conj() * w))
    mask = np.asarray(region, dtype=bool).ravel()
    return complex(np.sum((fv * gv.conj())[:, mask]) * grid.weight)


def delta_mode_coefficients(grid: PeriodicGrid, point) -> tuple[np.ndarray, np.ndarray]:
    """Band coefficients ``c_k = exp(-i k.a) / L**d`` of the point mass at ``point``.

    Returns ``(wavevectors, coefficients)`` so that ``sum_k c_k exp(i k.x)`` is the
    band-limited projection of the delta; pairing it with any band-limited
    ``phi`` returns ``phi(point)``.
    """
    a = np.atleast_1d(np.asarray(point, dtype=float))
    k = grid.band_wavevectors
    return k, np.exp(-1j * k @ a) / grid.circumference**grid.dimension


# ---------------------------------------------------------------- smooth cutoffs

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(96)


def _bump(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    inside = np.abs(v) < 1
    out[inside] = np.exp(-1.0 / (1.0 - v[inside] ** 2))
    return out


def _bump_tail(lo: np.ndarray) -> np.ndarray:
    v = lo[..., None] + (1 - lo[..., None]) * (_GL_NODES + 1) / 2
    return (_bump(v) @ _GL_WEIGHTS) * (1 - lo) / 2


_BUMP_MASS = float(_bump_tail(np.array([-1.0]))[0])


def smooth_step(s) -> np.ndarray:
    """C-infinity step: 1 for s <= 0, 0 for s >= 1, normalised bump integral between."""
    s = np.asarray(s, dtype=float)
    out = np.where(s <= 0, 1.0, 0.0)
    mid = (s > 0) & (s < 1)
    if np.any(mid):
        out = out.astype(float)
        out[mid] = _bump_tail(2 * s[mid] - 1) / _BUMP_MASS
    return out


def cutoff_bump(x, radius: float) -> np.ndarray:
    """Even cutoff equal to 1 on [-r/2, r/2] and supported in (-r, r)."""
    x = np.abs(np.asarray(x, dtype=float))
    return smooth_step((x - radius / 2) / (radius / 2))


def arc_plateau(x, arc: Arc, margin: float) -> np.ndarray:
    """1 on the closed arc, smoothly 0 beyond ``margin`` outside it (periodic)."""
    y = np.mod(np.asarray(x, dtype=float) - arc.alpha, arc.circumference)
    below = arc.circumference - y
    dist = np.where(y <= arc.length, 0.0, np.minimum(y - arc.length, below))
    return smooth_step(dist / margin)
