"""Assembly of Def, grad and the Stokes block operator on the cross-section.

For each axial frequency ``tau`` the translation-invariant operator reduces
to a family on the cross-section torus.  Everything here is written in the
orthonormal band basis of :mod:`cylstokes.spectral`, so quadrature inner
products are Euclidean and adjoints are conjugate transposes.

Layouts: velocity components (tangential first, axial last) then pressure,
each a block of ``n_modes`` coefficients.  Symmetric tensors are packed
isometrically: diagonal entries as-is, off-diagonal pairs scaled by sqrt(2),
ordered tangential pairs, tangential-axial pairs, axial-axial.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .spectral import Arc, PeriodicGrid, StateField, _upsample, spectral_arc_weights, trig_interpolate

__all__ = [
    "PotentialPair",
    "IndicialMatrix",
    "EnergyReport",
    "KernelReport",
    "def_mode_matrices",
    "mode_block",
    "assemble_grad_hat",
    "assemble_def_hat",
    "assemble_xi_hat",
    "kernel_report",
    "invertibility_scan",
    "green_identity_check",
    "assemble_xi_closed_torus",
    "conormal_at",
]


@dataclass(frozen=True)
class PotentialPair:
    """Sampled ``V`` (Hermitian ``c x c`` per node) and scalar ``V0`` on a grid."""

    grid: PeriodicGrid
    V: np.ndarray
    V0: np.ndarray
    tags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        V = np.asarray(self.V, dtype=complex)
        V0 = np.asarray(self.V0, dtype=float).ravel()
        if V.ndim != 3 or V.shape[0] != self.grid.size or V.shape[1] != V.shape[2]:
            raise ValueError("V must have shape (nodes, c, c)")
        if V0.shape != (self.grid.size,):
            raise ValueError("V0 must have one value per node")
        if np.max(np.abs(V - np.conj(np.swapaxes(V, 1, 2)))) > 1e-12:
            raise ValueError("V must be Hermitian at every node")
        V.setflags(write=False)
        V0.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "V0", V0)
        if "nonnegative" in self.tags and not self.is_nonnegative():
            raise ValueError("potentials tagged nonnegative have a negative eigenvalue")

    @property
    def components(self) -> int:
        return self.V.shape[1]

    @classmethod
    def constant(cls, grid: PeriodicGrid, v: float, v0: float, components: int | None = None) -> "PotentialPair":
        c = grid.dimension + 1 if components is None else components
        V = np.broadcast_to(v * np.eye(c), (grid.size, c, c)).copy()
        return cls(grid, V, np.full(grid.size, float(v0)), ("nonnegative",) if v >= 0 and v0 >= 0 else ())

    @classmethod
    def scalar(cls, grid: PeriodicGrid, v_values, v0_values, components: int | None = None) -> "PotentialPair":
        """Scalar-diagonal ``V = v(x) I`` from node samples (or callables of the nodes)."""
        c = grid.dimension + 1 if components is None else components
        v = _sample(grid, v_values)
        v0 = _sample(grid, v0_values)
        V = v[:, None, None] * np.eye(c)[None]
        tags = ("nonnegative",) if np.all(v >= 0) and np.all(v0 >= 0) else ()
        return cls(grid, V, v0, tags)

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.V == self.V[0]) and np.all(self.V0 == self.V0[0]))

    def is_nonnegative(self, tol: float = 1e-12) -> bool:
        eig = np.linalg.eigvalsh(self.V)
        return bool(np.all(eig >= -tol) and np.all(self.V0 >= -tol))

    def v_positive_somewhere(self, mask=None, tol: float = 1e-12) -> bool:
        """Discrete reading of V > 0: some node of the region carries a definite V."""
        sel = np.ones(self.grid.size, bool) if mask is None else np.asarray(mask, bool)
        eig = np.linalg.eigvalsh(self.V[sel])
        return bool(self.is_nonnegative() and np.any(eig.min(axis=1) > tol))

    def v0_positive_somewhere(self, mask=None, tol: float = 1e-12) -> bool:
        sel = np.ones(self.grid.size, bool) if mask is None else np.asarray(mask, bool)
        return bool(np.all(self.V0 >= -tol) and np.any(self.V0[sel] > tol))

    def at(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Band-limited interpolants of ``V`` and ``V0`` at cross-section points (d=1)."""
        if self.grid.dimension != 1:
            raise ValueError("point evaluation is implemented for 1-D cross-sections")
        pts = np.atleast_1d(np.asarray(points, dtype=float))
        if self.is_constant:
            return (np.broadcast_to(self.V[0], (len(pts),) + self.V.shape[1:]).copy(),
                    np.full(len(pts), self.V0[0]))
        Vt = np.moveaxis(self.V, 0, -1)
        V = np.moveaxis(trig_interpolate(Vt, self.grid.circumference, pts), -1, 0)
        V0 = trig_interpolate(self.V0, self.grid.circumference, pts).real
        return V, V0


def _sample(grid: PeriodicGrid, values) -> np.ndarray:
    if callable(values):
        if grid.dimension == 1:
            return np.asarray(values(grid.nodes), dtype=float)
        return np.asarray(values(grid.nodes[:, 0], grid.nodes[:, 1]), dtype=float)
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.size, float(arr))
    return arr.ravel()


@dataclass(frozen=True)
class IndicialMatrix:
    tau: float
    matrix: np.ndarray
    grid: PeriodicGrid
    potentials: PotentialPair
    def_matrix: np.ndarray = field(repr=False, default=None)
    grad_matrix: np.ndarray = field(repr=False, default=None)

    @property
    def n_modes(self) -> int:
        return self.grid.n_modes

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


@dataclass(frozen=True)
class EnergyReport:
    lhs: complex
    form_value: complex
    boundary_value: complex

    @property
    def residual(self) -> float:
        return float(abs(self.lhs - self.form_value - self.boundary_value))


@dataclass(frozen=True)
class KernelReport:
    tau: float
    singular_values: np.ndarray
    kernel_dim: int
    tolerance: float
    gap: float
    min_singular_value: float

    @property
    def flagged(self) -> bool:
        return self.kernel_dim > 0


# ------------------------------------------------------------ per-mode symbols


def _pair_order(n: int, d: int) -> list[tuple[int, int]]:
    """Isometric packing order: tangential pairs, tangential-axial, axial-axial."""
    tang = [(i, j) for i in range(d) for j in range(i, d)]
    mixed = [(j, n - 1) for j in range(d)] if n > d else []
    axial = [(n - 1, n - 1)] if n > d else []
    return tang + mixed + axial


def def_mode_matrices(xi: np.ndarray, tangential: int | None = None) -> np.ndarray:
    """Packed Def symbols for wave vectors ``xi`` (shape (M, n)); returns (M, n(n+1)/2, n).

    ``tangential`` is the number of cross-section directions (the rest are axial);
    by default every direction is tangential, as on a closed torus.
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    M, n = xi.shape
    d = n if tangential is None else tangential
    pairs = _pair_order(n, d) if d < n else [(i, j) for i in range(n) for j in range(i, n)]
    out = np.zeros((M, len(pairs), n), dtype=complex)
    for r, (i, j) in enumerate(pairs):
        if i == j:
            out[:, r, i] = 1j * xi[:, i]
        else:
            s = 1j / np.sqrt(2)
            out[:, r, j] += s * xi[:, i]
            out[:, r, i] += s * xi[:, j]
    return out


def mode_block(xi: np.ndarray, V: np.ndarray, v0: float) -> np.ndarray:
    """Per-mode block ``[[|xi|^2 + xi xi^T + V, i xi], [-i xi^T, -V0]]`` for wave vector xi."""
    xi = np.asarray(xi, dtype=float)
    n = xi.shape[-1]
    block = np.zeros(xi.shape[:-1] + (n + 1, n + 1), dtype=complex)
    r2 = np.sum(xi * xi, axis=-1)
    block[..., :n, :n] = r2[..., None, None] * np.eye(n) + xi[..., :, None] * xi[..., None, :] + V
    block[..., :n, n] = 1j * xi
    block[..., n, :n] = -1j * xi
    block[..., n, n] = -v0
    return block


def _full_wavevectors(grid: PeriodicGrid, tau: float) -> np.ndarray:
    kap = grid.band_wavevectors
    return np.hstack([kap, np.full((len(kap), 1), float(tau))])


def _blocks_from_modes(per_mode: np.ndarray) -> np.ndarray:
    """(M, R, C) per-mode matrices -> (R*M, C*M) block matrix with diagonal blocks."""
    M, R, C = per_mode.shape
    out = np.zeros((R * M, C * M), dtype=complex)
    idx = np.arange(M)
    for r in range(R):
        for c in range(C):
            out[r * M + idx, c * M + idx] = per_mode[:, r, c]
    return out


def _galerkin(grid: PeriodicGrid, values: np.ndarray) -> np.ndarray:
    """Matrix of multiplication by node samples, ``Phi^H diag(w v) Phi``."""
    vals = np.asarray(values)
    if np.all(vals == vals[0]):
        return vals[0] * np.eye(grid.n_modes, dtype=complex)
    phi = grid.synthesis
    return (phi.conj().T * (grid.weight * vals)) @ phi


def _potential_blocks(potentials: PotentialPair) -> tuple[np.ndarray, np.ndarray]:
    grid = potentials.grid
    c = potentials.components
    M = grid.n_modes
    Vmat = np.zeros((c * M, c * M), dtype=complex)
    for a in range(c):
        for b in range(c):
            Vmat[a * M:(a + 1) * M, b * M:(b + 1) * M] = _galerkin(grid, potentials.V[:, a, b])
    return Vmat, _galerkin(grid, potentials.V0)


def assemble_grad_hat(tau: float, grid: PeriodicGrid) -> np.ndarray:
    """Scalar -> (d+1)-vector map ``(grad', i tau)`` in the band basis."""
    xi = _full_wavevectors(grid, tau)
    return _blocks_from_modes((1j * xi)[:, :, None])


def assemble_def_hat(tau: float, grid: PeriodicGrid) -> np.ndarray:
    xi = _full_wavevectors(grid, tau)
    return _blocks_from_modes(def_mode_matrices(xi, tangential=grid.dimension))


def assemble_xi_hat(tau: float, grid: PeriodicGrid, potentials: PotentialPair) -> IndicialMatrix:
    if potentials.grid != grid:
        raise ValueError("potentials are sampled on a different grid")
    if potentials.components != grid.dimension + 1:
        raise ValueError("V must act on d+1 velocity components")
    D = assemble_def_hat(tau, grid)
    G = assemble_grad_hat(tau, grid)
    Vmat, V0mat = _potential_blocks(potentials)
    top = 2 * D.conj().T @ D + Vmat
    mat = np.block([[top, G], [G.conj().T, -V0mat]])
    return IndicialMatrix(float(tau), mat, grid, potentials, D, G)


def kernel_report(matrix, tau: float = 0.0, rel_tol: float = 1e-8, singular_values=None) -> KernelReport:
    s = np.sort(np.linalg.svd(matrix, compute_uv=False) if singular_values is None else singular_values)
    tol = rel_tol * s[-1]
    kdim = int(np.sum(s < tol))
    if kdim == 0:
        gap = np.inf
    else:
        gap = float(s[kdim] / max(s[kdim - 1], 1e-300)) if kdim < len(s) else 0.0
    return KernelReport(float(tau), s[:6].copy(), kdim, float(tol), gap, float(s[0]))


def _constant_mode_singular_values(grid: PeriodicGrid, potentials: PotentialPair, tau: float) -> np.ndarray:
    xi = _full_wavevectors(grid, tau)
    blocks = mode_block(xi, potentials.V[0][None], potentials.V0[0])
    return np.linalg.svd(blocks, compute_uv=False).ravel()


def invertibility_scan(taus, grid: PeriodicGrid, potentials: PotentialPair, rel_tol: float = 1e-8,
                       threads: int = 1) -> list[KernelReport]:
    """Singular-value scan of the indicial family over a finite frequency grid."""

    def one(tau: float) -> KernelReport:
        if potentials.is_constant:
            s = _constant_mode_singular_values(grid, potentials, tau)
            return kernel_report(None, tau, rel_tol, singular_values=s)
        return kernel_report(assemble_xi_hat(tau, grid, potentials).matrix, tau, rel_tol)

    taus = [float(t) for t in taus]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, taus))
    return [one(t) for t in taus]


# ------------------------------------------------------------- Green identity


def _mode_coeffs(U: StateField) -> np.ndarray:
    return U.grid.to_modes(U.stacked())


def conormal_at(grid: PeriodicGrid, tau: float, coeffs: np.ndarray, point: float, normal: float) -> np.ndarray:
    """Traction ``-2 D_nu u + p nu`` of a band-limited state (d=1) at a point."""
    k = grid.band_wavevectors[:, 0]
    basis = np.exp(1j * k * point) / np.sqrt(grid.circumference)
    ux, ut, p = coeffs @ basis
    dux, dut, _ = (coeffs * (1j * k)) @ basis
    d_nu = normal * np.array([dux, 0.5 * (dut + 1j * tau * ux)])
    return -2 * d_nu + p * np.array([normal, 0.0])


def green_identity_check(tau: float, U: StateField, W: StateField, potentials: PotentialPair,
                         arc: Arc | None = None) -> EnergyReport:
    """Compare ``(Xi(tau) U, W)`` with the sesquilinear form plus the boundary pairing.

    Over the whole torus the comparison is done with the assembled matrices.
    On an arc (d=1) every band-limited product is formed on a 4x finer grid
    and integrated with exact spectral arc weights.
    """
    grid = U.grid
    if W.grid != grid or potentials.grid != grid:
        raise ValueError("fields and potentials must share the grid")
    xi_hat = assemble_xi_hat(tau, grid, potentials)
    D, G = xi_hat.def_matrix, xi_hat.grad_matrix
    nv = grid.dimension + 1
    xu = _mode_coeffs(U).ravel()
    xw = _mode_coeffs(W).ravel()
    M = grid.n_modes
    if arc is None:
        uu, pu = xu[: nv * M], xu[nv * M:]
        uw, pw = xw[: nv * M], xw[nv * M:]
        Vmat, V0mat = _potential_blocks(potentials)
        lhs = np.vdot(xw, xi_hat.matrix @ xu)
        form = (
            2 * np.vdot(D @ uw, D @ uu)
            + np.vdot(pw, G.conj().T @ uu)
            + np.vdot(G.conj().T @ uw, pu)
            + np.vdot(uw, Vmat @ uu)
            - np.vdot(pw, V0mat @ pu)
        )
        return EnergyReport(complex(lhs), complex(form), 0j)

    if grid.dimension != 1:
        raise ValueError("arc identities are implemented for 1-D cross-sections")
    if arc.length < 4 * grid.spacing:
        raise ValueError("degenerate arc: shorter than four grid cells")
    factor = 4
    nf = factor * grid.n_points
    w_arc = spectral_arc_weights(nf, grid.circumference, arc.alpha, arc.beta)

    def fine(coeffs: np.ndarray) -> np.ndarray:
        return _upsample(grid.from_modes(coeffs), factor)

    def integrate(a: np.ndarray, b: np.ndarray) -> complex:
        return complex(np.sum(a * np.conj(b) * w_arc))

    cu = xu.reshape(nv + 1, M)
    cw = xw.reshape(nv + 1, M)
    def_u = (D @ cu[:nv].ravel()).reshape(-1, M)
    def_w = (D @ cw[:nv].ravel()).reshape(-1, M)
    div_u = (G.conj().T @ cu[:nv].ravel())
    div_w = (G.conj().T @ cw[:nv].ravel())
    lap_u = (2 * D.conj().T @ D @ cu[:nv].ravel()).reshape(nv, M)
    grad_p = (G @ cu[nv]).reshape(nv, M)

    u_f = fine(cu[:nv])
    w_f = fine(cw[:nv])
    p_f, q_f = fine(cu[nv]), fine(cw[nv])
    V_f = np.moveaxis(_upsample(np.moveaxis(potentials.V, 0, -1), factor), -1, 0)
    V0_f = _upsample(potentials.V0, factor)
    Vu_f = np.einsum("jab,bj->aj", V_f, u_f)

    vel_row = fine(lap_u + grad_p) + Vu_f
    pres_row = fine(div_u) - V0_f * p_f
    lhs = sum(integrate(vel_row[a], w_f[a]) for a in range(nv)) + integrate(pres_row, q_f)

    dfu, dfw = fine(def_u), fine(def_w)
    form = (
        2 * sum(integrate(dfu[r], dfw[r]) for r in range(dfu.shape[0]))
        + integrate(fine(div_u), q_f)
        + integrate(p_f, fine(div_w))
        + sum(integrate(Vu_f[a], w_f[a]) for a in range(nv))
        - integrate(V0_f * p_f, q_f)
    )

    k = grid.band_wavevectors[:, 0]
    boundary = 0j
    for point, normal in zip(arc.points, arc.normals):
        traction = conormal_at(grid, tau, cu, point, normal)
        basis = np.exp(1j * k * point) / np.sqrt(grid.circumference)
        w_here = cw[:nv] @ basis
        boundary += complex(np.dot(traction, np.conj(w_here)))
    return EnergyReport(complex(lhs), complex(form), boundary)


# ------------------------------------------------------------ closed torus


def assemble_xi_closed_torus(grid: PeriodicGrid, potentials: PotentialPair, rel_tol: float = 1e-8):
    """Stokes block operator on the closed flat torus carried by ``grid``.

    The torus dimension is ``grid.dimension`` and the velocity has that many
    components.  Returns ``(matrix, KernelReport)``; constant potentials give a
    sparse block-diagonal matrix whose singular values are collected per mode.
    """
    n = grid.dimension
    if potentials.grid != grid or potentials.components != n:
        raise ValueError("closed-torus potentials need the torus grid and n velocity components")
    xi = grid.band_wavevectors
    M = grid.n_modes
    if potentials.is_constant:
        blocks = mode_block(xi, potentials.V[0][None], potentials.V0[0])
        mat = sp.block_diag(list(blocks), format="csr")
        # reorder from mode-major to component-major layout
        order = np.arange((n + 1) * M).reshape(M, n + 1).T.ravel()
        mat = mat[order][:, order]
        s = np.linalg.svd(blocks, compute_uv=False).ravel()
        return mat, kernel_report(None, 0.0, rel_tol, singular_values=s)
    Dm = _blocks_from_modes(def_mode_matrices(xi))
    G = _blocks_from_modes((1j * xi)[:, :, None])
    Vmat, V0mat = _potential_blocks(potentials)
    mat = np.block([[2 * Dm.conj().T @ Dm + Vmat, G], [G.conj().T, -V0mat]])
    return mat, kernel_report(mat, 0.0, rel_tol)
