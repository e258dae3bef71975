"""Dirichlet problems on the cylinder ``arc x R`` and small-data Navier-Stokes.

The axial line is replaced by a periodic window ``[-T, T)`` and handled by
FFT.  Fields on the domain live on Chebyshev nodes of the arc times the
axial nodes; arrays are shaped ``(components, nx, nt)``.

Two independent linear solvers are provided per axial frequency: a boundary
integral route (layer potentials from :mod:`cylstokes.layers`) and a direct
Chebyshev collocation of the mixed velocity-pressure system.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from math import comb, factorial

import numpy as np
import scipy.linalg as sla

from .chebyshev import ChebyshevInterval
from .cylinder import PotentialPair, mode_block
from .layers import (
    IndicialResolvent,
    boundary_operators,
    collocation_matrix,
    layer_potential,
    one_sided_trace,
)
from .spectral import Arc, PeriodicGrid, arc_plateau

__all__ = [
    "AxialWindow",
    "BoundaryData",
    "CylinderDomain",
    "CylinderField",
    "SolveReport",
    "NSReport",
    "ConstantsEstimate",
    "ManufacturedState",
    "SingularBoundaryOperator",
    "NavierStokesDivergence",
    "CollocationSolver",
    "sobolev_norm",
    "stokes_residual",
    "solve_dirichlet_direct",
    "solve_dirichlet_bie",
    "solve_nonhomogeneous",
    "advection",
    "estimate_product_constant",
    "estimate_solution_constant",
    "estimate_constants",
    "solve_navier_stokes",
]


# ------------------------------------------------------------------ geometry


@dataclass(frozen=True)
class AxialWindow:
    """Periodic axial window ``[-T, T)`` with ``n_axial`` nodes."""

    half_length: float = 16.0
    n_axial: int = 256

    def __post_init__(self) -> None:
        if not self.half_length > 0:
            raise ValueError("half_length must be positive")
        if self.n_axial < 4 or self.n_axial % 2:
            raise ValueError("n_axial must be even and >= 4")

    @property
    def spacing(self) -> float:
        return 2 * self.half_length / self.n_axial

    @cached_property
    def nodes(self) -> np.ndarray:
        return -self.half_length + self.spacing * np.arange(self.n_axial)

    @cached_property
    def taus(self) -> np.ndarray:
        """Axial frequencies ``2 pi m / (2T)`` in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n_axial, d=self.spacing)

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Coefficients ``c`` with ``values(t_j) = sum_m c_m exp(i tau_m t_j)`` (last axis)."""
        v = np.asarray(values, dtype=complex)
        return np.fft.fft(v, axis=-1) / self.n_axial * np.exp(1j * self.taus * self.half_length)

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        c = np.asarray(coeffs, dtype=complex)
        return np.fft.ifft(c * np.exp(-1j * self.taus * self.half_length), axis=-1) * self.n_axial

    def derivative(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        mult = (1j * self.taus) ** order
        mult[self.n_axial // 2] = 0.0
        return self.inverse(self.forward(values) * mult)


@dataclass(frozen=True)
class CylinderDomain:
    """Chebyshev nodes across the arc times the axial window."""

    cheb: ChebyshevInterval
    window: AxialWindow

    @classmethod
    def for_arc(cls, arc: Arc, window: AxialWindow, n_nodes: int = 64) -> "CylinderDomain":
        return cls(ChebyshevInterval(arc.alpha, arc.beta, n_nodes), window)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.cheb.n, self.window.n_axial)

    def dx(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        D = np.linalg.matrix_power(self.cheb.diff_matrix, order)
        return np.einsum("ij,...jt->...it", D, values)

    def dt(self, values: np.ndarray, order: int = 1) -> np.ndarray:
        return self.window.derivative(values, order)

    def l2_squared(self, values: np.ndarray, interior_only: bool = False) -> float:
        w = self.cheb.quadrature_weights.copy()
        if interior_only:
            w[0] = w[-1] = 0.0
        v = np.abs(np.asarray(values)) ** 2
        return float(np.sum(v * w[:, None]) * self.window.spacing)


@dataclass(frozen=True)
class CylinderField:
    domain: CylinderDomain
    velocity: np.ndarray
    pressure: np.ndarray

    def __post_init__(self) -> None:
        if self.velocity.shape != (2,) + self.domain.shape or self.pressure.shape != self.domain.shape:
            raise ValueError("field arrays do not match the domain")

    @classmethod
    def from_stacked(cls, domain: CylinderDomain, values: np.ndarray) -> "CylinderField":
        return cls(domain, np.asarray(values[:2]), np.asarray(values[2]))

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.velocity, self.pressure[None]], axis=0)

    def __add__(self, other: "CylinderField") -> "CylinderField":
        return CylinderField(self.domain, self.velocity + other.velocity, self.pressure + other.pressure)

    def __sub__(self, other: "CylinderField") -> "CylinderField":
        return CylinderField(self.domain, self.velocity - other.velocity, self.pressure - other.pressure)

    def interior_l2(self, other: "CylinderField | None" = None) -> float:
        diff = self if other is None else self - other
        return float(np.sqrt(self.domain.l2_squared(diff.stacked(), interior_only=True)))


# ------------------------------------------------------------ boundary data


@dataclass(frozen=True)
class BoundaryData:
    """Velocity data at the two arc ends, shape ``(2 points, 2 components, n_axial)``."""

    window: AxialWindow
    values: np.ndarray
    m: int = 1

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=complex)
        if v.shape != (2, 2, self.window.n_axial):
            raise ValueError("boundary data must have shape (2, 2, n_axial)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def gaussian(cls, window: AxialWindow, vectors, width: float = 1.0, center: float = 0.0,
                 m: int = 1) -> "BoundaryData":
        vec = np.asarray(vectors, dtype=complex).reshape(2, 2)
        g = np.exp(-((window.nodes - center) ** 2) / (2 * width**2))
        return cls(window, vec[:, :, None] * g[None, None, :], m)

    @classmethod
    def zeros(cls, window: AxialWindow, m: int = 1) -> "BoundaryData":
        return cls(window, np.zeros((2, 2, window.n_axial)), m)

    @classmethod
    def from_coefficients(cls, window: AxialWindow, coeffs: np.ndarray, m: int = 1) -> "BoundaryData":
        return cls(window, window.inverse(np.asarray(coeffs).reshape(2, 2, -1)), m)

    def __add__(self, other: "BoundaryData") -> "BoundaryData":
        return BoundaryData(self.window, self.values + other.values, self.m)

    def scaled(self, c: float) -> "BoundaryData":
        return BoundaryData(self.window, c * self.values, self.m)

    def edge_magnitude(self) -> float:
        return float(np.max(np.abs(self.values[..., [0, -1]])))

    def check_window(self, tol: float = 1e-10) -> None:
        peak = float(np.max(np.abs(self.values))) if self.values.size else 0.0
        edge = self.edge_magnitude()
        if edge > tol * max(1.0, peak):
            raise ValueError(
                f"boundary data has not decayed at |t| = T (edge value {edge:.2e}); "
                "enlarge the axial window"
            )

    def coefficients(self) -> np.ndarray:
        """Per-frequency data ordered ``(alpha_x, alpha_t, beta_x, beta_t)``, shape ``(4, n_axial)``."""
        return self.window.forward(self.values).reshape(4, -1)

    def norm(self, s: float | None = None) -> float:
        """``H^s`` norm on the two boundary lines (default ``s = m + 1/2``)."""
        s = self.m + 0.5 if s is None else s
        c = self.coefficients()
        weight = (1 + self.window.taus**2) ** s
        return float(np.sqrt(2 * self.window.half_length * np.sum(weight * np.abs(c) ** 2)))


# ----------------------------------------------------------- Sobolev norms


def _multi_index_weights(m: int, dims: int):
    """Pairs ``(alpha, weight)`` with ``sum weight k**(2 alpha) = (1 + |k|^2)**m``."""
    out = []
    if dims == 1:
        for j in range(m + 1):
            out.append(((j,), comb(m, j)))
        return out
    for j in range(m + 1):
        for a in range(j + 1):
            alpha = (a, j - a)
            out.append((alpha, comb(m, j) * factorial(j) // (factorial(a) * factorial(j - a))))
    return out


def _periodic_lengths(domain) -> tuple[float, ...]:
    if isinstance(domain, PeriodicGrid):
        return (domain.circumference,) * domain.dimension
    return tuple(float(v) for v in domain)


def _torus_norm_multiplier(values: np.ndarray, lengths, m: float) -> float:
    d = len(lengths)
    axes = tuple(range(-d, 0))
    shape = values.shape[-d:]
    c = np.fft.fftn(values, axes=axes) / np.prod(shape)
    k2 = np.zeros(shape)
    for ax, (n, L) in enumerate(zip(shape, lengths)):
        k = 2 * np.pi * np.fft.fftfreq(n, d=L / n)
        k2 = k2 + np.expand_dims(k**2, tuple(i for i in range(d) if i != ax))
    return float(np.sqrt(np.prod(lengths) * np.sum((1 + k2) ** m * np.abs(c) ** 2)))


def _torus_derivative(values: np.ndarray, lengths, alpha) -> np.ndarray:
    d = len(lengths)
    axes = tuple(range(-d, 0))
    shape = values.shape[-d:]
    c = np.fft.fftn(values, axes=axes)
    for ax, (n, L, a) in enumerate(zip(shape, lengths, alpha)):
        if a == 0:
            continue
        k = 2 * np.pi * np.fft.fftfreq(n, d=L / n)
        mult = (1j * k) ** a
        mult[n // 2] = 0.0
        c = c * np.expand_dims(mult, tuple(i for i in range(d) if i != ax))
    return np.fft.ifftn(c, axes=axes)


def sobolev_norm(values, m: int, domain, route: str = "auto", interior_only: bool = False) -> float:
    """``H^m`` norm of sampled values (leading axes are components).

    ``domain`` is a :class:`PeriodicGrid` or a tuple of torus side lengths
    (full torus: multiplier ``(1 + |k|^2)**(m/2)``, any ``m >= -1``), or a
    :class:`CylinderDomain` (weighted derivative sum, ``m >= 0``).  The
    derivative-sum weights make the two routes coincide on a torus.
    """
    vals = np.asarray(values, dtype=complex)
    if isinstance(domain, CylinderDomain):
        if route == "multiplier":
            raise ValueError("the multiplier route needs a full torus")
        if not 0 <= m <= 4:
            raise ValueError("subdomain norms need 0 <= m <= 4")
        total = 0.0
        for (a, b), w in _multi_index_weights(m, 2):
            deriv = vals
            if a:
                deriv = domain.dx(deriv, a)
            if b:
                deriv = domain.dt(deriv, b)
            total += w * domain.l2_squared(deriv, interior_only)
        return float(np.sqrt(total))
    lengths = _periodic_lengths(domain)
    if isinstance(domain, PeriodicGrid) and domain.dimension == 2 and vals.shape[-1] == domain.size:
        vals = vals.reshape(vals.shape[:-1] + (domain.n_points, domain.n_points))
    if not -1 <= m <= 4:
        raise ValueError("torus norms need -1 <= m <= 4")
    if route in ("auto", "multiplier"):
        return _torus_norm_multiplier(vals, lengths, m)
    if route != "derivatives" or m < 0:
        raise ValueError("derivative route needs m >= 0")
    cell = np.prod([L / n for L, n in zip(lengths, vals.shape[-len(lengths):])])
    total = 0.0
    for alpha, w in _multi_index_weights(m, len(lengths)):
        total += w * float(np.sum(np.abs(_torus_derivative(vals, lengths, alpha)) ** 2) * cell)
    return float(np.sqrt(total))


# --------------------------------------------------------------- residuals


def _potentials_on(domain: CylinderDomain, potentials: PotentialPair):
    V, V0 = potentials.at(domain.cheb.nodes)
    return V, V0


def stokes_residual(fld: CylinderField, potentials: PotentialPair, forcing: np.ndarray | None = None,
                    advect: bool = False) -> tuple[float, float]:
    """Interior L2 norms of the velocity and pressure rows of ``Xi U (+ adv) - forcing``."""
    dom = fld.domain
    u, p = fld.velocity, fld.pressure
    ux_x = dom.dx(u[0])
    ut_t = dom.dt(u[1])
    div = ux_x + ut_t
    lap = dom.dx(u, 2) + dom.dt(u, 2)
    grad_div = np.stack([dom.dx(div), dom.dt(div)])
    grad_p = np.stack([dom.dx(p), dom.dt(p)])
    V, V0 = _potentials_on(dom, potentials)
    Vu = np.einsum("xab,bxt->axt", V, u)
    vel = -lap - grad_div + Vu + grad_p
    pres = -div - V0[:, None] * p
    if advect:
        vel = vel + advection(u, u, dom)
    if forcing is not None:
        vel = vel - forcing[:2]
        pres = pres - forcing[2]
    return (float(np.sqrt(dom.l2_squared(vel, True))), float(np.sqrt(dom.l2_squared(pres, True))))


def _indicial_rows(tau, u, du, d2u, p, dp, V, V0):
    """Per-frequency velocity and pressure rows from x-derivatives at points."""
    div = du[0] + 1j * tau * u[1]
    ddiv = d2u[0] + 1j * tau * du[1]
    Vu = np.einsum("xab,bx->ax", V, u)
    vx = -d2u[0] + tau**2 * u[0] - ddiv + Vu[0] + dp
    vt = -d2u[1] + tau**2 * u[1] - 1j * tau * div + Vu[1] + 1j * tau * p
    pr = -div - V0 * p
    return np.stack([vx, vt, pr])


# ------------------------------------------------------------------ reports


@dataclass(frozen=True)
class SolveReport:
    method: str
    m: int
    velocity_norm: float
    pressure_norm: float
    data_norm: float
    constant_ratio: float
    residual: float
    boundary_mismatch: float
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in (
            "method", "m", "velocity_norm", "pressure_norm", "data_norm", "constant_ratio",
            "residual", "boundary_mismatch")}
        out["extras"] = self.extras
        return out


class SingularBoundaryOperator(RuntimeError):
    def __init__(self, tau: float, min_singular_value: float):
        super().__init__(
            f"boundary operator is near-singular at tau={tau:g} (min singular value {min_singular_value:.3e})"
        )
        self.tau = tau
        self.min_singular_value = min_singular_value


def _solution_norms(fld: CylinderField, m: int) -> tuple[float, float]:
    return (sobolev_norm(fld.velocity, m + 1, fld.domain), sobolev_norm(fld.pressure, m, fld.domain))


def _make_report(method, fld, potentials, data_norm, m, mismatch, forcing=None, **extras) -> SolveReport:
    un, pn = _solution_norms(fld, m)
    rv, rp = stokes_residual(fld, potentials, forcing)
    ratio = (un + pn) / data_norm if data_norm > 0 else 0.0
    return SolveReport(method, m, un, pn, data_norm, ratio, float(np.hypot(rv, rp)), float(mismatch), extras)


# -------------------------------------------------------- direct collocation


class CollocationSolver:
    """Per-frequency LU factorisations of the collocated system, reused across right-hand sides."""

    def __init__(self, potentials: PotentialPair, arc: Arc, window: AxialWindow, n_nodes: int = 64,
                 max_condition: float = 1e12):
        self.domain = CylinderDomain.for_arc(arc, window, n_nodes)
        self.potentials = potentials
        self.max_condition = max_condition
        self._lu: dict[int, tuple] = {}
        self.max_condition_seen = 0.0

    def _factor(self, j: int):
        if j not in self._lu:
            tau = float(self.domain.window.taus[j])
            cheb = self.domain.cheb
            n = cheb.n
            A = collocation_matrix(tau, cheb, self.potentials)
            for comp in range(2):
                for node in (0, n - 1):
                    row = comp * n + node
                    A[row] = 0.0
                    A[row, row] = 1.0
            lu = sla.lu_factor(A)
            rcond, _ = sla.lapack.zgecon(lu[0], np.linalg.norm(A, 1), norm="1")
            cond = 1.0 / rcond if rcond > 0 else np.inf
            self.max_condition_seen = max(self.max_condition_seen, cond)
            if not cond < self.max_condition:
                raise np.linalg.LinAlgError(
                    f"collocation matrix condition number {cond:.3e} exceeds {self.max_condition:.1e} at tau={tau:g}"
                )
            self._lu[j] = lu
        return self._lu[j]

    def solve(self, data_coeffs: np.ndarray, forcing_coeffs: np.ndarray | None = None,
              active_tol: float = 1e-15) -> np.ndarray:
        """Per-frequency solution coefficients ``(3, n, nt)``."""
        n = self.domain.cheb.n
        nt = self.domain.window.n_axial
        out = np.zeros((3, n, nt), complex)
        scale = max(np.max(np.abs(data_coeffs)), 0.0 if forcing_coeffs is None else np.max(np.abs(forcing_coeffs)))
        if scale == 0:
            return out
        for j in range(nt):
            rhs = np.zeros((3, n), complex) if forcing_coeffs is None else forcing_coeffs[:, :, j].copy()
            rhs[0, 0], rhs[1, 0] = data_coeffs[0, j], data_coeffs[1, j]
            rhs[0, -1], rhs[1, -1] = data_coeffs[2, j], data_coeffs[3, j]
            if np.max(np.abs(rhs)) <= active_tol * scale:
                continue
            out[:, :, j] = sla.lu_solve(self._factor(j), rhs.ravel()).reshape(3, n)
        return out


def _forcing_on(domain: CylinderDomain, forcing) -> np.ndarray | None:
    if forcing is None:
        return None
    if callable(forcing):
        x = domain.cheb.nodes[:, None]
        t = domain.window.nodes[None, :]
        return np.asarray(forcing(x, t), dtype=complex)
    arr = np.asarray(forcing, dtype=complex)
    if arr.shape != (3,) + domain.shape:
        raise ValueError("forcing arrays must have shape (3, nx, nt) on the Chebyshev nodes")
    return arr


def _resample_forcing(forcing_vals: np.ndarray, src: CylinderDomain, dst: CylinderDomain) -> np.ndarray:
    P = src.cheb.interpolation_matrix(dst.cheb.nodes)
    return np.einsum("ij,cjt->cit", P, forcing_vals)


def solve_dirichlet_direct(f: BoundaryData, potentials: PotentialPair, arc: Arc, n_nodes: int = 64,
                           verify_nodes: int | None = 96, forcing=None, require_decay: bool = True,
                           max_condition: float = 1e12, solver: CollocationSolver | None = None,
                           m: int | None = None) -> tuple[CylinderField, SolveReport]:
    """Chebyshev collocation per axial frequency with a finer re-solve as convergence check.

    ``forcing`` is ``(h_x, h_t, r)`` as a callable of ``(x, t)`` or an array
    on the Chebyshev nodes.
    """
    if require_decay:
        f.check_window()
    window = f.window
    solver = solver or CollocationSolver(potentials, arc, window, n_nodes, max_condition)
    dom = solver.domain
    fvals = _forcing_on(dom, forcing)
    fco = None if fvals is None else window.forward(fvals)
    data = f.coefficients()
    coeffs = solver.solve(data, fco)
    fld = CylinderField.from_stacked(dom, window.inverse(coeffs))
    extras = {"active_taus": int(np.sum(np.any(np.abs(coeffs) > 0, axis=(0, 1)))),
              "max_condition": solver.max_condition_seen}
    if verify_nodes:
        fine = CollocationSolver(potentials, arc, window, verify_nodes, max_condition)
        if fvals is None:
            ffine = None
        elif callable(forcing):
            ffine = window.forward(_forcing_on(fine.domain, forcing))
        else:
            ffine = window.forward(_resample_forcing(fvals, dom, fine.domain))
        cf = fine.solve(data, ffine)
        back = np.einsum("ij,cjt->cit", fine.domain.cheb.interpolation_matrix(dom.cheb.nodes), cf)
        scale = max(float(np.max(np.abs(coeffs))), 1e-300)
        extras["convergence_check"] = float(np.max(np.abs(back - coeffs)) / scale)
    mm = f.m if m is None else m
    data_norm = f.norm(mm + 0.5)
    if fvals is not None:
        data_norm += _forcing_norm(fvals, dom, mm)
    mismatch = float(np.max(np.abs(fld.velocity[:, [0, -1], :] - np.moveaxis(f.values, 0, 1))))
    return fld, _make_report("direct", fld, potentials, data_norm, mm, mismatch, fvals, **extras)


def _forcing_norm(fvals: np.ndarray, dom: CylinderDomain, m: int) -> float:
    if m < 1:
        raise ValueError("forcing norms on the arc need m >= 1")
    return sobolev_norm(fvals[:2], m - 1, dom) + sobolev_norm(fvals[2], m, dom)


# ------------------------------------------------------------- BIE solver


def _bie_one_tau(tau, data, potentials, arc, representation, x_int, n_band, V_int, V0_int):
    res = IndicialResolvent(tau, potentials, n_band=n_band)
    fam = boundary_operators(tau, arc, potentials, resolvent=res)
    op = fam.S_hat if representation == "single" else 0.5 * np.eye(4) + fam.K_hat
    s = np.linalg.svd(op, compute_uv=False)
    if s.min() < 1e-10 * max(1.0, s.max()):
        raise SingularBoundaryOperator(tau, float(s.min()))
    density = np.linalg.solve(op, data)
    fld = layer_potential(res, arc, density, representation)
    d1 = fld.derivative()
    d2 = d1.derivative()
    vals, dv, d2v = fld.evaluate(x_int), d1.evaluate(x_int), d2.evaluate(x_int)
    kmax = float(np.max(np.abs(res.k)))
    left = one_sided_trace(fld, arc.alpha, +1, kmax).value
    right = one_sided_trace(fld, arc.beta, -1, kmax).value
    rows = _indicial_rows(tau, vals[:2], dv[:2], d2v[:2], vals[2], dv[2], V_int, V0_int)
    mismatch = float(max(np.max(np.abs(left[:2] - data[:2])), np.max(np.abs(right[:2] - data[2:]))))
    full = np.concatenate([left[:, None], vals, right[:, None]], axis=1)
    return full, rows, mismatch, float(s.min())


def _bie_coefficients(data_coeffs, potentials, arc, window, representation, n_nodes, n_band, threads,
                      active_tol=1e-15):
    if representation not in ("single", "double"):
        raise ValueError("representation must be 'single' or 'double'")
    cheb = ChebyshevInterval(arc.alpha, arc.beta, n_nodes)
    x_int = cheb.nodes[1:-1]
    V_int, V0_int = potentials.at(x_int)
    nt = window.n_axial
    coeffs = np.zeros((3, n_nodes, nt), complex)
    residual = np.zeros((3, n_nodes - 2, nt), complex)
    scale = float(np.max(np.abs(data_coeffs))) if data_coeffs.size else 0.0
    active = [j for j in range(nt) if scale > 0 and np.max(np.abs(data_coeffs[:, j])) > active_tol * scale]

    def one(j):
        return j, _bie_one_tau(float(window.taus[j]), data_coeffs[:, j], potentials, arc, representation,
                               x_int, n_band, V_int, V0_int)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, active))
    else:
        results = [one(j) for j in active]
    mismatch, min_sv = 0.0, np.inf
    for j, (full, rows, mis, smin) in results:
        coeffs[:, :, j] = full
        residual[:, :, j] = rows
        mismatch = max(mismatch, mis)
        min_sv = min(min_sv, smin)
    w = cheb.quadrature_weights[1:-1]
    res_norm = float(np.sqrt(2 * window.half_length * np.sum(np.abs(residual) ** 2 * w[None, :, None])))
    return cheb, coeffs, res_norm, mismatch, min_sv, len(active)


def solve_dirichlet_bie(f: BoundaryData, potentials: PotentialPair, arc: Arc, representation: str = "double",
                        n_nodes: int = 64, n_band: int = 512, threads: int = 1, require_decay: bool = True,
                        m: int | None = None) -> tuple[CylinderField, SolveReport]:
    """Layer-potential solution: per frequency solve for a density, evaluate on Chebyshev nodes.

    The double-layer route inverts ``1/2 + K``; the single-layer route
    inverts ``S``.  Values at the arc ends are interior one-sided traces.
    """
    if require_decay:
        f.check_window()
    window = f.window
    cheb, coeffs, res_norm, mismatch, min_sv, n_active = _bie_coefficients(
        f.coefficients(), potentials, arc, window, representation, n_nodes, n_band, threads)
    dom = CylinderDomain(cheb, window)
    fld = CylinderField.from_stacked(dom, window.inverse(coeffs))
    mm = f.m if m is None else m
    report = _make_report(representation, fld, potentials, f.norm(mm + 0.5), mm, mismatch,
                          spectral_residual=res_norm, min_singular_value=min_sv, active_taus=n_active)
    return fld, report


# ------------------------------------------------------ non-homogeneous


def _full_circle_solve(h, r, potentials: PotentialPair, arc: Arc, window: AxialWindow, n_circle: int,
                       margin: float, x_eval: np.ndarray):
    """Solve on the whole cylinder with blended forcing; returns per-frequency values at ``x_eval``.

    Output arrays: values ``(3, len(x), nt)`` and x-derivatives of the same shape.
    """
    if not potentials.is_constant:
        raise NotImplementedError("the full-cylinder route needs constant potentials; use method='direct'")
    L = arc.circumference
    xc = L * np.arange(n_circle) / n_circle
    t = window.nodes
    plateau = arc_plateau(xc, arc, margin)[:, None]
    H = np.zeros((3, n_circle, window.n_axial), complex)
    if h is not None:
        H[:2] = plateau[None] * np.asarray(h(xc[:, None], t[None, :]), dtype=complex)
    if r is not None:
        H[2] = plateau * np.asarray(r(xc[:, None], t[None, :]), dtype=complex)
    Hx = np.fft.fft(H, axis=1) / n_circle
    m = np.fft.fftfreq(n_circle, d=1.0 / n_circle)
    Hx[:, n_circle // 2, :] = 0.0
    k = 2 * np.pi * m / L
    Hc = window.forward(Hx)  # (3, modes, nt)
    V = potentials.V[0]
    v0 = float(potentials.V0[0])
    U = np.zeros_like(Hc)
    for j, tau in enumerate(window.taus):
        xi = np.stack([k, np.full_like(k, tau)], axis=1)
        blocks = mode_block(xi, V[None], v0)
        U[:, :, j] = np.linalg.solve(blocks, Hc[:, :, j].T[..., None])[..., 0].T
    E = np.exp(1j * np.outer(x_eval, k))
    vals = np.einsum("xm,cmt->cxt", E, U)
    ders = np.einsum("xm,cmt->cxt", E * (1j * k)[None, :], U)
    return vals, ders


def solve_nonhomogeneous(h, r, f: BoundaryData, potentials: PotentialPair, arc: Arc, method: str = "bie",
                         representation: str = "double", n_nodes: int = 64, n_circle: int = 1024,
                         margin_cells: int | None = None, n_band: int = 512, threads: int = 1,
                         require_decay: bool = True, m: int | None = None) -> tuple[CylinderField, SolveReport]:
    """``Xi U = (h, r)`` in the cylinder with ``u = f`` on its boundary.

    ``h`` (two components) and ``r`` are callables of ``(x, t)``; ``None``
    means zero.  ``method="bie"`` blends the forcing onto the whole circle
    with a smooth plateau (1 on the arc, 0 beyond a margin of ``margin_cells``
    cells of the potentials' grid, default 45% of the gap), solves on the full cylinder, then corrects the
    boundary values with the layer-potential solver.  ``method="direct"``
    collocates the forced system on the arc.
    """
    if h is None and r is None:
        if method == "direct":
            return solve_dirichlet_direct(f, potentials, arc, n_nodes, require_decay=require_decay, m=m)
        return solve_dirichlet_bie(f, potentials, arc, representation, n_nodes, n_band, threads,
                                   require_decay, m)
    window = f.window
    mm = f.m if m is None else m

    def stacked_forcing(x, t):
        shape = np.broadcast_shapes(np.shape(x), np.shape(t))
        out = np.zeros((3,) + shape, complex)
        if h is not None:
            out[:2] = h(x, t)
        if r is not None:
            out[2] = r(x, t)
        return out

    if method == "direct":
        return solve_dirichlet_direct(f, potentials, arc, n_nodes, forcing=stacked_forcing,
                                      require_decay=require_decay, m=mm)
    if method != "bie":
        raise ValueError("method must be 'bie' or 'direct'")
    if require_decay:
        f.check_window()
    cheb = ChebyshevInterval(arc.alpha, arc.beta, n_nodes)
    gap = arc.circumference - arc.length
    margin = 0.45 * gap if margin_cells is None else margin_cells * potentials.grid.spacing
    if not 0 < margin <= gap / 2:
        raise ValueError("the blending margin must fit in half the gap outside the arc")
    x_eval = np.concatenate([cheb.nodes, [arc.alpha, arc.beta]])
    vals, _ = _full_circle_solve(h, r, potentials, arc, window, n_circle, margin, x_eval)
    u1 = vals[:, :n_nodes]
    trace1 = vals[:2, n_nodes:]  # (2 comps, 2 ends, nt)
    f1 = f.coefficients() - np.stack([trace1[0, 0], trace1[1, 0], trace1[0, 1], trace1[1, 1]])
    _, u2, _, mismatch, min_sv, n_active = _bie_coefficients(
        f1, potentials, arc, window, representation, n_nodes, n_band, threads)
    dom = CylinderDomain(cheb, window)
    fld = CylinderField.from_stacked(dom, window.inverse(u1 + u2))
    fvals = _forcing_on(dom, stacked_forcing)
    data_norm = f.norm(mm + 0.5) + _forcing_norm(fvals, dom, mm)
    bmis = float(np.max(np.abs(fld.velocity[:, [0, -1], :] - np.moveaxis(f.values, 0, 1))))
    return fld, _make_report(f"bie-{representation}", fld, potentials, data_norm, mm, max(bmis, mismatch),
                             fvals, min_singular_value=min_sv, active_taus=n_active, margin=margin)


# -------------------------------------------------- manufactured solutions


@dataclass(frozen=True)
class ManufacturedState:
    """Real fields ``sum A cos(k x + phase) exp(-(t - c)^2 / (2 w^2))`` per component.

    ``terms[c]`` lists ``(A, k, phase, c, w)`` for components ``(u_x, u_t, p)``.
    """

    terms: tuple

    def evaluate(self, x, t, dx: int = 0, dt: int = 0) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(x.shape, t.shape)
        out = np.zeros((3,) + shape)
        for comp, terms in enumerate(self.terms):
            for amp, k, phase, c, w in terms:
                xs = np.real(amp * (1j * k) ** dx * np.exp(1j * (k * x + phase)))
                s = (t - c) / w
                g = np.exp(-0.5 * s * s)
                # derivatives of the Gaussian via Hermite polynomials
                herm = np.polynomial.hermite_e.hermeval(s, [0] * dt + [1])
                out[comp] = out[comp] + xs * g * herm * (-1 / w) ** dt
        return out

    def forcing(self, potentials: PotentialPair):
        """Callables ``h(x, t)`` and ``r(x, t)`` with ``Xi U = (h, r)``."""

        def rows(x, t):
            u = self.evaluate(x, t)
            ux, uxx = self.evaluate(x, t, dx=1), self.evaluate(x, t, dx=2)
            ut, utt, uxt = self.evaluate(x, t, dt=1), self.evaluate(x, t, dt=2), self.evaluate(x, t, dx=1, dt=1)
            div = ux[0] + ut[1]
            div_x = uxx[0] + uxt[1]
            div_t = uxt[0] + utt[1]
            xs = np.broadcast_to(np.asarray(x, dtype=float), u.shape[1:])
            V, V0 = potentials.at(xs.ravel())
            V = V.reshape(xs.shape + V.shape[1:])
            V0 = V0.reshape(xs.shape)
            Vu = np.einsum("...ab,b...->a...", V, u[:2])
            hx = -(uxx[0] + utt[0]) - div_x + Vu[0] + ux[2]
            ht = -(uxx[1] + utt[1]) - div_t + Vu[1] + ut[2]
            r = -div - V0 * u[2]
            return np.stack([hx, ht]), r

        return (lambda x, t: rows(x, t)[0]), (lambda x, t: rows(x, t)[1])

    def boundary_data(self, arc: Arc, window: AxialWindow, m: int = 1) -> BoundaryData:
        t = window.nodes
        vals = np.stack([self.evaluate(np.full_like(t, pt), t)[:2] for pt in arc.points])
        return BoundaryData(window, vals, m)

    def on_domain(self, domain: CylinderDomain) -> CylinderField:
        vals = self.evaluate(domain.cheb.nodes[:, None], domain.window.nodes[None, :])
        return CylinderField.from_stacked(domain, vals.astype(complex))


# -------------------------------------------------------------- nonlinear


def advection(u: np.ndarray, v: np.ndarray, domain: CylinderDomain) -> np.ndarray:
    """``(u . grad) v`` for velocity arrays ``(2, nx, nt)``."""
    return u[0][None] * domain.dx(v) + u[1][None] * domain.dt(v)


def _random_domain_field(domain: CylinderDomain, rng: np.random.Generator, comps: int, n_terms: int = 3,
                         max_wavenumber: float = 3.0) -> np.ndarray:
    x = domain.cheb.nodes[:, None]
    t = domain.window.nodes[None, :]
    out = np.zeros((comps,) + domain.shape)
    for c in range(comps):
        for _ in range(n_terms):
            k = rng.uniform(0, max_wavenumber)
            w = rng.uniform(0.7, 2.0)
            out[c] += rng.normal() * np.cos(k * x + rng.uniform(0, 2 * np.pi)) * np.exp(
                -((t - rng.uniform(-3, 3)) ** 2) / (2 * w * w))
    return out


def _random_boundary_data(window: AxialWindow, rng: np.random.Generator, m: int) -> BoundaryData:
    total = BoundaryData.zeros(window, m)
    for _ in range(2):
        total = total + BoundaryData.gaussian(window, rng.normal(size=(2, 2)), rng.uniform(0.7, 2.0),
                                              rng.uniform(-3, 3), m)
    return total


@dataclass(frozen=True)
class ConstantsEstimate:
    m: int
    product_constant: float
    solution_constant: float
    n_pairs: int
    n_samples: int

    @property
    def zeta(self) -> float:
        return 3.0 / (16 * self.product_constant * self.solution_constant**2)

    @property
    def eta(self) -> float:
        return 1.0 / (4 * self.product_constant * self.solution_constant)

    def to_dict(self) -> dict:
        return {"m": self.m, "C": self.product_constant, "C_m": self.solution_constant,
                "zeta": self.zeta, "eta": self.eta, "n_pairs": self.n_pairs, "n_samples": self.n_samples}


def estimate_product_constant(domain, m: int, n_pairs: int = 200, seed: int = 0) -> float:
    """Largest sampled ``|(u.grad)v|_{H^{m-1}} / (|u|_{H^{m+1}} |v|_{H^{m+1}})``.

    ``domain`` is a :class:`CylinderDomain` (needs ``m >= 1``) or a square
    :class:`PeriodicGrid` of dimension 2 (full torus, ``m >= 0``).
    """
    rng = np.random.default_rng(seed)
    best = 0.0
    if isinstance(domain, PeriodicGrid):
        if domain.dimension != 2:
            raise ValueError("torus sampling needs a 2-D grid")
        n = domain.n_points
        lengths = (domain.circumference, domain.circumference)
        kmax = max(2, n // 6)
        for _ in range(n_pairs):
            fields = []
            for _ in range(2):
                c = np.zeros((2, n, n), complex)
                idx = rng.integers(-kmax, kmax + 1, size=(2, 6, 2))
                for comp in range(2):
                    for a, b in idx[comp]:
                        c[comp, a % n, b % n] += rng.normal() + 1j * rng.normal()
                fields.append(np.real(np.fft.ifft2(c, axes=(-2, -1))) * n * n)
            u, v = fields
            grads = [_torus_derivative(v, lengths, (1, 0)), _torus_derivative(v, lengths, (0, 1))]
            adv = np.real(u[0][None] * grads[0] + u[1][None] * grads[1])
            num = sobolev_norm(adv, m - 1, lengths)
            den = sobolev_norm(u, m + 1, lengths) * sobolev_norm(v, m + 1, lengths)
            best = max(best, num / den)
        return float(best)
    if m < 1:
        raise ValueError("subdomain product estimates need m >= 1")
    for _ in range(n_pairs):
        u = _random_domain_field(domain, rng, 2)
        v = _random_domain_field(domain, rng, 2)
        num = sobolev_norm(advection(u, v, domain), m - 1, domain)
        den = sobolev_norm(u, m + 1, domain) * sobolev_norm(v, m + 1, domain)
        best = max(best, num / den)
    return float(best)


def estimate_solution_constant(potentials: PotentialPair, arc: Arc, window: AxialWindow, m: int = 1,
                               n_samples: int = 40, seed: int = 0, probes=(), n_nodes: int = 64,
                               solver: CollocationSolver | None = None) -> float:
    """Largest sampled ``(|u|_{H^{m+1}} + |p|_{H^m}) / (|h|_{H^{m-1}} + |f|_{H^{m+1/2}})``.

    ``probes`` are extra ``(h, f)`` pairs (``h`` as a ``(2, nx, nt)`` array)
    included in the maximum.
    """
    rng = np.random.default_rng(seed)
    solver = solver or CollocationSolver(potentials, arc, window, n_nodes)
    dom = solver.domain
    samples = []
    for _ in range(n_samples):
        samples.append((_random_domain_field(dom, rng, 2), _random_boundary_data(window, rng, m)))
    samples.extend(probes)
    best = 0.0
    for h, f in samples:
        ratio = _linear_ratio(h, f, potentials, solver, m)
        best = max(best, ratio)
    return float(best)


def _linear_ratio(h, f, potentials, solver, m):
    dom = solver.domain
    forcing = np.zeros((3,) + dom.shape, complex)
    forcing[:2] = h
    coeffs = solver.solve(f.coefficients(), dom.window.forward(forcing))
    fld = CylinderField.from_stacked(dom, dom.window.inverse(coeffs))
    un, pn = _solution_norms(fld, m)
    data = sobolev_norm(h, m - 1, dom) + f.norm(m + 0.5)
    return (un + pn) / data if data > 0 else 0.0


def estimate_constants(m: int, potentials: PotentialPair, arc: Arc, window: AxialWindow, n_pairs: int = 200,
                       n_samples: int = 40, seed: int = 0, probes=(), n_nodes: int = 64) -> ConstantsEstimate:
    dom = CylinderDomain.for_arc(arc, window, n_nodes)
    C = estimate_product_constant(dom, m, n_pairs, seed)
    Cm = estimate_solution_constant(potentials, arc, window, m, n_samples, seed + 1, probes, n_nodes)
    return ConstantsEstimate(m, C, Cm, n_pairs, n_samples)


@dataclass(frozen=True)
class NSReport:
    iterations: int
    ratios: tuple[float, ...]
    differences: tuple[float, ...]
    iterate_norms: tuple[float, ...]
    velocity_residual: float
    pressure_residual: float
    constants: dict
    data_norm: float
    zeta: float
    eta: float
    solution_norm: float
    apriori_bound: float
    converged: bool

    @property
    def final_residual(self) -> float:
        return float(np.hypot(self.velocity_residual, self.pressure_residual))

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["ratios"] = list(self.ratios)
        out["differences"] = list(self.differences)
        out["iterate_norms"] = list(self.iterate_norms)
        out["final_residual"] = self.final_residual
        return out


class NavierStokesDivergence(RuntimeError):
    pass


def solve_navier_stokes(h, f: BoundaryData, potentials: PotentialPair, arc: Arc, m: int = 1,
                        constants: ConstantsEstimate | None = None, strict: bool = False, tol: float = 1e-10,
                        max_iter: int = 100, n_nodes: int = 64, seed: int = 0) -> tuple[CylinderField, NSReport]:
    """Picard iteration ``u -> velocity of A(h - (u.grad)u, f)`` with the direct linear solver.

    ``h`` is a ``(2, nx, nt)`` array on the Chebyshev nodes, a callable of
    ``(x, t)``, or ``None``.  The smallness radius is advisory unless
    ``strict`` is set, in which case data above it is refused.
    """
    if 2 >= 2 * (m + 2):
        raise ValueError("the product estimate needs n < 2(m + 2)")
    f.check_window()
    window = f.window
    solver = CollocationSolver(potentials, arc, window, n_nodes)
    dom = solver.domain
    if h is None:
        hv = np.zeros((2,) + dom.shape)
    elif callable(h):
        hv = np.asarray(h(dom.cheb.nodes[:, None], dom.window.nodes[None, :]))
    else:
        hv = np.asarray(h)
    data_norm = sobolev_norm(hv, m - 1, dom) + f.norm(m + 0.5)
    if constants is None:
        constants = estimate_constants(m, potentials, arc, window, seed=seed, probes=[(hv, f)], n_nodes=n_nodes)
    zeta, eta = constants.zeta, constants.eta
    if data_norm > zeta:
        msg = f"data norm {data_norm:.3e} exceeds the smallness radius {zeta:.3e} by a factor {data_norm / zeta:.2f}"
        if strict:
            raise NavierStokesDivergence(msg)
        warnings.warn(msg + "; proceeding", stacklevel=2)
    data = f.coefficients()
    u_prev = np.zeros((2,) + dom.shape)
    p = np.zeros(dom.shape)
    diffs, ratios, norms = [], [], []
    above_one = 0
    converged = False
    forcing = np.zeros((3,) + dom.shape, complex)
    for it in range(1, max_iter + 1):
        forcing[:2] = hv - advection(u_prev, u_prev, dom)
        coeffs = solver.solve(data, window.forward(forcing))
        vals = np.real(window.inverse(coeffs))
        u, p = vals[:2], vals[2]
        diff = sobolev_norm(u - u_prev, m + 1, dom)
        diffs.append(diff)
        norms.append(sobolev_norm(u, m + 1, dom))
        if len(diffs) >= 2 and diffs[-2] > 100 * tol:
            ratios.append(diff / diffs[-2])
            if ratios[-1] > 1:
                above_one += 1
                if above_one >= 2:
                    raise NavierStokesDivergence(
                        f"Picard ratios exceeded 1 twice (last {ratios[-1]:.3f}); data norm {data_norm:.3e} "
                        f"vs smallness radius {zeta:.3e} (factor {data_norm / zeta:.2f})"
                    )
        u_prev = u
        if diff < tol:
            converged = True
            break
    fld = CylinderField(dom, u.astype(complex), p.astype(complex))
    full_forcing = np.zeros((3,) + dom.shape, complex)
    full_forcing[:2] = hv
    rv, rp = stokes_residual(fld, potentials, full_forcing, advect=True)
    un, pn = _solution_norms(fld, m)
    report = NSReport(
        iterations=it, ratios=tuple(ratios), differences=tuple(diffs), iterate_norms=tuple(norms),
        velocity_residual=rv, pressure_residual=rp, constants=constants.to_dict(), data_norm=data_norm,
        zeta=zeta, eta=eta, solution_norm=un + pn,
        apriori_bound=4.0 / 3.0 * constants.solution_constant * data_norm, converged=converged,
    )
    return fld, report
