"""Per-frequency layer potentials on an arc of the cross-section circle (d=1).

A point source on the circle produces a field
``f(x) = (1/L) sum_m g(k_m) exp(i k_m (x - a))`` whose mode response ``g`` is a
rational function of ``k``.  Its large-``k`` expansion
``g(k) ~ sum_n A_n k**-n`` is summed in closed form with Bernoulli
polynomials, so the truncated series carries an exact tail: fields are
accurate right up to the source point and one-sided values can be
extrapolated without Gibbs oscillations.

Component order is ``(u_x, u_t, p)``.  The "+" side of a boundary point is
the interior of the arc.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial

import numpy as np

from .chebyshev import ChebyshevInterval
from .cylinder import PotentialPair, mode_block
from .spectral import Arc, PeriodicGrid

__all__ = [
    "BoundarySpec",
    "TraceVector",
    "TraceValue",
    "SingularIndicialError",
    "ModeResponse",
    "FieldSum",
    "IndicialResolvent",
    "BoundaryOperatorFamily",
    "green_response",
    "one_sided_trace",
    "boundary_operators",
    "operator_identity_check",
    "dtn_matrix",
    "conormal_double_layer_check",
    "pompeiu_check",
    "invertibility_scan_boundary",
    "collocation_solve",
    "collocation_matrix",
    "layer_potential",
]

BoundarySpec = Arc


@dataclass(frozen=True)
class TraceVector:
    """Velocity values at the boundary points, shape ``(points, d+1)``."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=complex)
        if v.ndim != 2:
            raise ValueError("trace vector values must be (points, components)")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    @classmethod
    def from_flat(cls, flat, n_points: int = 2) -> "TraceVector":
        return cls(np.asarray(flat).reshape(n_points, -1))


class SingularIndicialError(RuntimeError):
    def __init__(self, tau: float, min_singular_value: float):
        super().__init__(
            f"indicial operator is numerically singular at tau={tau:g} "
            f"(min singular value {min_singular_value:.3e})"
        )
        self.tau = tau
        self.min_singular_value = min_singular_value


# ------------------------------------------------------------ Bernoulli tails


@lru_cache(maxsize=None)
def _bernoulli_numbers(n: int) -> tuple[float, ...]:
    # exact rationals; scipy.special.bernoulli loses ~1e-13 already at B_4
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(comb(m + 1, j) * b[j] for j in range(m)) / (m + 1))
    return tuple(float(v) for v in b)


def _bernoulli_poly(n: int, x: np.ndarray) -> np.ndarray:
    b = _bernoulli_numbers(n)
    return sum(comb(n, j) * b[j] * x ** (n - j) for j in range(n + 1))


def _periodic_power_sum(n: int, y: np.ndarray, L: float) -> np.ndarray:
    """``sum_{m != 0} exp(i k_m y) / k_m**n`` for ``y`` off the lattice ``L Z``."""
    if n < 0:
        return np.zeros_like(y, dtype=complex)
    if n == 0:
        return -np.ones_like(y, dtype=complex)
    x = np.mod(y / L, 1.0)
    return -((1j * L) ** n) * _bernoulli_poly(n, x) / factorial(n)


@dataclass(frozen=True)
class ModeResponse:
    """Field of a point source at ``source``: explicit modes plus an asymptotic tail.

    ``g`` has shape ``(components, M)`` on wave numbers ``k``; ``tail[j]`` is
    the coefficient of ``k**-(tail_start + j)`` in the large-``k`` expansion.
    """

    source: float
    circumference: float
    k: np.ndarray
    g: np.ndarray
    tail: np.ndarray
    tail_start: int

    @property
    def components(self) -> int:
        return self.g.shape[0]

    def derivative(self) -> "ModeResponse":
        return ModeResponse(self.source, self.circumference, self.k, 1j * self.k * self.g,
                            1j * self.tail, self.tail_start - 1)

    def scaled(self, c: complex) -> "ModeResponse":
        return ModeResponse(self.source, self.circumference, self.k, c * self.g, c * self.tail,
                            self.tail_start)

    def evaluate(self, x) -> np.ndarray:
        """Field values at ``x`` (must avoid the source point); shape ``(components, npts)``."""
        L = self.circumference
        y = np.mod(np.atleast_1d(np.asarray(x, dtype=float)) - self.source, L)
        # distance to the source on the circle
        if np.any(np.minimum(y, L - y) < 1e-14 * L):
            raise ValueError("cannot evaluate a layer field at its source point")
        phase = np.exp(1j * np.outer(y, self.k))
        out = self.g @ phase.T
        nonzero = self.k != 0
        kk = self.k[nonzero]
        for j, coeff in enumerate(self.tail):
            if not np.any(coeff):
                continue
            n = self.tail_start + j
            partial = phase[:, nonzero] @ (kk ** (-float(n)))
            out += np.outer(coeff, _periodic_power_sum(n, y, L) - partial)
        return out / L


@dataclass(frozen=True)
class FieldSum:
    """Finite linear combination of point-source fields."""

    terms: tuple[tuple[complex, ModeResponse], ...]

    def evaluate(self, x) -> np.ndarray:
        if not self.terms:
            raise ValueError("empty field")
        return sum(c * r.evaluate(x) for c, r in self.terms)

    def derivative(self) -> "FieldSum":
        return FieldSum(tuple((c, r.derivative()) for c, r in self.terms))

    def __add__(self, other: "FieldSum") -> "FieldSum":
        return FieldSum(self.terms + other.terms)

    def scaled(self, c: complex) -> "FieldSum":
        return FieldSum(tuple((c * w, r) for w, r in self.terms))


# --------------------------------------------------------------- resolvent


def _expansion_matrices(tau: float, V: np.ndarray, v0: float, order: int) -> list[np.ndarray]:
    """``C_n`` with ``M(k)^-1 ~ sum_n C_n k**-n`` for the per-mode block at (k, tau).

    Scaling ``M(k) = S N(1/k) S`` with ``S = diag(k, k, 1)`` turns the ADN-type
    block into a regular expansion ``N = N0 + e N1 + e^2 N2``.
    """
    def blk(k):
        return mode_block(np.array([k, tau]), V, v0)

    Q0 = blk(0.0)
    Q1 = (blk(1.0) - blk(-1.0)) / 2
    Q2 = (blk(1.0) + blk(-1.0)) / 2 - Q0
    v, p = slice(0, 2), slice(2, 3)
    N0 = np.zeros((3, 3), complex)
    N1 = np.zeros((3, 3), complex)
    N2 = np.zeros((3, 3), complex)
    N0[v, v], N0[v, p], N0[p, v], N0[p, p] = Q2[v, v], Q1[v, p], Q1[p, v], Q0[p, p]
    N1[v, v], N1[v, p], N1[p, v] = Q1[v, v], Q0[v, p], Q0[p, v]
    N2[v, v] = Q0[v, v]
    B0 = np.linalg.inv(N0)
    B = [B0]
    for n in range(1, order + 1):
        prev2 = B[n - 2] if n >= 2 else np.zeros((3, 3))
        B.append(-B0 @ (N1 @ B[n - 1] + N2 @ prev2))
    C = []
    for n in range(order + 1):
        Cn = np.zeros((3, 3), complex)
        if n >= 2:
            Cn[v, v] = B[n - 2][v, v]
        if n >= 1:
            Cn[v, p] = B[n - 1][v, p]
            Cn[p, v] = B[n - 1][p, v]
        Cn[p, p] = B[n][p, p]
        C.append(Cn)
    return C


class IndicialResolvent:
    """Inverse of the indicial operator at one axial frequency, applied to point sources.

    ``method="fast"`` needs constant potentials and solves one 3x3 block per
    mode on ``|m| <= n_band``; ``"generic"`` solves the dense Galerkin system
    on the potentials' grid.  The asymptotic tail is built from the
    potentials frozen at the source point (exact for constant potentials).
    """

    def __init__(self, tau: float, potentials: PotentialPair, method: str = "auto",
                 n_band: int = 2048, tail_order: int = 8, singular_tol: float = 1e-10):
        grid = potentials.grid
        if grid.dimension != 1:
            raise ValueError("layer potentials are implemented for 1-D cross-sections")
        if method == "auto":
            method = "fast" if potentials.is_constant else "generic"
        if method == "fast" and not potentials.is_constant:
            raise ValueError("the fast path needs constant potentials")
        if method not in ("fast", "generic"):
            raise ValueError(f"unknown method {method!r}")
        self.tau = float(tau)
        self.potentials = potentials
        self.method = method
        self.tail_order = tail_order
        self.circumference = grid.circumference
        if method == "fast":
            m = np.arange(-n_band, n_band + 1)
        else:
            m = grid.band_indices[:, 0]
        self.k = 2 * np.pi * m / self.circumference
        if method == "fast":
            xi = np.stack([self.k, np.full_like(self.k, self.tau)], axis=1)
            self._blocks = mode_block(xi, potentials.V[0][None], potentials.V0[0])
            s = np.linalg.svd(self._blocks, compute_uv=False)
            smin, smax = s.min(), s.max()
        else:
            from .cylinder import assemble_xi_hat
            self._dense = assemble_xi_hat(self.tau, grid, potentials).matrix
            s = np.linalg.svd(self._dense, compute_uv=False)
            smin, smax = s.min(), s.max()
        self.min_singular_value = float(smin)
        if smin < singular_tol * smax:
            raise SingularIndicialError(self.tau, float(smin))
        if method == "fast":
            self._inverse_blocks = np.linalg.inv(self._blocks)
        else:
            self._dense_inverse = np.linalg.inv(self._dense)
        self._expansions: dict[float, list[np.ndarray]] = {}

    def _expansion_at(self, a: float) -> list[np.ndarray]:
        key = 0.0 if self.method == "fast" else float(a)
        if key not in self._expansions:
            V, V0 = self.potentials.at(a) if self.method == "generic" else (self.potentials.V[:1], self.potentials.V0[:1])
            self._expansions[key] = _expansion_matrices(self.tau, V[0], float(V0[0].real), self.tail_order + 1)
        return self._expansions[key]

    def response(self, source: float, b0, b1=None) -> ModeResponse:
        """Field for the source ``(b0 + k b1) delta_source`` (3-vectors)."""
        b0 = np.asarray(b0, dtype=complex)
        b1 = np.zeros(3, complex) if b1 is None else np.asarray(b1, dtype=complex)
        k = self.k
        rhs = b0[None, :] + k[:, None] * b1[None, :]
        if self.method == "fast":
            g = np.einsum("mij,mj->im", self._inverse_blocks, rhs)
        else:
            L = self.circumference
            M = len(k)
            phase = np.exp(-1j * k * source) / np.sqrt(L)
            vec = (rhs * phase[:, None]).T.ravel()
            X = (self._dense_inverse @ vec).reshape(3, M)
            g = X * np.sqrt(L) * np.exp(1j * k * source)[None, :]
        C = self._expansion_at(source)
        tail = np.array([C[n] @ b0 + C[n + 1] @ b1 for n in range(self.tail_order + 1)])
        # The n-th tail term is a difference of O(k_1**-n) sums that leaves
        # O(kmax**(1-n)); drop it once that falls below the round-off it costs.
        kmax = float(np.max(np.abs(k)))
        k1 = 2 * np.pi / self.circumference
        n = np.arange(len(tail))
        tail[kmax * (k1 / kmax) ** n < 1e-15] = 0.0
        return ModeResponse(float(source), self.circumference, k, g, tail, 0)

    def apply_forward(self, response: ModeResponse) -> np.ndarray:
        """Indicial operator applied to the explicit modes of a response, returned per mode (M, 3)."""
        if self.method == "fast":
            return np.einsum("mij,jm->mi", self._blocks, response.g)
        L = self.circumference
        X = response.g * np.exp(-1j * self.k * response.source)[None, :] / np.sqrt(L)
        Y = (self._dense @ X.ravel()).reshape(3, -1)
        return (Y * np.sqrt(L) * np.exp(1j * self.k * response.source)[None, :]).T


def single_layer_source(h) -> tuple[np.ndarray, np.ndarray]:
    h = np.asarray(h, dtype=complex)
    return np.array([h[0], h[1], 0.0]), np.zeros(3, complex)


def double_layer_source(h, normal: float, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Adjoint boundary-traction map applied to ``h delta``: ``b0 + k b1``."""
    h = np.asarray(h, dtype=complex)
    b1 = normal * np.array([2j * h[0], 1j * h[1], 0.0])
    b0 = normal * np.array([1j * tau * h[1], 0.0, h[0]])
    return b0, b1


def green_response(tau: float, source: float, polarization, potentials: PotentialPair,
                   resolvent: IndicialResolvent | None = None, **kwargs) -> ModeResponse:
    """Response to a velocity point source ``polarization * delta_source`` (zero pressure source)."""
    res = resolvent or IndicialResolvent(tau, potentials, **kwargs)
    return res.response(source, *single_layer_source(polarization))


# ----------------------------------------------------------- one-sided traces


@dataclass(frozen=True)
class TraceValue:
    value: np.ndarray
    error: float
    flagged: bool
    eps: tuple[float, ...]


def _neville_at_zero(eps: np.ndarray, vals: np.ndarray) -> list[np.ndarray]:
    """Diagonal of the Neville table for extrapolation to ``eps = 0``."""
    n = len(eps)
    table = [v.copy() for v in vals]
    diag = [table[0]]
    for level in range(1, n):
        for i in range(n - level):
            j = i + level
            table[i] = (eps[j] * table[i] - eps[i] * table[i + 1]) / (eps[j] - eps[i])
        diag.append(table[0])
    return diag


def one_sided_trace(field, point: float, direction: int, max_wavenumber: float,
                    c: float = 0.25, levels: int = 4) -> TraceValue:
    """Limit of ``field(point + direction * eps)`` as ``eps -> 0+``.

    Evaluates at ``eps_j = c 2**-j / max_wavenumber`` and extrapolates with a
    Neville table.  The table is flagged when its corrections stop shrinking
    above round-off.
    """
    if direction not in (-1, 1):
        raise ValueError("direction must be +1 or -1")
    eps = c * 2.0 ** -np.arange(levels) / max_wavenumber
    evaluate = field.evaluate if hasattr(field, "evaluate") else field
    vals = np.asarray(evaluate(point + direction * eps))
    vals = np.moveaxis(vals.reshape(-1, levels), -1, 0)
    diag = _neville_at_zero(eps, vals)
    corrections = [float(np.max(np.abs(diag[i] - diag[i - 1]))) for i in range(1, len(diag))]
    scale = max(1.0, float(np.max(np.abs(diag[-1]))))
    flagged = any(b > a and b > 1e-9 * scale for a, b in zip(corrections, corrections[1:]))
    return TraceValue(diag[-1], corrections[-1], flagged, tuple(eps))


# ------------------------------------------------------- boundary operators


@dataclass(frozen=True)
class BoundaryOperatorFamily:
    tau: float
    S_hat: np.ndarray
    K_hat: np.ndarray
    K_hat_star: np.ndarray
    N_hat: np.ndarray | None
    double_layer_half_jump: np.ndarray
    conormal_half_jump: np.ndarray
    single_layer_jump: float
    pressure_jump: np.ndarray
    trace_error: float
    flagged_traces: int
    provenance: dict = field(default_factory=dict)

    def with_dtn(self, N_hat: np.ndarray) -> "BoundaryOperatorFamily":
        return BoundaryOperatorFamily(**{**self.__dict__, "N_hat": N_hat})

    @property
    def adjoint_defect(self) -> float:
        return float(np.max(np.abs(self.K_hat_star - self.K_hat.conj().T)))

    @property
    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.S_hat - self.S_hat.conj().T)))


def _conormal(values: np.ndarray, derivs: np.ndarray, normal: float, tau: float) -> np.ndarray:
    """``-2 D_nu u + p nu`` from ``(u_x, u_t, p)`` and their x-derivatives."""
    ux, ut, p = values
    dux, dut = derivs[0], derivs[1]
    return normal * np.array([-2 * dux + p, -(dut + 1j * tau * ux)])


class _LayerTraces:
    """One-sided traces of a point-source field at the arc ends."""

    def __init__(self, response: ModeResponse, tau: float, kmax: float, c: float):
        self.response = response
        self.derivative = response.derivative()
        self.tau = tau
        self.kmax = kmax
        self.c = c
        self.errors: list[float] = []
        self.flags = 0

    def _trace(self, fld, point, direction):
        tv = one_sided_trace(fld, point, direction, self.kmax, self.c)
        self.errors.append(tv.error)
        self.flags += int(tv.flagged)
        return tv.value

    def state(self, point: float, direction: int) -> np.ndarray:
        return self._trace(self.response, point, direction)

    def conormal(self, point: float, direction: int, normal: float) -> np.ndarray:
        vals = self._trace(self.response, point, direction)
        ders = self._trace(self.derivative, point, direction)
        return _conormal(vals, ders, normal, self.tau)


def _arc_points(arc: Arc):
    return list(zip(arc.points, arc.normals))


def boundary_operators(tau: float, arc: Arc, potentials: PotentialPair,
                       resolvent: IndicialResolvent | None = None, c: float = 0.25,
                       half_jump_tol: float = 1e-3, **kwargs) -> BoundaryOperatorFamily:
    """Single layer, double layer and conormal single layer traces on the arc ends.

    Rows and columns are ordered ``(alpha: x, t), (beta: x, t)``.
    """
    res = resolvent or IndicialResolvent(tau, potentials, **kwargs)
    kmax = float(np.max(np.abs(res.k)))
    ends = _arc_points(arc)
    n = 2 * len(ends)
    S = np.zeros((n, n), complex)
    S_jump = 0.0
    K = np.zeros((n, n), complex)
    K_half = np.zeros((n, n), complex)
    Ks = np.zeros((n, n), complex)
    Ks_half = np.zeros((n, n), complex)
    P_jump = np.zeros((len(ends), n), complex)
    errors, flags = [], 0
    for col in range(n):
        src, nu_src = ends[col // 2]
        h = np.zeros(2)
        h[col % 2] = 1.0
        single = _LayerTraces(res.response(src, *single_layer_source(h)), tau, kmax, c)
        double = _LayerTraces(res.response(src, *double_layer_source(h, nu_src, tau)), tau, kmax, c)
        for q, (pt, nu) in enumerate(ends):
            inward = -int(nu)
            rows = slice(2 * q, 2 * q + 2)
            s_plus, s_minus = single.state(pt, inward), single.state(pt, -inward)
            S[rows, col] = (s_plus[:2] + s_minus[:2]) / 2
            S_jump = max(S_jump, float(np.max(np.abs(s_plus[:2] - s_minus[:2]))))
            P_jump[q, col] = s_plus[2] - s_minus[2]
            d_plus, d_minus = double.state(pt, inward), double.state(pt, -inward)
            K[rows, col] = (d_plus[:2] + d_minus[:2]) / 2
            K_half[rows, col] = (d_plus[:2] - d_minus[:2]) / 2
            c_plus = single.conormal(pt, inward, nu)
            c_minus = single.conormal(pt, -inward, nu)
            Ks[rows, col] = (c_plus + c_minus) / 2
            Ks_half[rows, col] = (c_plus - c_minus) / 2
        errors += single.errors + double.errors
        flags += single.flags + double.flags
    deviation = float(np.max(np.abs(K_half - 0.5 * np.eye(n))))
    if deviation > half_jump_tol:
        raise RuntimeError(
            f"double-layer half jump deviates from 1/2 by {deviation:.3e} at tau={tau:g}; "
            "check the side convention or trace extraction"
        )
    return BoundaryOperatorFamily(
        tau=float(tau), S_hat=S, K_hat=K, K_hat_star=Ks, N_hat=None,
        double_layer_half_jump=K_half, conormal_half_jump=Ks_half, single_layer_jump=S_jump,
        pressure_jump=P_jump, trace_error=float(max(errors)), flagged_traces=flags,
        provenance={"method": res.method, "modes": len(res.k), "eps_c": c, "levels": 4,
                    "tail_order": res.tail_order},
    )


def operator_identity_check(family: BoundaryOperatorFamily) -> float:
    """``|| (1/2 + K) S - S (1/2 + K*) ||``."""
    I = np.eye(len(family.S_hat))
    lhs = (0.5 * I + family.K_hat) @ family.S_hat
    rhs = family.S_hat @ (0.5 * I + family.K_hat_star)
    return float(np.linalg.norm(lhs - rhs, 2))


# ------------------------------------------------- interior collocation solves


def collocation_matrix(tau: float, cheb: ChebyshevInterval, potentials: PotentialPair) -> np.ndarray:
    """Mixed velocity-pressure collocation of the indicial system at the Chebyshev nodes."""
    D = cheb.diff_matrix
    D2 = D @ D
    n = cheb.n
    I = np.eye(n)
    V, V0 = potentials.at(cheb.nodes)
    t = float(tau)
    return np.block([
        [-2 * D2 + t * t * I + np.diag(V[:, 0, 0]), -1j * t * D + np.diag(V[:, 0, 1]), D],
        [-1j * t * D + np.diag(V[:, 1, 0]), -D2 + 2 * t * t * I + np.diag(V[:, 1, 1]), 1j * t * I],
        [-D, -1j * t * I, -np.diag(V0)],
    ]).astype(complex)


def collocation_solve(tau: float, arc: Arc, potentials: PotentialPair, dirichlet: np.ndarray,
                      n_nodes: int = 64, forcing: np.ndarray | None = None, max_condition: float | None = None):
    """Chebyshev collocation for the indicial system on the arc.

    ``dirichlet`` holds velocity values ``(alpha_x, alpha_t, beta_x, beta_t)``;
    several right-hand sides may be stacked as columns.  ``forcing`` (shape
    ``(3, n)`` or ``(3, n, cols)``) is the nodal right-hand side of the
    velocity and pressure rows.  Returns the interval, the nodal solution
    ``(3, n, cols)`` and the conormal traces ``(4, cols)`` with outward normals.
    """
    cheb = ChebyshevInterval(arc.alpha, arc.beta, n_nodes)
    n = n_nodes
    A = collocation_matrix(tau, cheb, potentials)
    data = np.asarray(dirichlet, dtype=complex)
    data = data.reshape(4, -1)
    cols = data.shape[1]
    rhs = np.zeros((3 * n, cols), complex)
    if forcing is not None:
        rhs[:] = np.asarray(forcing, dtype=complex).reshape(3 * n, -1)
    for comp in range(2):
        for end, node in ((0, 0), (1, n - 1)):
            row = comp * n + node
            A[row] = 0.0
            A[row, comp * n + node] = 1.0
            rhs[row] = data[2 * end + comp]
    if max_condition is not None:
        cond = np.linalg.cond(A)
        if not cond < max_condition:
            raise np.linalg.LinAlgError(
                f"collocation matrix condition number {cond:.3e} exceeds {max_condition:.1e} at tau={tau:g}"
            )
    sol = np.linalg.solve(A, rhs).reshape(3, n, -1)
    ux, ut, p = sol
    D = cheb.diff_matrix
    dux, dut = D @ ux, D @ ut
    tr = np.zeros((4, cols), complex)
    for end, node, nu in ((0, 0, -1.0), (1, n - 1, 1.0)):
        tr[2 * end:2 * end + 2] = _conormal(
            np.array([ux[node], ut[node], p[node]]), np.array([dux[node], dut[node]]), nu, tau
        )
    return cheb, sol, tr


def dtn_matrix(tau: float, arc: Arc, potentials: PotentialPair, family: BoundaryOperatorFamily | None = None,
               n_nodes: int = 64):
    """Dirichlet-to-Neumann matrix by interior collocation and the residual of ``S N = -1/2 + K``."""
    _, _, N = collocation_solve(tau, arc, potentials, np.eye(4), n_nodes)
    if family is None:
        return N, None
    residual = float(np.linalg.norm(family.S_hat @ N - (-0.5 * np.eye(4) + family.K_hat), 2))
    return N, residual


def conormal_double_layer_check(tau: float, arc: Arc, potentials: PotentialPair, h,
                                family: BoundaryOperatorFamily, N_hat: np.ndarray,
                                resolvent: IndicialResolvent | None = None, c: float = 0.25) -> dict:
    """Both one-sided conormal traces of the double layer of ``h`` against ``(1/2 + K*) N h``."""
    res = resolvent or IndicialResolvent(tau, potentials)
    kmax = float(np.max(np.abs(res.k)))
    h = np.asarray(h, dtype=complex).reshape(-1)
    ends = _arc_points(arc)
    terms = []
    for i, (pt, nu) in enumerate(ends):
        for comp in range(2):
            w = h[2 * i + comp]
            if w != 0:
                e = np.zeros(2)
                e[comp] = 1.0
                terms.append((w, res.response(pt, *double_layer_source(e, nu, tau))))
    plus = np.zeros(4, complex)
    minus = np.zeros(4, complex)
    if terms:
        fld = FieldSum(tuple(terms))
        der = fld.derivative()
        for q, (pt, nu) in enumerate(ends):
            inward = -int(nu)
            for side, out in ((inward, plus), (-inward, minus)):
                vals = one_sided_trace(fld, pt, side, kmax, c).value
                ders = one_sided_trace(der, pt, side, kmax, c).value
                out[2 * q:2 * q + 2] = _conormal(vals, ders, nu, tau)
    predicted = (0.5 * np.eye(4) + family.K_hat_star) @ N_hat @ h
    return {
        "plus": plus,
        "minus": minus,
        "predicted": predicted,
        "jump": float(np.max(np.abs(plus - minus))),
        "mismatch": float(max(np.max(np.abs(plus - predicted)), np.max(np.abs(minus - predicted)))),
    }


def _layer_fields(res: IndicialResolvent, arc: Arc, density, kind: str) -> FieldSum:
    terms = []
    for i, (pt, nu) in enumerate(_arc_points(arc)):
        for comp in range(2):
            w = density[2 * i + comp]
            if w == 0:
                continue
            e = np.zeros(2)
            e[comp] = 1.0
            src = single_layer_source(e) if kind == "single" else double_layer_source(e, nu, res.tau)
            terms.append((complex(w), res.response(pt, *src)))
    return FieldSum(tuple(terms))


def layer_potential(res: IndicialResolvent, arc: Arc, density, kind: str) -> FieldSum:
    """Single (``kind="single"``) or double layer with density ordered like the boundary operators."""
    if kind not in ("single", "double"):
        raise ValueError("kind must be 'single' or 'double'")
    return _layer_fields(res, arc, np.asarray(density, dtype=complex).ravel(), kind)


def pompeiu_check(tau: float, arc: Arc, potentials: PotentialPair, sources, interior_points=None,
                  exterior_points=None, resolvent: IndicialResolvent | None = None) -> dict:
    """Rebuild a field from its Cauchy data on the arc ends.

    ``sources`` is a list of ``(point, polarization)`` pairs outside the arc;
    their combined response ``U`` solves the homogeneous system on the arc.
    ``D(u) - S(conormal U)`` should reproduce ``U`` inside and vanish outside.
    """
    res = resolvent or IndicialResolvent(tau, potentials)
    L = arc.circumference
    for pt, _ in sources:
        if arc.contains(np.array([pt]))[0] or min(abs(pt - arc.alpha) % L, abs(pt - arc.beta) % L) < 1e-12:
            raise ValueError("sources must lie outside the closed arc")
    if interior_points is None:
        interior_points = arc.alpha + arc.length * np.linspace(0.1, 0.9, 9)
    if exterior_points is None:
        gap = L - arc.length
        ext = arc.beta + gap * np.linspace(0.1, 0.9, 9)
        src_pts = np.array([s for s, _ in sources])
        far = [x for x in ext if np.all(np.minimum(np.abs(x - src_pts) % L, L - np.abs(x - src_pts) % L) > 0.05 * gap)]
        exterior_points = np.array(far)
    if not sources:
        z = np.zeros(1)
        return {"interior_error": 0.0, "exterior_leakage": 0.0, "interior": z, "exterior": z}
    U = FieldSum(tuple((1.0, res.response(pt, *single_layer_source(e))) for pt, e in sources))
    dU = U.derivative()
    dirichlet = np.zeros(4, complex)
    neumann = np.zeros(4, complex)
    for q, (pt, nu) in enumerate(_arc_points(arc)):
        vals = U.evaluate(pt)[:, 0]
        ders = dU.evaluate(pt)[:, 0]
        dirichlet[2 * q:2 * q + 2] = vals[:2]
        neumann[2 * q:2 * q + 2] = _conormal(vals, ders, nu, tau)
    rebuilt = layer_potential(res, arc, dirichlet, "double").evaluate
    single = layer_potential(res, arc, neumann, "single").evaluate
    inside_true = U.evaluate(interior_points)
    inside = rebuilt(interior_points) - single(interior_points)
    outside = rebuilt(exterior_points) - single(exterior_points)
    return {
        "interior_error": float(np.linalg.norm(inside - inside_true) / np.linalg.norm(inside_true)),
        "exterior_leakage": float(np.max(np.abs(outside))) if outside.size else 0.0,
        "interior": inside,
        "exterior": outside,
    }


# ----------------------------------------------------------- invertibility


@dataclass(frozen=True)
class BoundaryScanRow:
    tau: float
    min_sv_single: float
    min_sv_double: float
    xi_singular: bool


def invertibility_scan_boundary(taus, potentials: PotentialPair, arc: Arc, threads: int = 1,
                                **kwargs) -> list[BoundaryScanRow]:
    """Minimum singular values of ``S(tau)`` and ``1/2 + K(tau)`` over a frequency grid."""
    if not (potentials.v_positive_somewhere() and potentials.v0_positive_somewhere()):
        warnings.warn("potentials do not satisfy V > 0 and V0 > 0; invertibility is not guaranteed",
                      stacklevel=2)

    def one(tau: float) -> BoundaryScanRow:
        try:
            fam = boundary_operators(tau, arc, potentials, **kwargs)
        except SingularIndicialError:
            return BoundaryScanRow(float(tau), 0.0, 0.0, True)
        s1 = np.linalg.svd(fam.S_hat, compute_uv=False).min()
        s2 = np.linalg.svd(0.5 * np.eye(4) + fam.K_hat, compute_uv=False).min()
        return BoundaryScanRow(float(tau), float(s1), float(s2), False)

    taus = [float(t) for t in taus]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, taus))
    return [one(t) for t in taus]
