"""Principal symbols of the generalized Stokes system and its boundary operators.

Covectors are real arrays of length ``n = d + 1``.  Matrices act on column
vectors; ``outer(a, b)`` is the map ``X -> (b . X) a``.  Two boundary sign
conventions exist and both are exposed by name:

* manifold convention (used everywhere downstream): the jump coefficient of
  an order -1 operator at a boundary point with outward unit normal ``nu``
  is its symbol evaluated at ``-nu``;
* half-space convention: the symbol evaluated at the inward coordinate
  direction ``e_n`` of a half-space.  On ``x_n > 0`` with ``e_n = -nu``
  the two agree; for the complementary side the orientation flips.

The ``+`` side of every boundary limit is the side the normal points away
from (the interior).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad_vec

__all__ = [
    "CotangentVector",
    "SymbolMatrix",
    "JumpData",
    "stokes_coefficients",
    "stokes_symbol",
    "stokes_symbol_inverse",
    "def_symbols",
    "jump_coefficient",
    "jump_coefficient_halfspace",
    "boundary_symbol_a0",
    "stokes_boundary_symbols",
    "velocity_single_layer_symbol",
    "pressure_single_layer_symbol",
    "double_layer_symbol",
    "double_layer_symbol_composed",
    "laplace_double_layer_symbol",
]


@dataclass(frozen=True)
class CotangentVector:
    """Full covector ``xi = xi' + t nu`` split against a unit normal."""

    xi_prime: np.ndarray
    xi_n: float
    nu: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return np.asarray(self.xi_prime, float) + self.xi_n * np.asarray(self.nu, float)

    @property
    def norm_sq(self) -> float:
        return float(np.dot(self.xi_prime, self.xi_prime) + self.xi_n**2)


@dataclass(frozen=True)
class SymbolMatrix:
    """Callable matrix-valued symbol ``eval(x, xi)`` with its order and parity flags."""

    order: float
    eval: Callable[[object, np.ndarray], np.ndarray]
    odd: bool = False
    homogeneous: bool = True
    name: str = ""

    def __call__(self, xi: np.ndarray, x=None) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.eval(x, np.asarray(xi, dtype=float)), dtype=complex))

    def adjoint(self) -> "SymbolMatrix":
        base = self.eval
        return SymbolMatrix(
            self.order,
            lambda x, xi: np.conj(np.atleast_2d(base(x, xi))).T,
            self.odd,
            self.homogeneous,
            self.name + "*",
        )


@dataclass(frozen=True)
class JumpData:
    jc: np.ndarray
    a0: np.ndarray
    quadrature_error: float = 0.0

    @property
    def a0_plus(self) -> np.ndarray:
        return 0.5j * self.jc + self.a0

    @property
    def a0_minus(self) -> np.ndarray:
        return -0.5j * self.jc + self.a0


def stokes_coefficients(v0: float) -> tuple[float, float]:
    """Return ``(f, g) = ((V0 + 1)/(2 V0 + 1), 1/(2 V0 + 1))``."""
    if v0 < 0:
        raise ValueError("V0 must be nonnegative")
    return (v0 + 1) / (2 * v0 + 1), 1 / (2 * v0 + 1)


def _check_xi(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float).ravel()
    if not np.any(xi):
        raise ValueError("the zero covector has no principal symbol")
    return xi


def stokes_symbol(xi, v0: float) -> np.ndarray:
    """Weighted principal symbol ``[[|xi|^2 + xi xi^T, i xi], [-i xi^T, -V0]]``."""
    xi = _check_xi(xi)
    if v0 < 0:
        raise ValueError("V0 must be nonnegative")
    n = len(xi)
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[:n, :n] = np.dot(xi, xi) * np.eye(n) + np.outer(xi, xi)
    out[:n, n] = 1j * xi
    out[n, :n] = -1j * xi
    out[n, n] = -v0
    return out


def stokes_symbol_inverse(xi, v0: float) -> np.ndarray:
    xi = _check_xi(xi)
    f, g = stokes_coefficients(v0)
    n = len(xi)
    r2 = float(np.dot(xi, xi))
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[:n, :n] = np.eye(n) / r2 - f * np.outer(xi, xi) / r2**2
    out[:n, n] = 1j * g * xi / r2
    out[n, :n] = -1j * g * xi / r2
    out[n, n] = -2 * g
    return out


def def_symbols(xi, nu=None) -> dict[str, np.ndarray]:
    """First-order symbols of the deformation, gradient and normal-contraction operators.

    Tensors are flattened row-major (``T[i, j] -> i*n + j``).  Keys:
    ``def``, ``def_star``, ``grad``, ``grad_star``, ``def_star_def`` and, when
    ``nu`` is given, ``d_nu``, ``d_nu_star`` and ``normal_def_star``
    (the normal symbol ``-i sigma(Def*; nu)``).
    """
    xi = np.asarray(xi, dtype=float).ravel()
    n = len(xi)
    sym_def = np.zeros((n * n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            row = i * n + j
            sym_def[row, j] += 0.5j * xi[i]
            sym_def[row, i] += 0.5j * xi[j]
    out = {
        "def": sym_def,
        "def_star": sym_def.conj().T,
        "grad": (1j * xi)[:, None],
        "grad_star": (-1j * xi)[None, :],
    }
    out["def_star_def"] = out["def_star"] @ out["def"]
    if nu is not None:
        nu = np.asarray(nu, dtype=float).ravel()
        d_nu = 0.5j * (np.dot(xi, nu) * np.eye(n) + np.outer(xi, nu))
        out["d_nu"] = d_nu
        out["d_nu_star"] = d_nu.conj().T
        nu_def = def_symbols(nu)["def_star"]
        out["normal_def_star"] = -1j * nu_def
    return out


def jump_coefficient(a: SymbolMatrix, nu, x=None, parity_samples: int = 8, seed: int = 0) -> np.ndarray:
    """Manifold convention: ``sigma_{-1}(a; -nu)`` for an odd order -1 symbol."""
    _require_odd(a, len(np.ravel(nu)), parity_samples, seed)
    return a(-np.asarray(nu, dtype=float), x)


def jump_coefficient_halfspace(a: SymbolMatrix, e_n, x=None, parity_samples: int = 8, seed: int = 0) -> np.ndarray:
    """Half-space convention: ``sigma_{-1}(a; e_n)`` with ``e_n`` the inward coordinate direction."""
    _require_odd(a, len(np.ravel(e_n)), parity_samples, seed)
    return a(np.asarray(e_n, dtype=float), x)


def _require_odd(a: SymbolMatrix, n: int, samples: int, seed: int) -> None:
    if a.order != -1:
        raise ValueError("jump coefficients are defined for order -1 symbols")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        xi = rng.normal(size=n)
        va, vb = a(xi), a(-xi)
        worst = max(worst, float(np.max(np.abs(va + vb)) / max(1e-300, np.max(np.abs(va)))))
    if worst > 1e-10 or not a.odd:
        raise ValueError(f"principal part is not odd (parity defect {worst:.2e}); refusing")


def boundary_symbol_a0(
    a: SymbolMatrix,
    xi_prime,
    nu,
    x=None,
    tol: float = 1e-13,
    tail_start: float | None = None,
) -> JumpData:
    """Boundary symbol of a restricted operator by quadrature along the normal line.

    Order -1 (odd): ``a0 = (1/4 pi) int [a(xi' + t nu) + a(xi' - t nu)] dt``, and
    the jump coefficient is reported in the manifold convention.
    Order < -1: ``a0 = (1/2 pi) int a(xi' + t nu) dt`` with zero jump.

    The core ``|t| <= T`` is integrated adaptively (Gauss-Kronrod); for
    ``|t| > T`` the substitution ``s = 1/t`` and homogeneity turn the tail into
    a smooth integral over ``[0, 1/T]``.
    """
    xi_prime = np.asarray(xi_prime, dtype=float).ravel()
    nu = np.asarray(nu, dtype=float).ravel()
    if not np.any(xi_prime):
        raise ValueError("xi' must be nonzero")
    if abs(np.dot(xi_prime, nu)) > 1e-12 * np.linalg.norm(xi_prime):
        raise ValueError("xi' must be orthogonal to nu")
    if not a.homogeneous:
        raise ValueError("tail handling assumes a homogeneous symbol")
    m = a.order
    big_t = tail_start if tail_start is not None else 50.0 * max(1.0, float(np.linalg.norm(xi_prime)))
    shape = a(xi_prime + nu, x).shape

    def pack(mat: np.ndarray) -> np.ndarray:
        return np.concatenate([mat.real.ravel(), mat.imag.ravel()])

    def unpack(vec: np.ndarray) -> np.ndarray:
        half = len(vec) // 2
        return (vec[:half] + 1j * vec[half:]).reshape(shape)

    if m == -1:
        jc = jump_coefficient(a, nu, x)

        def core(t):
            return pack(a(xi_prime + t * nu, x) + a(xi_prime - t * nu, x))

        def tail(s):
            # t = 1/s: a(xi' +- nu/s) = s * a(s xi' +- nu); dt = ds / s^2
            return pack((a(s * xi_prime + nu, x) + a(s * xi_prime - nu, x)) / s)

        prefactor = 1.0 / (2 * np.pi)  # (1/4 pi) * 2 for the half line
    elif m < -1:
        jc = np.zeros(shape, dtype=complex)

        def core(t):
            return pack(a(xi_prime + t * nu, x) + a(xi_prime - t * nu, x))

        def tail(s):
            return pack((a(s * xi_prime + nu, x) + a(s * xi_prime - nu, x)) * s ** (-m - 2))

        prefactor = 1.0 / (2 * np.pi)
    else:
        raise ValueError("boundary restriction needs order <= -1")

    core_val, core_err = quad_vec(core, 0.0, big_t, epsabs=tol, epsrel=tol, limit=400)
    tail_val, tail_err = quad_vec(tail, 0.0, 1.0 / big_t, epsabs=tol, epsrel=tol, limit=400)
    a0 = prefactor * unpack(core_val + tail_val)
    return JumpData(jc=jc, a0=a0, quadrature_error=float(prefactor * (core_err + tail_err)))


# ----------------------------------------------------- closed-form Stokes symbols


def velocity_single_layer_symbol(v0: float) -> SymbolMatrix:
    """Order -2 velocity block of the inverse symbol: ``I/|xi|^2 - f xi xi^T/|xi|^4``."""
    f, _ = stokes_coefficients(v0)

    def ev(x, xi):
        r2 = float(np.dot(xi, xi))
        return np.eye(len(xi)) / r2 - f * np.outer(xi, xi) / r2**2

    return SymbolMatrix(-2, ev, odd=False, name="A")


def pressure_single_layer_symbol(v0: float) -> SymbolMatrix:
    """Order -1 pressure-from-velocity-source row: ``-i g xi^T / |xi|^2``."""
    _, g = stokes_coefficients(v0)
    return SymbolMatrix(-1, lambda x, xi: (-1j * g * xi / np.dot(xi, xi))[None, :], odd=True, name="C")


def double_layer_symbol(v0: float, nu) -> SymbolMatrix:
    """Velocity double-layer symbol from its closed form."""
    f, g = stokes_coefficients(v0)
    nu = np.asarray(nu, dtype=float).ravel()

    def ev(x, xi):
        r2 = float(np.dot(xi, xi))
        xn = float(np.dot(xi, nu))
        mat = (
            xn * np.eye(len(xi))
            + np.outer(nu, xi)
            - 2 * f * xn / r2 * np.outer(xi, xi)
            + g * np.outer(xi, nu)
        )
        return 1j / r2 * mat

    return SymbolMatrix(-1, ev, odd=True, name="P")


def double_layer_symbol_composed(v0: float, nu) -> SymbolMatrix:
    """Same symbol assembled as ``-2 A . sigma(D_nu*) + B nu^T`` from the inverse blocks."""
    nu = np.asarray(nu, dtype=float).ravel()

    def ev(x, xi):
        n = len(xi)
        inv = stokes_symbol_inverse(xi, v0)
        a_block = inv[:n, :n]
        b_col = inv[:n, n:]
        d_nu_star = def_symbols(xi, nu)["d_nu_star"]
        return -2 * a_block @ d_nu_star + b_col @ nu[None, :]

    return SymbolMatrix(-1, ev, odd=True, name="P_composed")


def laplace_double_layer_symbol(e_n) -> SymbolMatrix:
    """Scalar ``-i xi_n / |xi|^2`` with ``xi_n`` the component along ``e_n``."""
    e_n = np.asarray(e_n, dtype=float).ravel()
    return SymbolMatrix(-1, lambda x, xi: np.array([[-1j * np.dot(xi, e_n) / np.dot(xi, xi)]]), odd=True)


def stokes_boundary_symbols(v0: float, xi_prime, nu) -> dict[str, np.ndarray]:
    """Closed-form boundary symbols at a tangential covector ``xi'``."""
    xi_prime = np.asarray(xi_prime, dtype=float).ravel()
    nu = np.asarray(nu, dtype=float).ravel()
    f, g = stokes_coefficients(v0)
    r = float(np.linalg.norm(xi_prime))
    if r == 0:
        raise ValueError("xi' must be nonzero")
    eta = xi_prime / r
    n = len(nu)
    single = (2 * np.eye(n) - f * np.outer(nu, nu) - f * np.outer(eta, eta)) / (4 * r)
    pressure_c0 = (-1j * g / (2 * r) * xi_prime)[None, :]
    k0 = 1j * v0 / (2 * (2 * v0 + 1) * r) * (np.outer(nu, xi_prime) - np.outer(xi_prime, nu))
    return {
        "single_layer_velocity": single,
        "single_layer_pressure": pressure_c0,
        "pressure_jump_plus": (-g / 2 * nu)[None, :],
        "pressure_jump_minus": (g / 2 * nu)[None, :],
        "double_layer_K": k0,
        "double_layer_jc": -1j * np.eye(n),
        "pressure_jc": (1j * g * nu)[None, :],
        "conormal_single_layer_jc": 1j * np.eye(n),
    }
