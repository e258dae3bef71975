"""Independent reference values and brute-force routines for the test suite."""
from fractions import Fraction

import numpy as np

BERNOULLI = [Fraction(1), Fraction(-1, 2), Fraction(1, 6), Fraction(0), Fraction(-1, 30), Fraction(0),
             Fraction(1, 42), Fraction(0), Fraction(-1, 30), Fraction(0), Fraction(5, 66)]

# closed forms of the three rational integrals over the real line
RESIDUE_VALUES = {
    "x2_over_sq": lambda a: np.pi / (2 * a),
    "one_over_sq": lambda a: np.pi / (2 * a**3),
    "one_over_lin": lambda a: np.pi / a,
}

PV_LIMITS = {"plus": 0.5j, "minus": -0.5j}
LAPLACE_DOUBLE_LAYER_LIMITS = (0.5, -0.5)
TORUS_KERNEL_DIMS = {(0.0, 0.0): 3, (0.0, 1.0): 2, (1.0, 0.0): 1, (1.0, 1.0): 0}
CIRCLE_KERNEL_DIM_AT_ZERO = 3


def inverse_power_sum_2pi(n: int, y):
    """``sum_{m != 0} exp(i m y) / m**n`` on ``0 < y < 2 pi`` for n = 1, 2."""
    y = np.asarray(y, dtype=float)
    if n == 1:
        return 1j * (np.pi - y)
    if n == 2:
        return np.pi**2 / 3 - np.pi * y + y**2 / 2
    raise ValueError("only n = 1, 2 are tabulated")


def stokes_block(xi, v0):
    xi = np.asarray(xi, dtype=float)
    n = len(xi)
    out = np.zeros((n + 1, n + 1), complex)
    out[:n, :n] = np.dot(xi, xi) * np.eye(n) + np.outer(xi, xi)
    out[:n, n] = 1j * xi
    out[n, :n] = -1j * xi
    out[n, n] = -v0
    return out


def brute_force_response(tau, v, v0, source, b0, b1, x, n_modes, L=2 * np.pi, chunk=200_000):
    """Plain truncated mode sum ``(1/L) sum_m M(k)^-1 (b0 + k b1) exp(i k (x - a))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros((3, len(x)), complex)
    b0 = np.asarray(b0, complex)
    b1 = np.asarray(b1, complex)
    for start in range(-n_modes, n_modes + 1, chunk):
        m = np.arange(start, min(start + chunk, n_modes + 1))
        k = 2 * np.pi * m / L
        blocks = np.zeros((len(m), 3, 3), complex)
        r2 = k * k + tau * tau
        xi = np.stack([k, np.full_like(k, tau)], axis=1)
        blocks[:, :2, :2] = r2[:, None, None] * np.eye(2) + xi[:, :, None] * xi[:, None, :] + v * np.eye(2)
        blocks[:, :2, 2] = 1j * xi
        blocks[:, 2, :2] = -1j * xi
        blocks[:, 2, 2] = -v0
        rhs = b0[None, :] + k[:, None] * b1[None, :]
        g = np.linalg.solve(blocks, rhs[..., None])[..., 0]
        out += (g.T @ np.exp(1j * np.outer(k, x - source))) / L
    return out
