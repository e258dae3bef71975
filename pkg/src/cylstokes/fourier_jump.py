"""One-dimensional Fourier experiments on one-sided limits of inverse transforms.

Conventions: ``F f(x) = int exp(-i x t) f(t) dt`` and
``F^{-1} u(t) = (1/2 pi) int exp(i x t) u(x) dx``.  A symbol ``u`` with
``x u(x) -> L`` at both ends has an inverse transform that jumps by ``i L``
at the origin; the average of the two one-sided values is the symmetrised
integral ``(1/2 pi) int (u(x) + u(-x))/2 dx``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import sici

from .spectral import cutoff_bump

__all__ = [
    "JumpReport",
    "pv_inverse_ft",
    "jump_functional",
    "inverse_ft_samples",
    "odd_parity_defect",
    "residue_integrals",
]


@dataclass(frozen=True)
class JumpReport:
    left_limit: complex
    right_limit: complex
    jump: complex
    average: complex
    grid_size: int
    extrapolation_error_estimate: float
    predicted_jump: complex | None = None
    predicted_average: complex | None = None

    @classmethod
    def from_limits(cls, left, right, grid_size, error, **extra) -> "JumpReport":
        return cls(
            left_limit=complex(left),
            right_limit=complex(right),
            jump=complex(right - left),
            average=complex((right + left) / 2),
            grid_size=int(grid_size),
            extrapolation_error_estimate=float(error),
            **extra,
        )


def _window(n_samples: int, half_width: float) -> tuple[np.ndarray, float]:
    if n_samples < 2**12 or n_samples % 2:
        raise ValueError("n_samples must be even and at least 2**12")
    h = 2 * half_width / n_samples
    return -half_width + h * np.arange(n_samples), h


def inverse_ft_samples(values: np.ndarray, half_width: float, end_values=(None, None)):
    """Trapezoid-rule inverse transform of window samples on the reciprocal grid.

    ``values[j]`` samples ``u`` at ``-W + j h``.  ``end_values`` gives ``u(-W)`` and
    ``u(+W)`` so both window ends get half weight.  Returns ``(t, F^{-1}u(t))``
    with ``t`` in FFT order and spacing ``pi / W``.
    """
    n = len(values)
    h = 2 * half_width / n
    dt = np.pi / half_width
    t = dt * np.fft.fftfreq(n, d=1.0 / n)
    left = values[0] if end_values[0] is None else end_values[0]
    right = values[0] if end_values[1] is None else end_values[1]
    inner = np.array(values, dtype=complex)
    inner[0] = 0.0
    total = n * np.fft.ifft(inner) * np.exp(-1j * half_width * t)
    total += 0.5 * (left * np.exp(-1j * half_width * t) + right * np.exp(1j * half_width * t))
    return t, total * h / (2 * np.pi)


def _odd_tail(t: np.ndarray, width: float) -> np.ndarray:
    """``(1/2 pi) int_{|x|>W} exp(i x t) / x dx``."""
    si, _ = sici(width * np.abs(t))
    return 1j / np.pi * np.sign(t) * (np.pi / 2 - si)


def _even_tail(t: np.ndarray, width: float) -> np.ndarray:
    """``(1/2 pi) int_{|x|>W} exp(i x t) / x**2 dx``."""
    a = width * np.abs(t)
    out = np.full(t.shape, 1.0 / (np.pi * width))
    nz = a > 0
    si, _ = sici(a[nz])
    out[nz] = np.abs(t[nz]) / np.pi * (np.cos(a[nz]) / a[nz] - (np.pi / 2 - si))
    return out


def _tail_fit(x: np.ndarray, y: np.ndarray, max_points: int = 4096) -> complex:
    """Constant term of a least-squares fit ``y ~ c0 + c1/x + c2/x**2`` on tail samples."""
    step = max(1, len(x) // max_points)
    xs, ys = x[::step], y[::step]
    basis = np.stack([np.ones_like(xs), 1 / xs, 1 / xs**2], axis=1)
    coef, *_ = np.linalg.lstsq(basis.astype(complex), ys, rcond=None)
    return complex(coef[0])


def _richardson_one_sided(t: np.ndarray, values: np.ndarray, side: int) -> tuple[complex, float]:
    """Three-level Richardson limit at 0 from nodes side*{h, 2h, 4h}."""
    dt = abs(t[1] - t[0])
    picks = []
    for mult in (1, 2, 4):
        idx = int(np.argmin(np.abs(t - side * mult * dt)))
        picks.append(values[idx])
    f1, f2, f4 = picks
    r1_fine = 2 * f1 - f2
    r1_coarse = 2 * f2 - f4
    r2 = (4 * r1_fine - r1_coarse) / 3
    return r2, float(abs(r2 - r1_fine))


def pv_inverse_ft(
    cutoff_radius: float = 1.0, n_samples: int = 2**20, half_width: float = 2.0**10
) -> JumpReport:
    """One-sided values at 0 of the inverse transform of ``(1 - chi0(x)) / x``."""
    x, _ = _window(n_samples, half_width)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(x == 0, 0.0, (1.0 - cutoff_bump(x, cutoff_radius)) / x)
    t, w = inverse_ft_samples(z, half_width, (-1.0 / half_width, 1.0 / half_width))
    w = w + _odd_tail(t, half_width)
    right, err_r = _richardson_one_sided(t, w, +1)
    left, err_l = _richardson_one_sided(t, w, -1)
    error = max(err_r, err_l)
    if error > 1e-2:
        raise RuntimeError(f"extrapolation error estimate {error:.3e} exceeds 1e-2")
    return JumpReport.from_limits(left, right, n_samples, error, predicted_jump=1j)


def jump_functional(
    u,
    L_hint: complex | None = None,
    n_samples: int = 2**20,
    half_width: float = 2.0**10,
    tail_fraction: float = 0.25,
) -> JumpReport:
    """Measure the jump of ``F^{-1} u`` at 0 by two routes and cross-check them.

    ``u`` is a vectorised callable on the real line.  The tail limit
    ``L = lim x u(x)`` is estimated from the outer part of the window (or
    checked against ``L_hint``).  The direct route inverse-transforms the
    samples with the ``L/x`` and ``c/x**2`` tails added analytically, then
    extrapolates to 0 from both sides; the formula route uses ``+-iL/2`` plus
    the symmetrised integral.
    """
    x, h = _window(n_samples, half_width)
    ux = np.asarray(u(x), dtype=complex)
    u_right_end = complex(np.asarray(u(np.array([half_width])), dtype=complex)[0])
    outer = np.abs(x) >= half_width * (1 - tail_fraction)
    pos, neg = outer & (x > 0), outer & (x < 0)
    l_pos = _tail_fit(x[pos], x[pos] * ux[pos])
    l_neg = _tail_fit(x[neg], x[neg] * ux[neg])
    scale = max(1.0, abs(l_pos), abs(l_neg))
    if abs(l_pos - l_neg) > 1e-2 * scale:
        raise ValueError(
            f"tail limits differ at +inf ({l_pos:.6g}) and -inf ({l_neg:.6g}); "
            "the principal part is not odd"
        )
    L = (l_pos + l_neg) / 2
    if L_hint is not None:
        if abs(L - L_hint) > 1e-2 * max(1.0, abs(L_hint)):
            raise ValueError(f"measured tail limit {L:.6g} disagrees with hint {L_hint}")
        L = complex(L_hint)

    # even part and its c/x^2 tail coefficient
    u_mirror = np.asarray(u(-x), dtype=complex)
    even = (ux + u_mirror) / 2
    c_even = _tail_fit(np.abs(x[outer]), (x[outer] ** 2) * even[outer])

    # even(-W) = even(W), so the single -W node carries both trapezoid half weights
    trap = np.sum(even) * h
    average_formula = (trap + 2 * c_even / half_width) / (2 * np.pi)

    t, direct = inverse_ft_samples(ux, half_width, (ux[0], u_right_end))
    direct = direct + L * _odd_tail(t, half_width) + c_even * _even_tail(t, half_width)
    right, err_r = _richardson_one_sided(t, direct, +1)
    left, err_l = _richardson_one_sided(t, direct, -1)

    remainder_edge = np.abs(ux[[0, -1]] - L / x[[0, -1]] - c_even / x[[0, -1]] ** 2)
    tail_bound = float(np.max(remainder_edge) * half_width / (2 * np.pi))
    error = max(err_r, err_l) + tail_bound + 1e-12
    return JumpReport.from_limits(
        left,
        right,
        n_samples,
        error,
        predicted_jump=1j * L,
        predicted_average=complex(average_formula),
    )


def odd_parity_defect(func, n_samples: int = 2**14, half_width: float = 64.0) -> float:
    """Relative defect ``max|F(t) + F(-t)| / max|F|`` for samples of an odd function."""
    x, _ = _window(n_samples, half_width)
    vals = np.asarray(func(x), dtype=complex)
    vals[0] = 0.0  # the -W node stands for both window ends; odd => mean zero
    spec = np.fft.fft(vals)
    # symmetric index j <-> n - j realises x <-> -x on the periodic window
    mirrored = np.roll(spec[::-1], 1)
    return float(np.max(np.abs(spec + mirrored)) / np.max(np.abs(spec)))


def residue_integrals(a: float) -> dict[str, tuple[float, float]]:
    """Quadrature vs closed form for three rational integrals over the real line."""
    if a <= 0:
        raise ValueError("a must be positive")
    cases = {
        "x2_over_sq": (lambda x: x * x / (a * a + x * x) ** 2, np.pi / (2 * a)),
        "one_over_sq": (lambda x: 1.0 / (a * a + x * x) ** 2, np.pi / (2 * a**3)),
        "one_over_lin": (lambda x: 1.0 / (a * a + x * x), np.pi / a),
    }
    out = {}
    for name, (f, exact) in cases.items():
        val, _ = quad(f, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13, limit=200)
        out[name] = (val, exact)
    return out
