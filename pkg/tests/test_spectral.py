import numpy as np
import pytest

from cylstokes.spectral import (
    Arc,
    ScalarField,
    StateField,
    arc_plateau,
    cutoff_bump,
    delta_mode_coefficients,
    gregory_arc_weights,
    inner_product,
    make_grid,
    smooth_step,
    spectral_arc_weights,
    spectral_derivative,
    trig_interpolate,
)


def test_grid_rejects_odd_sizes_and_bad_dimension():
    with pytest.raises(ValueError):
        make_grid(33)
    with pytest.raises(ValueError):
        make_grid(32, d=3)


def test_band_excludes_nyquist():
    g = make_grid(16)
    assert g.n_modes == 15
    assert g.band_indices.min() == -7 and g.band_indices.max() == 7
    assert make_grid(16, d=2).n_modes == 15**2


def test_modes_round_trip_and_orthonormality():
    g = make_grid(32)
    rng = np.random.default_rng(1)
    c = rng.normal(size=g.n_modes) + 1j * rng.normal(size=g.n_modes)
    assert np.allclose(g.to_modes(g.from_modes(c)), c, atol=1e-13)
    gram = g.synthesis.conj().T @ g.synthesis * g.weight
    assert np.allclose(gram, np.eye(g.n_modes), atol=1e-13)


def test_trig_interpolation_is_exact_on_the_band():
    g = make_grid(32)
    f = lambda x: np.cos(3 * x) + 0.5 * np.sin(7 * x)
    pts = np.linspace(0.1, 6.0, 13)
    assert np.allclose(trig_interpolate(f(g.nodes), g.circumference, pts), f(pts), atol=1e-13)


def test_spectral_derivative():
    g = make_grid(32)
    f = ScalarField(g, np.sin(4 * g.nodes))
    assert np.allclose(spectral_derivative(f).values, 4 * np.cos(4 * g.nodes), atol=1e-12)


def test_arc_weights_exact_for_band_limited_functions():
    n, L = 32, 2 * np.pi
    w = spectral_arc_weights(n, L, 0.3, 2.1)
    x = np.arange(n) * L / n
    assert abs(np.sum(w * np.cos(5 * x)) - (np.sin(5 * 2.1) - np.sin(5 * 0.3)) / 5) < 1e-13


def test_gregory_weights_fourth_order():
    errs = []
    for n in (64, 128):
        h = 2 * np.pi / n
        a, b = 4 * h, 4 * h + n // 2 * h
        w = gregory_arc_weights(n, 2 * np.pi, a, b)
        x = np.arange(n) * h
        errs.append(abs(np.sum(w * np.exp(x)) - (np.exp(b) - np.exp(a))))
    assert errs[0] / errs[1] > 12


def test_inner_product_on_arc_matches_closed_form():
    g = make_grid(32)
    f = ScalarField(g, np.exp(1j * g.nodes))
    h = ScalarField(g, np.exp(2j * g.nodes))
    arc = Arc(0.5, 2.0)
    exact = (np.exp(-1j * 2.0) - np.exp(-1j * 0.5)) / (-1j)
    assert abs(inner_product(f, h, arc) - exact) < 1e-12


def test_delta_pairing_returns_point_value():
    g = make_grid(32)
    k, c = delta_mode_coefficients(g, 1.234)
    phi = lambda x: np.cos(2 * x) + 0.3 * np.sin(5 * x)
    phi_hat = np.array([np.sum(phi(g.nodes) * np.exp(-1j * kk * g.nodes)) * g.weight for kk in k[:, 0]])
    assert abs(np.sum(np.conj(c) * phi_hat) - phi(1.234)) < 1e-12


def test_smooth_step_and_bump():
    s = np.linspace(-0.5, 1.5, 201)
    v = smooth_step(s)
    assert np.all(v[s <= 0] == 1) and np.all(v[s >= 1] == 0)
    assert np.all(np.diff(v) <= 1e-15)
    assert abs(smooth_step(np.array([0.5]))[0] - 0.5) < 1e-12
    assert np.all(cutoff_bump(np.array([0.0, 0.4]), 1.0) == 1.0)


def test_arc_geometry_and_plateau():
    arc = Arc(1.0, 2.5)
    assert arc.length == pytest.approx(1.5)
    assert arc.normals == (-1.0, 1.0)
    x = np.array([1.5, 2.6, 3.5, 0.5])
    p = arc_plateau(x, arc, 0.5)
    assert p[0] == 1.0 and 0 < p[1] < 1 and p[2] == 0.0 and p[3] == 0.0
    with pytest.raises(ValueError):
        Arc(2.0, 1.0)


def test_state_field_stacking():
    g = make_grid(8)
    vals = np.arange(24, dtype=float).reshape(3, 8)
    s = StateField.from_stacked(g, vals)
    assert np.array_equal(s.stacked(), vals)
