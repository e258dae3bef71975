"""Verification suites shared by the command line and the acceptance tests.

Every suite returns a list of :class:`CheckRow`.  A row passes when
``|measured - expected| <= tolerance`` unless it is marked structural, in
which case the suite decides and records the criterion in ``detail``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cylinder import (
    PotentialPair,
    assemble_xi_closed_torus,
    assemble_xi_hat,
    green_identity_check,
    invertibility_scan,
    kernel_report,
)
from .fourier_jump import jump_functional, pv_inverse_ft, residue_integrals
from .layers import (
    IndicialResolvent,
    boundary_operators,
    conormal_double_layer_check,
    dtn_matrix,
    invertibility_scan_boundary,
    operator_identity_check,
    pompeiu_check,
)
from .spectral import Arc, StateField, make_grid
from .symbols import (
    boundary_symbol_a0,
    double_layer_symbol,
    double_layer_symbol_composed,
    laplace_double_layer_symbol,
    pressure_single_layer_symbol,
    stokes_boundary_symbols,
    stokes_coefficients,
    stokes_symbol,
    stokes_symbol_inverse,
    velocity_single_layer_symbol,
)

__all__ = [
    "CheckRow",
    "fourier_suite",
    "symbols_suite",
    "green_suite",
    "jumps_suite",
    "invertibility_suite",
    "boundary_invertibility_suite",
    "JUMP_TEST_SYMBOLS",
]


@dataclass(frozen=True)
class CheckRow:
    check: str
    anchor: str
    measured: float
    expected: float
    tolerance: float
    passed: bool
    detail: dict = field(default_factory=dict)

    @classmethod
    def numeric(cls, check, anchor, measured, expected, tolerance, **detail) -> "CheckRow":
        measured, expected = float(measured), float(expected)
        ok = bool(abs(measured - expected) <= tolerance)
        return cls(check, anchor, measured, expected, float(tolerance), ok, detail)

    @classmethod
    def structural(cls, check, anchor, measured, expected, passed, criterion: str, **detail) -> "CheckRow":
        return cls(check, anchor, float(measured), float(expected), 0.0, bool(passed),
                   {"criterion": criterion, **detail})

    def as_dict(self) -> dict:
        out = {"check": self.check, "anchor": self.anchor, "measured": self.measured,
               "expected": self.expected, "tolerance": self.tolerance, "pass": self.passed}
        out.update(self.detail)
        return out


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.12g}{z.imag:+.12g}j"


def _potentials(grid, spec) -> PotentialPair:
    """``spec`` is ``{"V": number | list, "V0": number | list}`` (lists are node samples)."""
    v, v0 = spec.get("V", 1.0), spec.get("V0", 1.0)
    if np.isscalar(v) and np.isscalar(v0):
        return PotentialPair.constant(grid, float(v), float(v0))
    nodes = grid.n_points
    vv = np.full(nodes, float(v)) if np.isscalar(v) else np.asarray(v, dtype=float)
    vv0 = np.full(nodes, float(v0)) if np.isscalar(v0) else np.asarray(v0, dtype=float)
    return PotentialPair.scalar(grid, vv, vv0)


# ------------------------------------------------------------------ Fourier

JUMP_TEST_SYMBOLS = {
    "x_over_1px2": (lambda x: x / (1 + x**2), 1.0),
    "affine_over_quadratic": (lambda x: (2 * x + 1) / (x**2 + 4), 2.0),
    "cubic_over_quartic": (lambda x: 3 * x**3 / (1 + x**2) ** 2, 3.0),
}


def fourier_suite(radii=(0.5, 1.0, 2.0), n_samples: int = 2**20, tol_residue: float = 1e-8,
                  tol_jump: float = 1e-3) -> list[CheckRow]:
    rows = []
    for a in radii:
        for name, (val, exact) in residue_integrals(a).items():
            rows.append(CheckRow.numeric(f"residue.{name}[a={a:g}]", "fourier.residue-integrals", val, exact,
                                         tol_residue, case=name, left="", right="", jump="",
                                         expected_jump="", error=abs(val - exact)))
    pv = pv_inverse_ft(n_samples=n_samples)
    for side, val, exp in (("plus", pv.right_limit, 0.5j), ("minus", pv.left_limit, -0.5j)):
        err = abs(val - exp)
        rows.append(CheckRow.numeric(f"pv_transform.{side}", "fourier.pv-one-sided-limits", err, 0.0, tol_jump,
                                     case=f"pv_{side}", left=_fmt_complex(pv.left_limit),
                                     right=_fmt_complex(pv.right_limit), jump=_fmt_complex(pv.jump),
                                     expected_jump=_fmt_complex(1j), error=err))
    for name, (u, L) in JUMP_TEST_SYMBOLS.items():
        rep = jump_functional(u, n_samples=n_samples)
        err = abs(rep.jump - 1j * L)
        rows.append(CheckRow.numeric(f"jump.{name}", "fourier.jump-functional", err, 0.0, tol_jump,
                                     case=name, left=_fmt_complex(rep.left_limit),
                                     right=_fmt_complex(rep.right_limit), jump=_fmt_complex(rep.jump),
                                     expected_jump=_fmt_complex(1j * L), error=err))
    return rows


# ------------------------------------------------------------------ symbols


def symbols_suite(v0s=(0.0, 1.0, 5.0), n_random: int = 100, seed: int = 0, tol: float = 1e-8,
                  tol_inverse: float = 1e-12) -> list[CheckRow]:
    rng = np.random.default_rng(seed)
    rows = []
    worst = 0.0
    for _ in range(n_random):
        n = int(rng.integers(2, 4))
        xi = rng.normal(size=n)
        v0 = float(rng.uniform(0, 10))
        prod = stokes_symbol(xi, v0) @ stokes_symbol_inverse(xi, v0)
        worst = max(worst, float(np.max(np.abs(prod - np.eye(n + 1)))))
    rows.append(CheckRow.numeric("principal_symbol.inverse", "symbols.adn-inverse", worst, 0.0, tol_inverse,
                                 samples=n_random))

    nu = np.array([1.0, 0.0])
    xp = np.array([0.0, 1.3])
    lap = boundary_symbol_a0(laplace_double_layer_symbol(-nu), xp, nu)
    rows.append(CheckRow.numeric("laplace_double_layer.a0", "symbols.laplace-double-layer",
                                 abs(lap.a0[0, 0]), 0.0, 1e-6))
    rows.append(CheckRow.numeric("laplace_double_layer.plus", "symbols.laplace-double-layer",
                                 lap.a0_plus[0, 0].real, 0.5, 1e-6))
    rows.append(CheckRow.numeric("laplace_double_layer.minus", "symbols.laplace-double-layer",
                                 lap.a0_minus[0, 0].real, -0.5, 1e-6))

    for v0 in v0s:
        cf = stokes_boundary_symbols(v0, xp, nu)
        K = boundary_symbol_a0(double_layer_symbol(v0, nu), xp, nu)
        A = boundary_symbol_a0(velocity_single_layer_symbol(v0), xp, nu)
        C = boundary_symbol_a0(pressure_single_layer_symbol(v0), xp, nu)
        tag = f"[V0={v0:g}]"

        def add(name, anchor, got, want):
            rows.append(CheckRow.numeric(name + tag, anchor, float(np.max(np.abs(got - want))), 0.0, tol))

        add("double_layer.boundary_symbol", "symbols.double-layer-K", K.a0, cf["double_layer_K"])
        add("double_layer.jump_coefficient", "symbols.double-layer-jc", K.jc, cf["double_layer_jc"])
        add("single_layer.boundary_symbol", "symbols.single-layer-velocity", A.a0, cf["single_layer_velocity"])
        add("pressure_single_layer.boundary_symbol", "symbols.single-layer-pressure", C.a0,
            cf["single_layer_pressure"])
        add("pressure_single_layer.jump_plus", "symbols.pressure-jump", C.a0_plus - C.a0, cf["pressure_jump_plus"])
        add("pressure_single_layer.jump_minus", "symbols.pressure-jump", C.a0_minus - C.a0,
            cf["pressure_jump_minus"])
        add("pressure_single_layer.jump_coefficient", "symbols.pressure-jc", C.jc, cf["pressure_jc"])
        composed = double_layer_symbol_composed(v0, nu)
        closed = double_layer_symbol(v0, nu)
        dev = max(float(np.max(np.abs(composed(x) - closed(x)))) for x in rng.normal(size=(8, 2)))
        add("double_layer.composed_vs_closed", "symbols.double-layer-closed-form", dev, 0.0)
    return rows


# ---------------------------------------------------- indicial family checks


def _random_state(grid, rng, band: int = 8) -> StateField:
    coeffs = np.zeros((3, grid.n_modes), complex)
    m = grid.band_indices[:, 0]
    sel = np.abs(m) <= band
    coeffs[:, sel] = rng.normal(size=(3, sel.sum())) + 1j * rng.normal(size=(3, sel.sum()))
    return StateField.from_stacked(grid, grid.from_modes(coeffs))


def green_suite(taus=(0.0, 1.0, 3.0), n_pairs: int = 10, n_points: int = 32, seed: int = 0,
                arc=(0.5, 2.5), tol: float = 1e-6) -> list[CheckRow]:
    """Green's identity on an arc for constant and variable potentials."""
    rng = np.random.default_rng(seed)
    grid = make_grid(n_points)
    x = grid.nodes
    cases = {
        "constant": PotentialPair.constant(grid, 1.0, 1.0),
        "variable": PotentialPair.scalar(grid, 1.0 + 0.5 * np.cos(x), 1.0 + 0.3 * np.sin(x)),
    }
    region = Arc(float(arc[0]), float(arc[1]), grid.circumference)
    rows = []
    for cname, pots in cases.items():
        for tau in taus:
            for j in range(n_pairs):
                U, W = _random_state(grid, rng), _random_state(grid, rng)
                rep = green_identity_check(float(tau), U, W, pots, region)
                scale = max(1.0, abs(rep.lhs))
                rows.append(CheckRow.numeric(f"green.{cname}[tau={tau:g},pair={j}]", "indicial.green-identity",
                                             rep.residual / scale, 0.0, tol, case=f"{cname}-{tau:g}-{j}",
                                             residual=rep.residual / scale))
        rows.append(CheckRow.numeric(f"indicial.hermitian[{cname}]", "indicial.self-adjointness",
                                     assemble_xi_hat(1.0, grid, pots).hermitian_defect(), 0.0, 1e-12,
                                     case=f"{cname}-hermitian", residual=0.0))
    return rows


def invertibility_suite(taus=None, sizes=(32, 64), gap_min: float = 1e4, threads: int = 1) -> list[CheckRow]:
    """Singular-value scans of the indicial family, kernel dimensions on the circle and closed torus."""
    taus = np.linspace(-10, 10, 41) if taus is None else np.asarray(taus, dtype=float)
    rows = []
    for n in sizes:
        grid = make_grid(n)
        pos = invertibility_scan(taus, grid, PotentialPair.constant(grid, 1.0, 1.0), threads=threads)
        bound = min(r.min_singular_value for r in pos)
        rows.append(CheckRow.structural(f"scan.positive[N={n}]", "indicial.invertible-for-positive-potentials",
                                        bound, 0.0, bound > 1e-8 and not any(r.flagged for r in pos),
                                        "min singular value bounded below on the grid",
                                        tau="all", min_sigma=bound, kernel_dim=0))
        for r in pos:
            rows.append(CheckRow.structural(f"scan.row[N={n},tau={r.tau:g}]",
                                            "indicial.invertible-for-positive-potentials", r.kernel_dim, 0,
                                            not r.flagged, "trivial kernel", tau=r.tau,
                                            min_sigma=r.min_singular_value, kernel_dim=r.kernel_dim))
        neg = invertibility_scan(taus, grid, PotentialPair.constant(grid, 0.0, 0.0), threads=threads)
        flagged = [r.tau for r in neg if r.flagged]
        rows.append(CheckRow.structural(f"scan.negative_control[N={n}]", "indicial.zero-frequency-singular",
                                        len(flagged), 1, flagged == [0.0], "exactly tau=0 flagged",
                                        tau=";".join(f"{t:g}" for t in flagged),
                                        min_sigma=min(r.min_singular_value for r in neg), kernel_dim=""))
        rep0 = kernel_report(assemble_xi_hat(0.0, grid, PotentialPair.constant(grid, 0.0, 0.0)).matrix, 0.0)
        rows.append(CheckRow.structural(f"kernel.circle[N={n}]", "indicial.kernel-at-zero", rep0.kernel_dim, 3,
                                        rep0.kernel_dim == 3 and rep0.gap >= gap_min,
                                        f"kernel dim 3 with gap >= {gap_min:g}", tau=0.0,
                                        min_sigma=rep0.min_singular_value, kernel_dim=rep0.kernel_dim,
                                        gap=rep0.gap))
        torus = make_grid(n, d=2)
        for v, v0, expect in ((0.0, 0.0, 3), (0.0, 1.0, 2), (1.0, 0.0, 1), (1.0, 1.0, 0)):
            _, rep = assemble_xi_closed_torus(torus, PotentialPair.constant(torus, v, v0, 2))
            ok = rep.kernel_dim == expect and (expect == 0 or rep.gap >= gap_min)
            rows.append(CheckRow.structural(f"kernel.torus[N={n},V={v:g},V0={v0:g}]", "torus.kernel-cases",
                                            rep.kernel_dim, expect, ok, f"kernel dim {expect} with gap >= {gap_min:g}",
                                            tau="", min_sigma=rep.min_singular_value, kernel_dim=rep.kernel_dim,
                                            gap=rep.gap))
    return rows


# ----------------------------------------------------------- boundary layer


def jumps_suite(taus=(0.0, 1.0, 3.0, 10.0), arc=(0.0, np.pi), potentials=None, n_points: int = 64,
                tol_half: float = 1e-3, tol_single: float = 1e-5, tol_identity: float = 1e-5,
                tol_conormal: float = 1e-4, tol_pompeiu: float = 1e-5) -> list[CheckRow]:
    grid = make_grid(n_points)
    pots = _potentials(grid, potentials or {"V": 1.0, "V0": 1.0})
    region = Arc(float(arc[0]), float(arc[1]), grid.circumference)
    rows = []
    for tau in taus:
        tau = float(tau)
        tag = f"[tau={tau:g}]"
        res = IndicialResolvent(tau, pots)
        fam = boundary_operators(tau, region, pots, resolvent=res)
        eye = np.eye(4)
        rows.append(CheckRow.numeric("double_layer.half_jump" + tag, "layers.double-layer-jump",
                                     np.max(np.abs(fam.double_layer_half_jump - 0.5 * eye)), 0.0, tol_half, tau=tau))
        rows.append(CheckRow.numeric("conormal_single_layer.half_jump" + tag, "layers.conormal-single-layer-jump",
                                     np.max(np.abs(fam.conormal_half_jump + 0.5 * eye)), 0.0, tol_half, tau=tau))
        rows.append(CheckRow.numeric("single_layer.velocity_jump" + tag, "layers.single-layer-continuity",
                                     fam.single_layer_jump, 0.0, tol_single, tau=tau))
        _, V0 = pots.at(np.array(region.points))
        expected_p = np.zeros((2, 4))
        for q, nu in enumerate(region.normals):
            expected_p[q, 2 * q] = -nu / (2 * V0[q] + 1)
        rows.append(CheckRow.numeric("single_layer.pressure_jump" + tag, "layers.pressure-jump",
                                     np.max(np.abs(fam.pressure_jump - expected_p)), 0.0, tol_single, tau=tau))
        rows.append(CheckRow.numeric("identity.calderon" + tag, "layers.single-double-intertwining",
                                     operator_identity_check(fam), 0.0, tol_identity, tau=tau))
        N, dtn_res = dtn_matrix(tau, region, pots, fam)
        rows.append(CheckRow.numeric("identity.dirichlet_to_neumann" + tag, "layers.dtn-identity",
                                     dtn_res, 0.0, tol_identity, tau=tau))
        chk = conormal_double_layer_check(tau, region, pots, np.array([1.0, 0.5, -0.3, 0.8]), fam, N, res)
        rows.append(CheckRow.numeric("double_layer.conormal_jump" + tag, "layers.conormal-double-layer-continuity",
                                     chk["jump"], 0.0, tol_conormal, tau=tau))
        gap = region.circumference - region.length
        sources = [(region.beta + 0.3 * gap, np.array([1.0, 0.5])), (region.beta + 0.7 * gap, np.array([-0.4, 1.0]))]
        pc = pompeiu_check(tau, region, pots, sources, resolvent=res)
        rows.append(CheckRow.numeric("representation.interior" + tag, "layers.cauchy-data-representation",
                                     pc["interior_error"], 0.0, tol_pompeiu, tau=tau))
        rows.append(CheckRow.numeric("representation.exterior" + tag, "layers.cauchy-data-representation",
                                     pc["exterior_leakage"], 0.0, tol_pompeiu, tau=tau))
    return rows


def boundary_invertibility_suite(taus=None, arc=(0.0, np.pi), n_points: int = 64, threads: int = 1) -> list[CheckRow]:
    import warnings

    taus = np.linspace(-10, 10, 21) if taus is None else np.asarray(taus, dtype=float)
    grid = make_grid(n_points)
    region = Arc(float(arc[0]), float(arc[1]), grid.circumference)
    rows = []
    pos = invertibility_scan_boundary(taus, PotentialPair.constant(grid, 1.0, 1.0), region, threads=threads)
    for name, attr in (("single_layer", "min_sv_single"), ("double_layer", "min_sv_double")):
        bound = min(getattr(r, attr) for r in pos)
        rows.append(CheckRow.structural(f"boundary_scan.{name}", "layers.boundary-invertibility", bound, 0.0,
                                        bound > 1e-8 and not any(r.xi_singular for r in pos),
                                        "min singular value bounded below on the grid", tau="all"))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        neg = invertibility_scan_boundary(taus, PotentialPair.constant(grid, 0.0, 0.0), region, threads=threads)
    flagged = [r.tau for r in neg if r.xi_singular or min(r.min_sv_single, r.min_sv_double) < 1e-8]
    rows.append(CheckRow.structural("boundary_scan.negative_control", "layers.zero-frequency-singular",
                                    len(flagged), 1, flagged == [0.0], "exactly tau=0 flagged",
                                    tau=";".join(f"{t:g}" for t in flagged)))
    for r in pos:
        rows.append(CheckRow.structural(f"boundary_scan.row[tau={r.tau:g}]", "layers.boundary-invertibility",
                                        min(r.min_sv_single, r.min_sv_double), 0.0,
                                        min(r.min_sv_single, r.min_sv_double) > 1e-8, "positive singular values",
                                        tau=r.tau, min_sv_single=r.min_sv_single, min_sv_double=r.min_sv_double))
    return rows
