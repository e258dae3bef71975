"""Command line entry point: verification suites, invertibility scans and solvers.

Every run resolves its configuration (defaults merged with ``--config`` and
the global flags), validates it against a JSON schema, writes it back as
``<command>-config.json`` and emits CSV and JSON reports into ``--out``.  Exit status
is 0 when every check passes, 1 on a failed check or solver breakdown, and
2 for an invalid configuration.
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import sys
import warnings
from pathlib import Path

import jsonschema
import numpy as np

from . import checks
from .bvp import (
    AxialWindow,
    BoundaryData,
    CylinderDomain,
    ManufacturedState,
    NavierStokesDivergence,
    estimate_constants,
    solve_dirichlet_bie,
    solve_dirichlet_direct,
    solve_navier_stokes,
    solve_nonhomogeneous,
    sobolev_norm,
)
from .cylinder import PotentialPair
from .spectral import Arc, make_grid

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

# ------------------------------------------------------------------ schemas

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_POS_INT = {"type": "integer", "minimum": 1}
_NUM_LIST = {"type": "array", "items": _NUM, "minItems": 1}
_POT_VALUE = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 4}]}
_ARC = {"type": "object", "additionalProperties": False, "required": ["alpha", "beta"],
        "properties": {"alpha": _NUM, "beta": _NUM}}
_POTENTIALS = {"type": "object", "additionalProperties": False, "required": ["V", "V0"],
               "properties": {"V": _POT_VALUE, "V0": _POT_VALUE}}
_TAUS = {"oneOf": [_NUM_LIST, {"type": "object", "additionalProperties": False,
                               "required": ["start", "stop", "num"],
                               "properties": {"start": _NUM, "stop": _NUM, "num": _POS_INT}}]}
_TERM = {"type": "array", "items": _NUM, "minItems": 5, "maxItems": 5}
_FIELD_EXPR = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["zero", "gaussian", "manufactured"]},
        "vectors": {"type": "array"},
        "vector": {"type": "array", "items": _NUM},
        "amplitude": _NUM,
        "width": {"type": "number", "exclusiveMinimum": 0},
        "center": _NUM,
        "wavenumber": _NUM,
        "scale": _NUM,
        "terms": {"type": "array", "items": {"type": "array", "items": _TERM}, "minItems": 3, "maxItems": 3},
    },
    "additionalProperties": False,
}
_COMMON = {
    "command": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0},
    "threads": _POS_INT,
    "strict": {"type": "boolean"},
    "out": {"type": "string"},
}


def _schema(props: dict) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": {**_COMMON, **props}}


_SOLVE_PROPS = {
    "grid": {"type": "object", "additionalProperties": False, "required": ["N", "L", "d"],
             "properties": {"N": {"type": "integer", "minimum": 4}, "L": {"type": "number", "exclusiveMinimum": 0},
                            "d": {"const": 1}}},
    "window": {"type": "object", "additionalProperties": False, "required": ["T", "n_axial"],
               "properties": {"T": {"type": "number", "exclusiveMinimum": 0}, "n_axial": {"type": "integer", "minimum": 4}}},
    "arc": _ARC,
    "potentials": _POTENTIALS,
    "data": {"type": "object", "additionalProperties": False, "required": ["f"],
             "properties": {"f": _FIELD_EXPR, "h": _FIELD_EXPR, "r": _FIELD_EXPR}},
    "m": {"type": "integer", "minimum": 1, "maximum": 3},
    "n_nodes": {"type": "integer", "minimum": 8},
}

SCHEMAS = {
    "verify fourier": _schema({"radii": _NUM_LIST, "n_samples": {"type": "integer", "minimum": 1024},
                               "tolerances": {"type": "object", "additionalProperties": False,
                                              "properties": {"residue": _NUM, "jump": _NUM}}}),
    "verify symbols": _schema({"v0s": _NUM_LIST, "n_random": _POS_INT, "tolerance": _NUM}),
    "verify green": _schema({"taus": _TAUS, "n_pairs": _POS_INT, "n_points": _POS_INT,
                             "arc": _ARC, "tolerance": _NUM}),
    "verify jumps": _schema({"taus": _TAUS, "arc": _ARC, "potentials": _POTENTIALS, "n_points": _POS_INT}),
    "scan invertibility": _schema({"taus": _TAUS, "sizes": {"type": "array", "items": _POS_INT, "minItems": 1},
                                   "gap_min": _NUM}),
    "scan boundary-invertibility": _schema({"taus": _TAUS, "arc": _ARC, "n_points": _POS_INT}),
    "solve dirichlet": _schema({
        **_SOLVE_PROPS,
        "method": {"enum": ["all", "bie-double", "bie-single", "direct"]},
        "n_band": {"type": "integer", "minimum": 64},
        "tolerances": {"type": "object", "additionalProperties": False,
                       "properties": {"agreement": _NUM, "residual": _NUM, "mismatch": _NUM, "exact": _NUM}},
    }),
    "solve ns": _schema({
        **_SOLVE_PROPS,
        "n_pairs": _POS_INT,
        "n_samples": _POS_INT,
        "tolerances": {"type": "object", "additionalProperties": False,
                       "properties": {"picard": _NUM, "max_iter": _POS_INT, "ratio": _NUM, "residual": _NUM,
                                      "iterations": _POS_INT}},
    }),
    "report": _schema({}),
}

_GAUSS_F = {"kind": "gaussian", "vectors": [[1.0, 0.5], [-0.3, 0.8]], "width": 1.0, "center": 0.0, "scale": 1.0}
_SOLVE_DEFAULTS = {
    "grid": {"N": 64, "L": 2 * math.pi, "d": 1},
    "window": {"T": 16.0, "n_axial": 256},
    "arc": {"alpha": 0.0, "beta": math.pi},
    "potentials": {"V": 1.0, "V0": 1.0},
    "m": 1,
    "n_nodes": 64,
}

DEFAULTS = {
    "verify fourier": {"radii": [0.5, 1.0, 2.0], "n_samples": 2**20, "tolerances": {"residue": 1e-8, "jump": 1e-3}},
    "verify symbols": {"v0s": [0.0, 1.0, 5.0], "n_random": 100, "tolerance": 1e-8},
    "verify green": {"taus": [0.0, 1.0, 3.0], "n_pairs": 10, "n_points": 32, "arc": {"alpha": 0.5, "beta": 2.5},
                     "tolerance": 1e-6},
    "verify jumps": {"taus": [0.0, 1.0, 3.0, 10.0], "arc": {"alpha": 0.0, "beta": math.pi},
                     "potentials": {"V": 1.0, "V0": 1.0}, "n_points": 64},
    "scan invertibility": {"taus": {"start": -10.0, "stop": 10.0, "num": 41}, "sizes": [32, 64], "gap_min": 1e4},
    "scan boundary-invertibility": {"taus": {"start": -10.0, "stop": 10.0, "num": 21},
                                    "arc": {"alpha": 0.0, "beta": math.pi}, "n_points": 64},
    "solve dirichlet": {**_SOLVE_DEFAULTS, "data": {"f": _GAUSS_F, "h": {"kind": "zero"}, "r": {"kind": "zero"}},
                        "method": "all", "n_band": 512,
                        "tolerances": {"agreement": 1e-5, "residual": 1e-6, "mismatch": 1e-5, "exact": 1e-6}},
    "solve ns": {**_SOLVE_DEFAULTS,
                 "data": {"f": {**_GAUSS_F, "scale": 0.02},
                          "h": {"kind": "gaussian", "vector": [0.01, -0.01], "width": 1.0, "center": 0.0,
                                "wavenumber": 1.0},
                          "r": {"kind": "zero"}},
                 "n_pairs": 200, "n_samples": 40,
                 "tolerances": {"picard": 1e-10, "max_iter": 100, "ratio": 0.55, "residual": 1e-8,
                                "iterations": 30}},
    "report": {},
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict) and k not in ("taus", "f", "h", "r"):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def dump_config(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, indent=2) + "\n"


def resolve_config(command: str, file_cfg: dict, flags: dict) -> dict:
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    if "command" in file_cfg and file_cfg["command"] != command:
        raise ConfigError(f"config is for {file_cfg['command']!r}, not {command!r}")
    base = {"command": command, "seed": 0, "threads": 1, "strict": False, "out": "out"}
    cfg = _merge(_merge(base, DEFAULTS[command]), file_cfg)
    cfg.update({k: v for k, v in flags.items() if v is not None})
    try:
        jsonschema.validate(cfg, SCHEMAS[command])
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {path}: {exc.message}") from None
    return cfg


def _taus(spec) -> list[float]:
    if isinstance(spec, dict):
        return [float(t) for t in np.linspace(spec["start"], spec["stop"], spec["num"])]
    return [float(t) for t in spec]


# ------------------------------------------------------------------ writers


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _write_rows(path: Path, rows: list[dict]) -> None:
    keys: list[str] = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _csv_cell(r.get(k, "")) for k in keys})


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _write_bundle(out: Path, stem: str, cfg: dict, rows: list[checks.CheckRow], extra: dict | None = None) -> bool:
    dict_rows = [r.as_dict() for r in rows]
    _write_rows(out / f"{stem}.csv", dict_rows)
    passed = all(r.passed for r in rows)
    bundle = {"command": cfg["command"], "passed": passed, "n_checks": len(rows),
              "n_failed": sum(not r.passed for r in rows), "rows": dict_rows}
    if extra:
        bundle.update(extra)
    (out / f"{stem}.json").write_text(json.dumps(_jsonable(bundle), sort_keys=True, indent=2) + "\n")
    return passed


def _write_field(path: Path, fld) -> None:
    dom = fld.domain
    x = dom.cheb.nodes
    t = dom.window.nodes
    vals = fld.stacked()
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "t", "u_x_re", "u_x_im", "u_t_re", "u_t_im", "p_re", "p_im"])
        for i in range(len(x)):
            for j in range(len(t)):
                v = vals[:, i, j]
                w.writerow([repr(float(x[i])), repr(float(t[j]))]
                           + [repr(float(c)) for z in v for c in (z.real, z.imag)])


# -------------------------------------------------------------- data setup


def _solve_setup(cfg):
    g = cfg["grid"]
    grid = make_grid(g["N"], g["L"])
    v, v0 = cfg["potentials"]["V"], cfg["potentials"]["V0"]
    for name, val in (("V", v), ("V0", v0)):
        if isinstance(val, list) and len(val) != grid.n_points:
            raise ConfigError(f"potentials.{name} needs {grid.n_points} samples")
    pots = checks._potentials(grid, cfg["potentials"])
    arc = Arc(cfg["arc"]["alpha"], cfg["arc"]["beta"], g["L"])
    window = AxialWindow(cfg["window"]["T"], cfg["window"]["n_axial"])
    return grid, pots, arc, window


def _boundary_data(spec, arc, window, m):
    kind = spec["kind"]
    if kind == "zero":
        return BoundaryData.zeros(window, m)
    if kind == "gaussian":
        vec = np.asarray(spec.get("vectors", [[1.0, 0.0], [0.0, 1.0]]), dtype=float) * spec.get("scale", 1.0)
        return BoundaryData.gaussian(window, vec, spec.get("width", 1.0), spec.get("center", 0.0), m)
    return ManufacturedState(tuple(tuple(tuple(t) for t in c) for c in spec["terms"])).boundary_data(arc, window, m)


def _volume_expr(spec, comps: int):
    """Callable ``(x, t) -> values`` for a forcing expression, or ``None`` for zero."""
    if spec is None or spec["kind"] == "zero":
        return None
    if spec["kind"] != "gaussian":
        raise ConfigError("volume forcing must be 'zero' or 'gaussian' unless f is manufactured")
    vec = np.asarray(spec.get("vector", [1.0] * comps), dtype=float) * spec.get("amplitude", 1.0)
    if vec.shape != (comps,):
        raise ConfigError(f"forcing vector needs {comps} entries")
    k, w, c = spec.get("wavenumber", 1.0), spec.get("width", 1.0), spec.get("center", 0.0)

    def expr(x, t):
        profile = np.cos(k * x) * np.exp(-((t - c) ** 2) / (2 * w * w))
        out = vec.reshape((comps,) + (1,) * np.ndim(profile)) * profile
        return out if comps > 1 else out[0]

    return expr


# ----------------------------------------------------------------- commands


def _cmd_verify(cfg, name) -> tuple[list, dict]:
    if name == "fourier":
        tol = cfg["tolerances"]
        return checks.fourier_suite(cfg["radii"], cfg["n_samples"], tol["residue"], tol["jump"]), {}
    if name == "symbols":
        return checks.symbols_suite(cfg["v0s"], cfg["n_random"], cfg["seed"], cfg["tolerance"]), {}
    if name == "green":
        arc = (cfg["arc"]["alpha"], cfg["arc"]["beta"])
        return checks.green_suite(_taus(cfg["taus"]), cfg["n_pairs"], cfg["n_points"], cfg["seed"], arc,
                                  cfg["tolerance"]), {}
    arc = (cfg["arc"]["alpha"], cfg["arc"]["beta"])
    return checks.jumps_suite(_taus(cfg["taus"]), arc, cfg["potentials"], cfg["n_points"]), {}


def _cmd_scan(cfg, name) -> tuple[list, dict]:
    if name == "invertibility":
        return checks.invertibility_suite(_taus(cfg["taus"]), cfg["sizes"], cfg["gap_min"], cfg["threads"]), {}
    arc = (cfg["arc"]["alpha"], cfg["arc"]["beta"])
    return checks.boundary_invertibility_suite(_taus(cfg["taus"]), arc, cfg["n_points"], cfg["threads"]), {}


def _cmd_solve_dirichlet(cfg, out: Path) -> tuple[list, dict]:
    _, pots, arc, window = _solve_setup(cfg)
    m, n = cfg["m"], cfg["n_nodes"]
    data = cfg["data"]
    tol = cfg["tolerances"]
    f = _boundary_data(data["f"], arc, window, m)
    manufactured = None
    if data["f"]["kind"] == "manufactured":
        manufactured = ManufacturedState(tuple(tuple(tuple(t) for t in c) for c in data["f"]["terms"]))
        h, r = manufactured.forcing(pots)
    else:
        h, r = _volume_expr(data.get("h"), 2), _volume_expr(data.get("r"), 1)
    methods = ["bie-double", "bie-single", "direct"] if cfg["method"] == "all" else [cfg["method"]]
    forced = h is not None or r is not None
    if forced and not pots.is_constant:
        methods = [mm for mm in methods if mm == "direct"] or ["direct"]
    fields, reports = {}, {}
    for meth in methods:
        if forced:
            kind = "direct" if meth == "direct" else "bie"
            rep_kind = meth.split("-")[1] if meth.startswith("bie") else "double"
            fld, rep = solve_nonhomogeneous(h, r, f, pots, arc, method=kind, representation=rep_kind, n_nodes=n,
                                            n_band=cfg["n_band"], threads=cfg["threads"], m=m)
        elif meth == "direct":
            fld, rep = solve_dirichlet_direct(f, pots, arc, n_nodes=n, m=m)
        else:
            fld, rep = solve_dirichlet_bie(f, pots, arc, meth.split("-")[1], n_nodes=n, n_band=cfg["n_band"],
                                           threads=cfg["threads"], m=m)
        fields[meth], reports[meth] = fld, rep
        _write_field(out / f"solve-dirichlet-{meth}.csv", fld)
    rows = []
    for meth, rep in reports.items():
        rows.append(checks.CheckRow.numeric(f"residual[{meth}]", "dirichlet.interior-equation", rep.residual, 0.0,
                                            tol["residual"], method=meth))
        rows.append(checks.CheckRow.numeric(f"boundary_mismatch[{meth}]", "dirichlet.boundary-trace",
                                            rep.boundary_mismatch, 0.0, tol["mismatch"], method=meth))
        if "convergence_check" in rep.extras:
            rows.append(checks.CheckRow.numeric(f"refinement[{meth}]", "dirichlet.collocation-refinement",
                                                rep.extras["convergence_check"], 0.0, tol["agreement"], method=meth))
        if manufactured is not None:
            exact = manufactured.on_domain(fields[meth].domain)
            err = fields[meth].interior_l2(exact) / max(exact.interior_l2(), 1e-300)
            rows.append(checks.CheckRow.numeric(f"exact_error[{meth}]", "dirichlet.manufactured-solution", err, 0.0,
                                                tol["exact"], method=meth))
    if "direct" in fields:
        ref = fields["direct"]
        for meth, fld in fields.items():
            if meth == "direct":
                continue
            rel = fld.interior_l2(ref) / max(ref.interior_l2(), 1e-300)
            rows.append(checks.CheckRow.numeric(f"agreement[{meth} vs direct]", "dirichlet.unique-solution", rel,
                                                0.0, tol["agreement"], method=meth))
    return rows, {"reports": {k: v.to_dict() for k, v in reports.items()}}


def _cmd_solve_ns(cfg, out: Path) -> tuple[list, dict]:
    _, pots, arc, window = _solve_setup(cfg)
    m, n = cfg["m"], cfg["n_nodes"]
    tol = cfg["tolerances"]
    f = _boundary_data(cfg["data"]["f"], arc, window, m)
    h = _volume_expr(cfg["data"].get("h"), 2)
    if cfg["data"].get("r", {"kind": "zero"})["kind"] != "zero":
        raise ConfigError("the Navier-Stokes solver takes r = 0")
    dom = CylinderDomain.for_arc(arc, window, n)
    hv = np.zeros((2,) + dom.shape) if h is None else np.asarray(h(dom.cheb.nodes[:, None], window.nodes[None, :]))
    constants = estimate_constants(m, pots, arc, window, cfg["n_pairs"], cfg["n_samples"], cfg["seed"],
                                   probes=[(hv, f)], n_nodes=n)
    data_norm = sobolev_norm(hv, m - 1, dom) + f.norm(m + 0.5)
    extra = {"constants": constants.to_dict(), "data_norm": data_norm,
             "data_over_zeta": data_norm / constants.zeta}
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            fld, rep = solve_navier_stokes(hv, f, pots, arc, m=m, constants=constants, strict=cfg["strict"],
                                           tol=tol["picard"], max_iter=tol["max_iter"], n_nodes=n)
    except NavierStokesDivergence as exc:
        extra["diagnostic"] = str(exc)
        row = checks.CheckRow.structural("picard.converged", "navier-stokes.small-data", data_norm,
                                         constants.zeta, False, "data within the smallness radius and contraction",
                                         diagnostic=str(exc))
        return [row], extra
    extra["warnings"] = [str(w.message) for w in caught]
    extra["report"] = rep.to_dict()
    _write_field(out / "solve-ns-solution.csv", fld)
    max_ratio = max(rep.ratios) if rep.ratios else 0.0
    rows = [
        checks.CheckRow.structural("picard.within_radius", "navier-stokes.smallness-radius", data_norm,
                                   constants.zeta, data_norm <= constants.zeta, "data norm <= zeta"),
        checks.CheckRow.structural("picard.contraction", "navier-stokes.contraction", max_ratio, tol["ratio"],
                                   max_ratio <= tol["ratio"], "max ratio <= bound"),
        checks.CheckRow.structural("picard.iterations", "navier-stokes.contraction", rep.iterations,
                                   tol["iterations"], rep.converged and rep.iterations <= tol["iterations"],
                                   "converged within the iteration budget"),
        checks.CheckRow.numeric("ns.residual", "navier-stokes.residual", rep.final_residual, 0.0, tol["residual"]),
        checks.CheckRow.structural("ns.apriori_bound", "navier-stokes.solution-bound", rep.solution_norm,
                                   rep.apriori_bound, rep.solution_norm <= rep.apriori_bound,
                                   "solution norm <= (4/3) C_m data"),
    ]
    return rows, extra


def _cmd_report(cfg, out: Path) -> tuple[list, dict]:
    rows = []
    for path in sorted(out.glob("*.json")):
        if path.name.endswith("-config.json") or path.name == "report.json":
            continue
        try:
            bundle = json.loads(path.read_text())
        except json.JSONDecodeError:
            continue
        if "rows" not in bundle:
            continue
        rows.append(checks.CheckRow.structural(path.stem, "report.bundle", bundle["n_failed"], 0,
                                               bundle["passed"], "no failed checks", n_checks=bundle["n_checks"]))
    if not rows:
        rows.append(checks.CheckRow.structural("report.empty", "report.bundle", 0, 1, False,
                                               "at least one report bundle present"))
    return rows, {}


# --------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="JSON configuration file")
    common.add_argument("--out", type=str, default=None, help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--strict", action="store_const", const=True, default=None,
                        help="treat the smallness radius as a hard limit")
    parser = argparse.ArgumentParser(prog="cylstokes", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)
    for group, names in (("verify", ["fourier", "symbols", "green", "jumps"]),
                         ("scan", ["invertibility", "boundary-invertibility"]),
                         ("solve", ["dirichlet", "ns"])):
        gp = groups.add_parser(group)
        sub = gp.add_subparsers(dest="name", required=True)
        for name in names:
            sp = sub.add_parser(name, parents=[common])
            if (group, name) == ("verify", "jumps"):
                sp.add_argument("--tau", type=float, action="append", default=None,
                                help="axial frequency (repeatable)")
    groups.add_parser("report", parents=[common])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.group if args.group == "report" else f"{args.group} {args.name}"
    try:
        file_cfg = {}
        if args.config is not None:
            try:
                file_cfg = json.loads(args.config.read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {args.config}: {exc}") from None
            if not isinstance(file_cfg, dict):
                raise ConfigError("config must be a JSON object")
        flags = {"out": args.out, "seed": args.seed, "threads": args.threads, "strict": args.strict}
        if getattr(args, "tau", None):
            flags["taus"] = args.tau
        cfg = resolve_config(command, file_cfg, flags)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        stem = command.replace(" ", "-")
        (out / f"{stem}-config.json").write_text(dump_config(cfg))
        if args.group == "verify":
            rows, extra = _cmd_verify(cfg, args.name)
        elif args.group == "scan":
            rows, extra = _cmd_scan(cfg, args.name)
        elif command == "solve dirichlet":
            rows, extra = _cmd_solve_dirichlet(cfg, out)
        elif command == "solve ns":
            rows, extra = _cmd_solve_ns(cfg, out)
        else:
            rows, extra = _cmd_report(cfg, out)
            stem = "report"
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    passed = _write_bundle(out, stem, cfg, rows, extra)
    for r in rows:
        if not r.passed:
            print(f"FAIL {r.check}: measured {r.measured:.3e}, expected {r.expected:.3e} (tol {r.tolerance:.1e})",
                  file=sys.stderr)
    if "diagnostic" in extra:
        print(extra["diagnostic"], file=sys.stderr)
    n_fail = sum(not r.passed for r in rows)
    print(f"{command}: {len(rows) - n_fail}/{len(rows)} checks passed; reports in {out}")
    return EXIT_OK if passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
