import csv
import json

import pytest

from cylstokes.cli import DEFAULTS, dump_config, main, resolve_config

SMALL = {"window": {"T": 12.0, "n_axial": 128}, "n_nodes": 32}


def _run(tmp_path, *args, config=None):
    argv = list(args) + ["--out", str(tmp_path)]
    if config is not None:
        path = tmp_path / "in.json"
        path.write_text(config if isinstance(config, str) else json.dumps(config))
        argv += ["--config", str(path)]
    return main(argv)


def _rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_verify_symbols_defaults(tmp_path, capsys):
    assert _run(tmp_path, "verify", "symbols") == 0
    rows = _rows(tmp_path / "verify-symbols.csv")
    assert 25 <= len(rows) <= 35
    assert all(r["pass"] == "True" and r["anchor"] for r in rows)
    assert "28/28" in capsys.readouterr().out


def test_malformed_json_exits_2(tmp_path):
    assert _run(tmp_path, "verify", "symbols", config="{not json") == 2


@pytest.mark.parametrize("cfg", [{"n_random": 0}, {"unknown_key": 1}, {"command": "verify green"},
                                 {"potentials": {"V": "x", "V0": 1}}])
def test_schema_violations_exit_2(tmp_path, cfg):
    cmd = ["verify", "jumps"] if "potentials" in cfg else ["verify", "symbols"]
    assert _run(tmp_path, *cmd, config=cfg) == 2


def test_config_round_trips_byte_identically(tmp_path):
    assert _run(tmp_path, "verify", "symbols", "--seed", "4") == 0
    written = (tmp_path / "verify-symbols-config.json").read_text()
    cfg = json.loads(written)
    assert dump_config(cfg) == written
    assert dump_config(resolve_config("verify symbols", cfg, {})) == written


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = {"n_pairs": 3, "out": "ignored"}
    for d in (a, b):
        d.mkdir()
        assert _run(d, "verify", "green", "--seed", "11", config=cfg) == 0
    assert (a / "verify-green.json").read_bytes() == (b / "verify-green.json").read_bytes()
    assert (a / "verify-green.csv").read_bytes() == (b / "verify-green.csv").read_bytes()


def test_verify_jumps_tau_flag(tmp_path):
    assert _run(tmp_path, "verify", "jumps", "--tau", "2.0") == 0
    rows = _rows(tmp_path / "verify-jumps.csv")
    assert {r["tau"] for r in rows} == {"2.0"}


def test_solve_dirichlet_direct_writes_field(tmp_path):
    cfg = {**SMALL, "method": "direct"}
    assert _run(tmp_path, "solve", "dirichlet", config=cfg) == 0
    with open(tmp_path / "solve-dirichlet-direct.csv") as fh:
        header = next(csv.reader(fh))
    assert header[:2] == ["x", "t"] and len(header) == 8
    report = json.loads((tmp_path / "solve-dirichlet.json").read_text())
    assert report["reports"]["direct"]["method"] == "direct"


def test_solve_ns_strict_large_data_exits_1(tmp_path, capsys):
    cfg = {**SMALL, "n_pairs": 20, "n_samples": 5,
           "data": {"f": {"kind": "gaussian", "vectors": [[1.0, 0.5], [-0.3, 0.8]], "scale": 10.0}}}
    assert _run(tmp_path, "solve", "ns", "--strict", config=cfg) == 1
    bundle = json.loads((tmp_path / "solve-ns.json").read_text())
    assert bundle["data_over_zeta"] > 10
    assert "smallness radius" in bundle["diagnostic"]
    assert "exceeds" in capsys.readouterr().err


def test_report_summarises_bundles(tmp_path):
    assert _run(tmp_path, "report") == 1
    assert _run(tmp_path, "verify", "symbols") == 0
    assert _run(tmp_path, "report") == 0
    assert json.loads((tmp_path / "report.json").read_text())["passed"]


def test_every_command_has_defaults_that_validate():
    for command in DEFAULTS:
        resolve_config(command, {}, {})
