import json

import numpy as np
import pytest

from rismimo.channel import load_channel_csv
from rismimo.cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from rismimo.ris import load_ris_config

DESK_CONFIG = """
tx.rows = 1
tx.cols = 8
ris.rows = 1
ris.cols = 64
rx.rows = 1
rx.cols = 8
topology.d_f = 7
topology.d_b = 7
"""


@pytest.fixture
def desk_config(tmp_path):
    path = tmp_path / "desk.cfg"
    path.write_text(DESK_CONFIG)
    return path


def run_cli(args, capsys):
    status = main(args)
    captured = capsys.readouterr()
    return status, captured.out, captured.err


def test_single_point_prints_rates(tmp_path, desk_config, capsys):
    status, out, _ = run_cli(
        ["single-point", "--config", str(desk_config), "--schemes", "nd,dfoc",
         "--out-dir", str(tmp_path / "o")],
        capsys,
    )
    assert status == EXIT_OK
    values = {}
    for line in out.splitlines():
        if line.startswith("scheme="):
            parts = dict(kv.split("=", 1) for kv in line.split())
            values[parts["scheme"]] = parts
    assert float(values["nd"]["rate_bits"]) >= float(values["dfoc"]["rate_bits"]) > 0
    assert int(values["nd"]["active_modes"]) >= 1
    assert float(values["nd"]["mu_mw"]) > 0


def test_single_point_dumps_and_manifests(tmp_path, desk_config, capsys):
    out_dir = tmp_path / "out"
    status, out, _ = run_cli(
        ["single-point", "--config", str(desk_config), "--schemes", "nd,dfoc",
         "--out-dir", str(out_dir), "--dump-channels", "--save-ris", "--seed", "3"],
        capsys,
    )
    assert status == EXIT_OK
    manifest = json.loads((out_dir / "single_point_manifest.json").read_text())
    assert manifest["subcommand"] == "single-point"
    assert manifest["seed"] == 3
    assert manifest["scale"] == 1.0
    assert len(manifest["config_hash"]) == 64
    for rel in ("h_forward.csv", "h_backward.csv", "ris_nd.txt", "ris_dfoc.txt"):
        assert (out_dir / rel).exists()
    h_f = load_channel_csv(out_dir / "h_forward.csv")
    assert h_f.shape == (64, 8)
    nd = load_ris_config(out_dir / "ris_nd.txt")
    assert nd.kind == "full_unitary" and nd.matrix.shape == (64, 64)
    foc = load_ris_config(out_dir / "ris_dfoc.txt")
    assert foc.kind == "diagonal_phases" and foc.phases.size == 64


def test_single_point_full_scale_defaults(tmp_path, capsys):
    # no config file: the full 32/1024/16 setup at 28 GHz, 0 dBm, -97 dBm
    status, out, _ = run_cli(
        ["single-point", "--schemes", "nd,dfoc", "--out-dir", str(tmp_path / "o")],
        capsys,
    )
    assert status == EXIT_OK
    values = {}
    for line in out.splitlines():
        if line.startswith("scheme="):
            parts = dict(kv.split("=", 1) for kv in line.split())
            values[parts["scheme"]] = parts
    assert float(values["nd"]["rate_bits"]) >= float(values["dfoc"]["rate_bits"]) > 0


def test_paraxial_subcommand_writes_csv(tmp_path, desk_config, capsys):
    out_dir = tmp_path / "out"
    status, _, _ = run_cli(
        ["paraxial", "--config", str(desk_config), "--schemes", "nd,dfoc",
         "--d-values", "4,7", "--out-dir", str(out_dir)],
        capsys,
    )
    assert status == EXIT_OK
    lines = (out_dir / "paraxial.csv").read_text().splitlines()
    assert len(lines) == 3
    manifest = json.loads((out_dir / "paraxial_manifest.json").read_text())
    assert str(out_dir / "paraxial.csv") in manifest["outputs"]
    assert manifest["duration_s"] >= 0


def test_rate_map_scale_recorded(tmp_path, desk_config, capsys):
    out_dir = tmp_path / "out"
    status, _, _ = run_cli(
        ["rate-map", "--config", str(desk_config), "--scale", "0.25",
         "--grid", "5x5", "--x-range=-4,4", "--y-range", "1,9",
         "--tx-center", "1.0,5.0,0.0", "--out-dir", str(out_dir)],
        capsys,
    )
    assert status == EXIT_OK
    manifest = json.loads((out_dir / "rate_map_manifest.json").read_text())
    assert manifest["scale"] == 0.25
    assert manifest["scenario"]["ris_dims"] == [1, 16]
    lines = (out_dir / "rate_map.csv").read_text().splitlines()
    assert len(lines) == 26
    assert (out_dir / "rate_map_ratio_ccdf.csv").exists()


def test_missing_config_file_exits_1(tmp_path, capsys):
    status, _, err = run_cli(["single-point", "--config", str(tmp_path / "nope.cfg")], capsys)
    assert status == EXIT_CONFIG
    record = json.loads(err.strip().splitlines()[-1])
    assert record["error"] == "config"


def test_unknown_config_key_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("mystery_knob = 3\n")
    status, _, err = run_cli(["single-point", "--config", str(bad)], capsys)
    assert status == EXIT_CONFIG
    record = json.loads(err.strip().splitlines()[-1])
    assert record["error"] == "config"
    assert "mystery_knob" in record["message"]


def test_degenerate_scenario_exits_2(tmp_path, capsys):
    cfg = tmp_path / "degen.cfg"
    # transmitter and receiver mid-points coincide
    cfg.write_text(
        "tx.rows = 1\ntx.cols = 2\nris.rows = 1\nris.cols = 4\nrx.rows = 1\nrx.cols = 2\n"
        "topology.d_f = 2\ntopology.d_b = 2\ntopology.theta_f = 0.3\ntopology.theta_b = 0.3\n"
    )
    status, _, err = run_cli(
        ["single-point", "--config", str(cfg), "--out-dir", str(tmp_path / "o")], capsys
    )
    assert status == EXIT_NUMERICAL
    record = json.loads(err.strip().splitlines()[-1])
    assert record["error"] == "SimulationError"


def test_selftest_deterministic(tmp_path, capsys):
    status1, out1, _ = run_cli(["selftest", "--seed", "42", "--out-dir", str(tmp_path)], capsys)
    status2, out2, _ = run_cli(["selftest", "--seed", "42", "--out-dir", str(tmp_path)], capsys)
    assert status1 == EXIT_OK and status2 == EXIT_OK
    assert out1 == out2
    assert all(line.startswith(("PASS", "selftest:")) for line in out1.splitlines())


def test_env_var_outdir(tmp_path, desk_config, capsys, monkeypatch):
    target = tmp_path / "from-env"
    monkeypatch.setenv("RISMIMO_OUT_DIR", str(target))
    status, _, _ = run_cli(
        ["paraxial", "--config", str(desk_config), "--schemes", "nd", "--d-values", "5"],
        capsys,
    )
    assert status == EXIT_OK
    assert (target / "paraxial.csv").exists()


def test_bad_scheme_flag_exits_1(desk_config, capsys, tmp_path):
    status, _, err = run_cli(
        ["paraxial", "--config", str(desk_config), "--schemes", "nd,xyz",
         "--out-dir", str(tmp_path)],
        capsys,
    )
    assert status == EXIT_CONFIG
    assert "xyz" in json.loads(err.strip().splitlines()[-1])["message"]
