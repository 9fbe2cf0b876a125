import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from procrustes_povm.cli import (
    CLIError,
    config_json_schema,
    gray_levels,
    main,
    parse_config,
    read_pgm,
    run,
    write_heatmap,
    write_table,
)

SCHEMA_FILE = Path(__file__).resolve().parents[1] / "src" / "procrustes_povm" / "schema" / "config.schema.json"


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def cli(tmp_path, command, parameters, *extra, name="cfg.json", **doc):
    cfg = tmp_path / name
    cfg.write_text(json.dumps({"parameters": parameters, **doc}))
    out = tmp_path / f"out_{command}_{name}"
    return main([command, "--config", str(cfg), "--out", str(out), *extra]), out


# ---------------------------------------------------------------- writers


def test_write_table_bit_exact(tmp_path):
    write_table([(0.5, 1.0)], ["a", "b"], tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_bytes() == b"a,b\n0.5,1\n"


def test_write_table_header_only_and_width_check(tmp_path):
    write_table([], ["x", "y", "z"], tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_bytes() == b"x,y,z\n"
    with pytest.raises(CLIError):
        write_table([(1, 2)], ["x"], tmp_path / "bad.csv")


def test_write_table_round_trips_doubles(tmp_path):
    vals = [math.pi, -0.0, 1e-300, 2.0**0.5]
    write_table([vals], ["a", "b", "c", "d"], tmp_path / "d.csv")
    row = read_csv(tmp_path / "d.csv")[0]
    assert [float(row[k]) for k in "abcd"] == [math.pi, 0.0, 1e-300, 2.0**0.5]
    assert row["b"] == "0"


def test_heatmap_corners(tmp_path):
    arts, warnings = write_heatmap([[0, 1], [1, 0]], (0, 1), tmp_path / "h.pgm")
    g = read_pgm(tmp_path / "h.pgm")
    assert g.tolist() == [[0, 255], [255, 0]] and warnings == []
    side = read_csv(tmp_path / "h_values.csv")
    assert len(side) == 4 and float(side[1]["value"]) == 1.0
    write_heatmap([[0, 1], [1, 0]], (0, 1), tmp_path / "h16.pgm", bits=16)
    assert read_pgm(tmp_path / "h16.pgm").max() == 65535


def test_heatmap_constant_matrix_mid_gray(tmp_path):
    _, warnings = write_heatmap(np.full((3, 4), 0.7), None, tmp_path / "c.pgm")
    g = read_pgm(tmp_path / "c.pgm")
    assert g.shape == (3, 4) and np.all(g == 128) and len(warnings) == 1


def test_gray_levels_errors():
    with pytest.raises(CLIError):
        gray_levels([[np.nan]])
    with pytest.raises(CLIError):
        gray_levels([1, 2])


# ---------------------------------------------------------------- config


def test_unknown_key_rejected(tmp_path):
    status, out = cli(tmp_path, "mbqc", {"n_logical": 1, "depth_k": 1, "lattice_L": 1, "alpah": 0.5})
    assert status == 2
    err = json.loads((out / "error.json").read_text())
    assert "alpah" in err["message"]


def test_parse_config_deg_equals_rad():
    a = parse_config("distill", {"angle_unit": "deg", "parameters": {"phi": 30, "gamma": 90}})
    b = parse_config("distill", {"parameters": {"phi": math.pi / 6, "gamma": math.pi / 2}})
    assert a.parameters.phi == pytest.approx(b.parameters.phi, abs=1e-15)
    assert a.parameters.gamma == pytest.approx(b.parameters.gamma, abs=1e-15)
    with pytest.raises(CLIError):
        parse_config("distill", {"command": "ghz", "parameters": {"phi": 0.3}})
    with pytest.raises(CLIError):
        parse_config("distill", {"parameters": {"gamma": 0.3}})
    with pytest.raises(CLIError):
        parse_config("teleport", {})


def test_seed_precedence():
    assert parse_config("mbqc", {"seed": 5, "parameters": {"n_logical": 1, "depth_k": 1, "lattice_L": 1,
                                                             "alpha": 0.5}}, seed=9).seed == 9


def test_schema_file_in_sync():
    on_disk = json.loads(SCHEMA_FILE.read_text())
    assert on_disk == json.loads(json.dumps(config_json_schema()))


# ---------------------------------------------------------------- commands


def test_distill_reference_state(tmp_path):
    status, out = cli(tmp_path, "distill", {"phi": 30, "gamma": 90}, angle_unit="deg")
    assert status == 0
    rows = {r["branch"]: r for r in read_csv(out / "distill.csv")}
    assert float(rows["p1"]["probability"]) == pytest.approx(0.5, abs=1e-12)
    assert float(rows["p1"]["entropy"]) == pytest.approx(1.0, abs=1e-9)
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config"]["parameters"]["phi"] == pytest.approx(math.pi / 6)
    assert {a["path"] for a in meta["artifacts"]} >= {"distill.csv", "povm.csv", "metadata.json"}


def test_ghz_command(tmp_path):
    status, out = cli(tmp_path, "ghz", {"phi": 0.4, "gamma": 0.2, "n_values": [2, 5]})
    rows = read_csv(out / "ghz.csv")
    assert status == 0 and [r["n"] for r in rows] == ["2", "5"]
    assert rows[0]["p1_probability"] == rows[1]["p1_probability"]


def test_sweep_identity_cell(tmp_path):
    status, out = cli(tmp_path, "sweep", {"phi_axis": [math.pi / 4], "S_in_axis": [1.0], "sigma": 0.0, "size": 10})
    assert status == 0
    (row,) = read_csv(out / "sweep.csv")
    assert float(row["delta_S"]) == pytest.approx(0.0, abs=1e-15)
    assert json.loads((out / "metadata.json").read_text())["warnings"]


def test_sweep_cell_count_and_image_shape(tmp_path):
    p = {"phi_axis": {"start": 0.0, "stop": 0.7, "num": 4}, "S_in_axis": {"start": 0.2, "stop": 0.8, "num": 3},
         "sigma": 0.01, "size": 50}
    status, out = cli(tmp_path, "sweep", p)
    assert status == 0
    assert len(read_csv(out / "sweep.csv")) == 3 * 4
    assert read_pgm(out / "sweep_delta_S.pgm").shape == (3, 4)
    assert len(read_csv(out / "sweep_locus.csv")) == 3


def test_sweep_reproducible(tmp_path):
    p = {"phi_axis": {"start": 0.0, "stop": 0.7, "num": 5}, "S_in_axis": [0.3, 0.6], "sigma": 0.02, "size": 200}
    _, a = cli(tmp_path, "sweep", p, "--seed", "42", name="a.json")
    _, b = cli(tmp_path, "sweep", p, "--seed", "42", name="b.json")
    _, c = cli(tmp_path, "sweep", p, "--seed", "43", name="c.json")
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    assert (a / "sweep.csv").read_bytes() != (c / "sweep.csv").read_bytes()


def test_mbqc_unit_case(tmp_path):
    status, out = cli(tmp_path, "mbqc", {"n_logical": 1, "depth_k": 1, "lattice_L": 1, "alpha": 1 / math.sqrt(2)})
    (row,) = read_csv(out / "mbqc.csv")
    assert status == 0 and row["ghz_count"] == "1" and row["ensemble_size"] == "4"


def test_ensemble_histogram_mass(tmp_path):
    status, out = cli(tmp_path, "ensemble", {"mean_alpha2": 0.8, "sigma": 0.05, "size": 2000, "phi": 0.5,
                                             "bins": 40})
    (row,) = read_csv(out / "ensemble.csv")
    assert status == 0
    assert float(row["out_mass"]) == pytest.approx(float(row["survival_fraction"]), abs=1e-12)
    assert len(read_csv(out / "ensemble_histograms.csv")) == 40


def test_runtime_error_writes_error_json(tmp_path):
    status, out = cli(tmp_path, "ghz", {"phi": 0.4, "n_values": [2], "target": 3})
    assert status == 1
    err = json.loads((out / "error.json").read_text())
    assert err["command"] == "ghz" and "target" in err["message"]
    assert not (out / "metadata.json").exists()


def test_tdse_small_run(tmp_path):
    cfg = parse_config("tdse", {"parameters": {"phi": math.pi / 4, "dx": 0.2, "hold_time": 0.2,
                                               "snapshot_every": 400}}, output_dir=tmp_path / "td")
    status, arts = run(cfg)
    out = tmp_path / "td"
    assert status == 0
    (row,) = read_csv(out / "tdse_summary.csv")
    assert float(row["p1_fidelity"]) >= 0.99
    snaps = read_csv(out / "snapshots.csv")
    arr = np.load(out / "snapshots" / snaps[-1]["file"])
    assert arr.shape == (int(row["nx"]), int(row["ny"]), 2, 2)
    assert read_pgm(out / "tdse_final_density.pgm").shape == (int(row["nx"]), int(row["ny"]))
