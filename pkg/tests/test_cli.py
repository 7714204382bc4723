import csv
import json

import numpy as np
import pytest

from aisepred.cli import main
from aisepred.harness import ExperimentConfig, run_experiment
from aisepred.oracles import compute_goldens
from aisepred.scenarios import truth_arrays


def write_csv(path, t, columns):
    with open(path, "w", newline="") as fh:
        fh.write("t," + ",".join(columns) + "\n")
        for i in range(len(t)):
            row = [t[i]] + [columns[name][i] for name in columns]
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_columns(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    return header, rows


def test_differentiate_constant_column(tmp_path):
    t = np.arange(300) * 0.01
    write_csv(tmp_path / "in.csv", t, {"x": np.full(300, 7.5)})
    out = tmp_path / "out.csv"
    assert main(["differentiate", str(tmp_path / "in.csv"), "--order", "1",
                 "--out", str(out)]) == 0
    header, rows = read_columns(out)
    assert header == ["t", "dx"]
    assert len(rows) == 300
    assert abs(float(rows[-1][1])) < 1e-4


def test_differentiate_ramp_tracks_slope(tmp_path):
    t = np.arange(2500) * 0.01
    write_csv(tmp_path / "in.csv", t, {"x": 2.0 * t})
    out = tmp_path / "out.csv"
    assert main(["differentiate", str(tmp_path / "in.csv"), "--out", str(out)]) == 0
    _, rows = read_columns(out)
    assert abs(float(rows[-1][1]) - 2.0) / 2.0 < 0.1


def test_differentiate_matches_harness_trace_bit_exact(tmp_path):
    # The same measurement stream through the CLI reproduces the harness's
    # velocity-estimate column byte for byte.
    cfg = ExperimentConfig(scenario="helical", n_steps=400, k0=200, horizon=50,
                           seed=7, methods=("aise-va",))
    run_experiment(cfg, out_dir=tmp_path / "exp")
    header, rows = read_columns(tmp_path / "exp" / "trace.csv")
    t_idx, mx_idx, vx_idx = header.index("t"), header.index("mx"), header.index("aise_vx")
    with open(tmp_path / "in.csv", "w") as fh:
        fh.write("t,x\n")
        for row in rows:
            fh.write(f"{row[t_idx]},{row[mx_idx]}\n")
    out = tmp_path / "out.csv"
    assert main(["differentiate", str(tmp_path / "in.csv"), "--order", "1",
                 "--out", str(out)]) == 0
    _, drows = read_columns(out)
    assert [r[1] for r in drows] == [r[vx_idx] for r in rows]


def test_differentiate_malformed_csv_exit_code(tmp_path, capsys):
    (tmp_path / "bad.csv").write_text("t,x\n0.0,1.0\n0.01,zzz\n")
    assert main(["differentiate", str(tmp_path / "bad.csv")]) == 2
    assert "line 3" in capsys.readouterr().err


def test_predict_subcommand(tmp_path):
    t_s = 0.01
    P, _, _, _ = truth_arrays("helical", 500, t_s)
    write_csv(tmp_path / "in.csv", np.arange(501) * t_s,
              {"x": P[:, 0], "y": P[:, 1], "z": P[:, 2]})
    out = tmp_path / "pred.csv"
    assert main(["predict", str(tmp_path / "in.csv"), "--method", "aise-fs",
                 "--horizon", "40", "--out", str(out)]) == 0
    header, rows = read_columns(out)
    assert header == ["l", "x", "y", "z"]
    assert len(rows) == 40
    assert all(np.isfinite(float(v)) for v in rows[-1])


def test_experiment_cli_with_flags(tmp_path, capsys):
    code = main([
        "experiment", "--scenario", "parabolic", "--n-steps", "320",
        "--k0", "150", "--horizon", "60", "--seed", "2", "--sigma", "0",
        "--truth-derivatives", "--methods", "aise-va,aise-fs",
        "--out-dir", str(tmp_path),
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "AISE/va" in out and "AISE/FS" in out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["scenario"] == "parabolic"
    assert report["methods"]["AISE/va"]["rmse_x"] < 1e-9


def test_experiment_cli_config_file_with_override(tmp_path):
    config = {
        "schema_version": 1,
        "scenario": "helical",
        "n_steps": 320,
        "k0": 150,
        "horizon": 60,
        "seed": 1,
        "sigma": 0.0,
        "methods": ["aise-va"],
        "truth_derivatives": True,
    }
    cfg_path = tmp_path / "config.json"
    cfg_path.write_text(json.dumps(config))
    out_dir = tmp_path / "run"
    assert main(["experiment", "--config", str(cfg_path), "--seed", "9",
                 "--out-dir", str(out_dir)]) == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["seed"] == 9  # flag overrides file


def test_experiment_rejects_unknown_flag():
    with pytest.raises(SystemExit):
        main(["experiment", "--scenario", "helical", "--turbo"])


def test_experiment_invalid_config_is_error(capsys):
    assert main(["experiment", "--scenario", "helical", "--n-steps", "100",
                 "--k0", "90", "--horizon", "60"]) == 2
    assert "k0 + horizon" in capsys.readouterr().err


def test_goldens_regeneration_matches_checked_in(tmp_path):
    out = tmp_path / "goldens.json"
    assert main(["goldens", "--out", str(out)]) == 0
    fresh = json.loads(out.read_text())
    import pathlib

    stored = json.loads((pathlib.Path(__file__).parent / "goldens.json").read_text())
    assert fresh["abg"] == pytest.approx(stored["abg"])
    assert fresh["helix"] == pytest.approx(stored["helix"])
    assert fresh["gamma0_series"]["max_abs_error"] < 1e-9
    assert fresh["gamma1_quadrature"]["max_abs_error"] < 1e-8


def test_compute_goldens_deterministic():
    a = compute_goldens()
    b = compute_goldens()
    assert a == b
