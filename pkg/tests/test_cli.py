import csv
import json

import numpy as np
import pytest

from besovflux.cli import main
from besovflux.io import read_tfld


def _csv_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.reader(lines))


def test_generate_is_byte_identical(tmp_path):
    outs = []
    for name in ("a", "b"):
        assert main(["generate", "--n", "32", "--seed", "11", "--out", str(tmp_path / name)]) == 0
        outs.append((tmp_path / name / "field.tfld").read_bytes())
    assert outs[0] == outs[1]
    f = read_tfld(tmp_path / "a" / "field.tfld")
    assert f.values.shape == (2, 32, 32)
    meta = json.loads((tmp_path / "a" / "field.json").read_text())["provenance"]
    assert set(meta) == {"tool_version", "config_hash", "seed"} and meta["seed"] == 11


def test_fluxscan_planted_field(tmp_path):
    assert main(["fluxscan", "--p", "3", "--kind", "energy_LP", "--out", str(tmp_path)]) == 0
    rows = _csv_rows(tmp_path / "flux.csv")
    assert rows[0] == ["N", "value"]
    assert len(rows) - 1 > 4
    body = json.loads((tmp_path / "flux.json").read_text())
    assert body["field"]["planted_dj"][-1] < body["field"]["planted_dj"][0]
    assert body["series"]["slope"]["slope"] < 0


def test_norms_and_input_file(tmp_path):
    main(["generate", "--n", "32", "--seed", "2", "--out", str(tmp_path / "g")])
    field = str(tmp_path / "g" / "field.tfld")
    assert main(["norms", "--input", field, "--p", "3", "--q", "cnat", "--out", str(tmp_path / "n")]) == 0
    rows = _csv_rows(tmp_path / "n" / "norms.csv")
    assert rows[0] == ["j", "d_j"] and len(rows) > 3


def test_mollscan_needs_ladder_on_small_grid(tmp_path, capsys):
    assert main(["mollscan", "--n", "64", "--out", str(tmp_path)]) == 2
    assert "ladder" in capsys.readouterr().err
    code = main(["mollscan", "--n", "64", "--ladder", "0.75:0.4:1.1", "--out", str(tmp_path)])
    assert code == 0
    assert _csv_rows(tmp_path / "mollscan.csv")[0] == ["eps", "difference", "derivative", "commutator"]


def test_simulate_outputs(tmp_path):
    code = main(["simulate", "--n", "32", "--generator", "smooth", "--T", "0.04", "--dt", "0.01", "--out", str(tmp_path)])
    assert code == 0
    assert sorted(p.name for p in tmp_path.glob("snap_*.tfld")) == ["snap_000001.tfld", "snap_000002.tfld"]
    rows = _csv_rows(tmp_path / "budgets.csv")
    assert rows[0] == ["step", "t", "energy", "enstrophy"] and len(rows) == 6
    run = json.loads((tmp_path / "run.json").read_text())
    assert len(run["cfl"]) == 4 and run["config"]["seed"] == 0


def test_simulate_cfl_violation_is_config_error(tmp_path, capsys):
    code = main(["simulate", "--n", "64", "--generator", "smooth", "--T", "0.5", "--dt", "0.5", "--out", str(tmp_path)])
    assert code == 2
    assert "try dt" in capsys.readouterr().err


def test_exit_codes(tmp_path):
    assert main(["norms", "--p", "5", "--out", str(tmp_path)]) == 2
    assert main(["norms", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 3
    assert main(["norms", "--input", str(tmp_path / "nope.tfld"), "--out", str(tmp_path)]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text('{"unknown_key": 1}')
    assert main(["generate", "--config", str(bad), "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_config_file_and_flags(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dim": 3, "n": 16, "generator": "abc", "kind": "helicity_LP", "p": 2.5}))
    assert main(["fluxscan", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    values = [float(r[1]) for r in _csv_rows(tmp_path / "o" / "flux.csv")[1:]]
    assert np.abs(values).max() <= 1e-9


def test_report_bundle(tmp_path):
    main(["generate", "--n", "32", "--out", str(tmp_path)])
    main(["norms", "--n", "32", "--out", str(tmp_path)])
    assert main(["report", "--out", str(tmp_path)]) == 0
    bundle = json.loads((tmp_path / "bundle.json").read_text())
    assert set(bundle["files"]) == {"field.json", "norms.json", "norms.csv"}
    rows = _csv_rows(tmp_path / "bundle.csv")
    assert rows[0] == ["file", "format", "entries", "config_hash"]
    assert main(["report", "--out", str(tmp_path / "absent")]) == 3


def test_verify_subset_and_failure(tmp_path, monkeypatch, capsys):
    assert main(["verify", "--only", "7", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "verify.json").read_text())
    assert summary["total"] == summary["passed"] == 5
    import besovflux.verify as vf

    broken = dict(vf.CRITERIA)
    broken[7] = ("gamma", lambda: [vf.Check(7, "forced", False, 1.0, 0.0)])
    monkeypatch.setattr(vf, "CRITERIA", broken)
    assert main(["verify", "--only", "7", "--out", str(tmp_path)]) == 1
    assert "FAIL" in capsys.readouterr().out
