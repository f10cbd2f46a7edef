"""Command-line contract: output, exit codes, report determinism."""

import json

import numpy as np
import pytest

from qmaplab import cli

FAST = "points=4,psk_points=8,triples=40,elements=4,isometry_points=3,killing_points=1,curvature_points=2,pairs=2"


def test_describe_dimensions(capsys):
    assert cli.main(["describe", "--model", "E1"]) == 0
    out = capsys.readouterr().out
    assert "m=1, n=2, dim Nbar=8" in out
    assert "kappa = 2" in out
    assert cli.main(["describe", "--model", "E2"]) == 0
    out = capsys.readouterr().out
    assert "m=3, n=4, dim Nbar=16" in out


def test_describe_bad_file_exit_2(capsys):
    assert cli.main(["describe", "--model", "/no/such/file.json"]) == 2


def test_check_passes(capsys, tmp_path):
    out = tmp_path / "report.json"
    code = cli.main(["check", "--model", "E1", "--c", "0.3", "--seed", "4",
                     "--samples", FAST, "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    names = [s["suite"] for s in report["suites"]]
    assert names == ["cask", "rigid-cmap", "moment", "group",
                     "twist[c=0.3]", "killing[c=0.3]"]
    assert all(s["status"] == "PASS" for s in report["suites"])
    text = capsys.readouterr().out
    assert "PASS" in text and "elapsed" in text


def test_check_quick_skips_heavy(tmp_path):
    out = tmp_path / "r.json"
    code = cli.main(["check", "--model", "E1", "--quick", "--seed", "1",
                     "--samples", FAST, "--out", str(out)])
    assert code == 0
    names = [s["suite"] for s in json.loads(out.read_text())["suites"]]
    assert names == ["cask", "rigid-cmap", "moment", "group"]


def test_tolerance_override_forces_failure(tmp_path):
    code = cli.main(["check", "--model", "E1", "--quick", "--seed", "1",
                     "--samples", FAST, "--tol-cask", "1e-30"])
    assert code == 1


def test_curvature_report_and_csv(tmp_path, capsys):
    out = tmp_path / "curv.json"
    code = cli.main(["curvature", "--model", "E1", "--c", "0,0.3", "--seed", "2",
                     "--samples", "curvature_points=2", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert len(report["curvature_table"]) == 4
    csv_text = (tmp_path / "curv.csv").read_text().splitlines()
    assert csv_text[0].startswith("c,point,scal,kretschmann")
    assert len(csv_text) == 5


def test_isometry_reports_are_byte_identical(tmp_path):
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    args = ["isometry", "--model", "E1", "--c", "0.3", "--seed", "3",
            "--samples", "elements=4,isometry_points=3"]
    assert cli.main(args + ["--out", str(p1)]) == 0
    assert cli.main(args + ["--out", str(p2)]) == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_corrupted_model_file_fails(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "name": "bad", "m": 1, "k": [[0, 0, 0, -6.0]],
        "domain_id": "positive_orthant"}))
    code = cli.main(["check", "--model", str(bad), "--quick", "--seed", "0",
                     "--samples", FAST])
    assert code in (1, 2)


def test_bad_samples_argument(tmp_path):
    assert cli.main(["check", "--model", "E1", "--samples", "nonsense"]) == 2
    assert cli.main(["check", "--model", "E1", "--c", "-1"]) == 2
