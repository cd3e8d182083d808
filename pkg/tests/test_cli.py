import csv
import io
import json
import math

import numpy as np
import pytest

from entclone.analytic import ALPHA_MAX, fidelity_bh, fidelity_global, fidelity_locc
from entclone.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def test_sweep_analytic_csv(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--alpha-min", "0", "--alpha-max", "max", "--steps", "5",
        "--modes", "global,bh,locc", "--format", "csv",
    )
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["alpha", "f_global", "f_bh", "f_locc", "error"]
    assert len(rows) == 5
    for row in rows:
        alpha = float(row[0])
        assert float(row[1]) == fidelity_global(alpha)
        assert float(row[2]) == fidelity_bh(alpha)
        assert float(row[3]) == fidelity_locc(alpha)
        assert row[4] == ""
    assert float(rows[0][0]) == 0.0
    assert abs(float(rows[-1][0]) - ALPHA_MAX) < 1e-15
    assert abs(float(rows[-1][3]) - 0.625) < 1e-15


def test_sweep_single_point(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--alpha-min", "0", "--alpha-max", "0", "--steps", "1",
        "--modes", "bh", "--format", "csv",
    )
    assert code == 0
    _, rows = parse_csv(out)
    assert len(rows) == 1
    assert abs(float(rows[0][1]) - 25.0 / 36.0) < 1e-15


def test_sweep_json_metadata(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--alpha-min", "0.1", "--alpha-max", "0.3", "--steps", "3",
        "--modes", "global", "--format", "json", "--seed", "11",
    )
    assert code == 0
    payload = json.loads(out)
    assert set(payload) == {"metadata", "records"}
    meta = payload["metadata"]
    assert set(meta) == {"version", "seed", "tol", "sign_convention"}
    assert meta["seed"] == 11
    assert len(payload["records"]) == 3
    assert payload["records"][0]["alpha"] == 0.1


def test_sweep_mode_order_is_canonical(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--alpha-min", "0.2", "--alpha-max", "0.2", "--steps", "1",
        "--modes", "locc,global", "--format", "csv",
    )
    assert code == 0
    header, _ = parse_csv(out)
    assert header == ["alpha", "f_global", "f_locc", "error"]


def test_sweep_with_solver_column(capsys):
    code, out, err = run_cli(
        capsys, "sweep", "--alpha-min", "0.1", "--alpha-max", "0.5", "--steps", "2",
        "--modes", "sdp", "--format", "csv",
    )
    assert code == 0
    header, rows = parse_csv(out)
    assert header == ["alpha", "f_sdp", "error"]
    assert abs(float(rows[0][1]) - fidelity_global(0.1)) < 1e-5
    assert abs(float(rows[1][1]) - fidelity_global(0.5)) < 1e-5
    assert "kink" not in err


def test_sweep_reports_missing_kink(capsys):
    code, _, err = run_cli(
        capsys, "sweep", "--alpha-min", "0.31", "--alpha-max", "0.316", "--steps", "4",
        "--modes", "sdp-ppt", "--format", "csv",
    )
    assert code == 0
    assert "kink detection skipped" in err


def test_sweep_solver_failure_sets_error_column(capsys):
    code, out, _ = run_cli(
        capsys, "sweep", "--alpha-min", "0.2", "--alpha-max", "0.4", "--steps", "2",
        "--modes", "sdp", "--format", "csv", "--tol", "1e-30",
    )
    assert code == 3
    _, rows = parse_csv(out)
    assert rows[0][2] != ""


def test_sweep_byte_identical_reruns(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for path in paths:
        code, _, _ = run_cli(
            capsys, "sweep", "--alpha-min", "0", "--alpha-max", "max", "--steps", "20",
            "--modes", "global,bh,locc", "--format", "csv", "--out", str(path),
        )
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_params_below_threshold(capsys):
    code, out, _ = run_cli(capsys, "params", "--alpha-min", "0.1", "--alpha-max", "0.1", "--steps", "1", "--format", "csv")
    assert code == 0
    header, rows = parse_csv(out)
    record = dict(zip(header, rows[0]))
    assert float(record["a22"]) == 1.0
    for label in ("a11", "a12", "a21", "a44"):
        assert record[label] == ""


def test_params_above_threshold(capsys):
    code, out, _ = run_cli(capsys, "params", "--alpha-min", "0.6", "--alpha-max", "0.6", "--steps", "1", "--format", "csv")
    assert code == 0
    header, rows = parse_csv(out)
    record = dict(zip(header, rows[0]))
    a11 = float(record["a11"])
    a22 = float(record["a22"])
    assert a11 > 0.0
    assert abs(float(record["a12"]) - math.sqrt(a11 * a22)) < 1e-12
    assert record["a12"] == record["a21"] == record["a44"]
    total = a11 + a22 + float(record["a12"]) + float(record["a21"])
    assert abs(total - 1.0) < 1e-12


def test_protocol_command_csv(capsys):
    code, out, _ = run_cli(capsys, "protocol", "--alpha", "max", "--trials", "0", "--format", "csv")
    assert code == 0
    header, rows = parse_csv(out)
    assert header[:5] == ["kind", "alice_outcome", "classical_bit", "bob_outcome", "probability"]
    branch_rows = [r for r in rows if r[0] == "branch"]
    assert len(branch_rows) == 8
    probs = [float(r[4]) for r in branch_rows]
    assert abs(sum(probs) - 1.0) < 1e-12
    exact_rows = [r for r in rows if r[0] == "exact"]
    assert len(exact_rows) == 1
    fidelity = float(exact_rows[0][header.index("fidelity")])
    assert abs(fidelity - 0.625) < 1e-12
    assert not any(r[0] == "sampled" for r in rows)


def test_protocol_command_sampled_json(capsys):
    code, out, _ = run_cli(capsys, "protocol", "--alpha", "0.2", "--trials", "5000", "--seed", "5", "--format", "json")
    assert code == 0
    records = json.loads(out)["records"]
    kinds = [r["kind"] for r in records]
    assert kinds.count("branch") == 8
    assert kinds.count("exact") == 1
    assert kinds.count("sampled") == 1
    exact = next(r for r in records if r["kind"] == "exact")
    assert abs(exact["fidelity"] - fidelity_bh(0.2)) < 1e-12
    sampled = next(r for r in records if r["kind"] == "sampled")
    assert abs(sampled["fidelity"] - exact["fidelity"]) < 5.0 * sampled["stderr"]
    bits = {r["classical_bit"]: [] for r in records if r["kind"] == "branch"}
    for r in records:
        if r["kind"] == "branch":
            bits[r["classical_bit"]].append(r["probability"])
    assert np.abs(np.sort(bits[0]) - np.sort(bits[1])).max() < 1e-12


def test_env_seed_is_honored(capsys, monkeypatch):
    monkeypatch.setenv("CLONER_SEED", "99")
    code, out, _ = run_cli(
        capsys, "sweep", "--alpha-min", "0", "--alpha-max", "0", "--steps", "1",
        "--modes", "bh", "--format", "json",
    )
    assert code == 0
    assert json.loads(out)["metadata"]["seed"] == 99


def test_env_seed_rejects_garbage(capsys, monkeypatch):
    monkeypatch.setenv("CLONER_SEED", "pi")
    code, _, err = run_cli(capsys, "sweep", "--alpha-min", "0", "--alpha-max", "0", "--steps", "1", "--modes", "bh")
    assert code == 2
    assert err != ""


def test_seed_flag_overrides_env(capsys, monkeypatch):
    monkeypatch.setenv("CLONER_SEED", "99")
    code, out, _ = run_cli(
        capsys, "sweep", "--alpha-min", "0", "--alpha-max", "0", "--steps", "1",
        "--modes", "bh", "--format", "json", "--seed", "3",
    )
    assert code == 0
    assert json.loads(out)["metadata"]["seed"] == 3


@pytest.mark.parametrize(
    "argv",
    [
        ("sweep", "--alpha-min", "0.5", "--alpha-max", "0.2", "--steps", "3"),
        ("sweep", "--alpha-min", "0", "--alpha-max", "0.9", "--steps", "3"),
        ("sweep", "--alpha-min", "0", "--alpha-max", "0.5", "--steps", "0"),
        ("sweep", "--modes", "bogus"),
        ("sweep", "--alpha-min", "nope"),
        ("params", "--steps", "-2"),
        ("protocol", "--alpha", "0.3", "--trials", "-1"),
        ("protocol", "--alpha", "2.0"),
        ("bogus-command",),
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code = main(list(argv))
    capsys.readouterr()
    assert code == 2


def test_verify_rejects_unattainable_tolerance(capsys):
    code, out, _ = run_cli(capsys, "verify", "--tol", "1e-30")
    assert code == 1
    assert "[FAIL]" in out
