"""Command-line contract: exit codes, CSV formats, determinism, config."""
import numpy as np
import pytest

from emverify.cli import CHECK_HEADER, SWEEP_HEADER, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_check_passes(capsys):
    code, out, _ = run(capsys, "check", "--a", "1", "--b", "2", "--grid", "6,2,6,2")
    assert code == 0
    assert "overall: PASS" in out
    assert "scalar curvature (median over grid): 24" in out


def test_check_invalid_params(capsys):
    code, _, err = run(capsys, "check", "--a", "2", "--b", "1")
    assert code == 2
    assert "require 0 < a < b" in err


def test_check_invalid_grid(capsys):
    code, _, err = run(capsys, "check", "--a", "1", "--b", "2", "--grid", "2,1,2,1")
    assert code == 2
    assert "grid" in err


def test_check_unreachable_tolerance(capsys):
    code, out, _ = run(
        capsys, "check", "--a", "1", "--b", "2", "--grid", "6,2,6,2",
        "--tol-jet", "1e-15",
    )
    assert code == 1
    assert "FAIL" in out


def test_check_csv_format(tmp_path, capsys):
    out_path = tmp_path / "report.csv"
    code, _, _ = run(
        capsys, "check", "--a", "1", "--b", "2", "--grid", "6,2,6,2",
        "--format", "csv", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().strip().splitlines()
    assert lines[0] == CHECK_HEADER
    names = [ln.split(",")[0] for ln in lines[1:]]
    assert {"closed", "coclosed", "energy", "matter", "scalar_constancy"} <= set(names)
    for ln in lines[1:]:
        parts = ln.split(",")
        assert len(parts) == 5
        assert parts[4] == "pass"
        float(parts[1]), float(parts[2]), float(parts[3])


def test_check_csv_deterministic(tmp_path, capsys):
    paths = [tmp_path / "r1.csv", tmp_path / "r2.csv"]
    for p, threads in zip(paths, ("1", "4")):
        code, _, _ = run(
            capsys, "check", "--a", "1", "--b", "2", "--grid", "6,2,6,2",
            "--format", "csv", "--out", str(p), "--threads", threads,
        )
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sweep_csv(tmp_path, capsys):
    out_path = tmp_path / "sweep.csv"
    code, _, _ = run(
        capsys, "sweep", "--ratio-min", "1.5", "--ratio-max", "8", "--steps", "4",
        "--residual-grid", "6,2,6,2", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().strip().splitlines()
    assert lines[0] == SWEEP_HEADER
    assert len(lines) == 5
    rows = [list(map(float, ln.split(","))) for ln in lines[1:]]
    ratios = [r[0] for r in rows]
    yamabe = [r[5] for r in rows]
    assert ratios == sorted(ratios)
    assert all(b > a for a, b in zip(yamabe, yamabe[1:]))
    assert all(r[7] < 1e-5 for r in rows)


def test_sweep_single_ratio(capsys):
    code, out, _ = run(
        capsys, "sweep", "--ratio-min", "2", "--ratio-max", "2", "--steps", "1",
        "--residual-grid", "6,2,6,2",
    )
    assert code == 0
    row = out.strip().splitlines()[1].split(",")
    assert abs(float(row[5]) - 54.292956) < 1e-4  # 8 pi sqrt(42)/3
    assert float(row[1]) == 24.0


def test_sweep_rejects_empty_or_bad_range(capsys):
    code, _, err = run(capsys, "sweep", "--ratio-min", "0.5", "--ratio-max", "2")
    assert code == 2
    code, _, _ = run(capsys, "sweep", "--ratio-min", "3", "--ratio-max", "2")
    assert code == 2
    code, _, _ = run(capsys, "sweep", "--steps", "0")
    assert code == 2


def test_identities_pass(capsys):
    code, out, _ = run(capsys, "identities", "--seed", "7", "--samples", "300")
    assert code == 0
    assert "overall: PASS" in out
    assert "leibniz_divergence" in out


def test_identities_negative_control(capsys):
    code, out, _ = run(
        capsys, "identities", "--seed", "7", "--samples", "300",
        "--flip-codifferential-sign",
    )
    assert code == 1
    assert "FAIL" in out
    # exactly the convention-sensitive identities break
    failing = [ln.split()[0] for ln in out.splitlines() if "FAIL" in ln]
    assert "codifferential_two_routes" in failing
    assert "leibniz_divergence" in failing


def test_print_config(capsys):
    code, out, _ = run(capsys, "check", "--a", "1.5", "--print-config")
    assert code == 0
    cfg = dict(ln.split("=", 1) for ln in out.strip().splitlines())
    assert cfg["a"] == "1.5"
    assert cfg["b"] == "2.0"
    assert "grid" in cfg and "threads" in cfg


def test_config_file_precedence(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("a = 1.2\nb = 3.0  # comment\ngrid = 6,2,6,2\n")
    code, out, _ = run(capsys, "check", "--config", str(cfg_file), "--b", "2.5",
                       "--print-config")
    assert code == 0
    cfg = dict(ln.split("=", 1) for ln in out.strip().splitlines())
    assert cfg["a"] == "1.2"   # from file
    assert cfg["b"] == "2.5"   # flag wins
    assert cfg["grid"] == "6,2,6,2"


def test_config_file_unknown_key(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("nonsense = 1\n")
    code, _, err = run(capsys, "check", "--config", str(cfg_file))
    assert code == 2
    assert "nonsense" in err


def test_threads_env_override(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("EMVERIFY_THREADS", "3")
    code, out, _ = run(capsys, "check", "--print-config")
    assert code == 0
    assert "threads=3" in out
    monkeypatch.delenv("EMVERIFY_THREADS")


def test_usage_error_exit_code(capsys):
    assert main(["no-such-command"]) == 2
    assert main([]) == 2
