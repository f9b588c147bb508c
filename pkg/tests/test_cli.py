import csv
import io
import json

import pytest

from qszilard.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    header = [ln for ln in text.splitlines() if ln.startswith("#")]
    body = "\n".join(ln for ln in text.splitlines() if not ln.startswith("#"))
    rows = list(csv.DictReader(io.StringIO(body)))
    return header, rows


def test_work_single_particle(capsys):
    code, out, _ = run_cli(capsys, "work", "--n", "1", "--g", "0", "--t", "1", "--ins", "0.5")
    assert code == 0
    assert "ratio          = 1.000000" in out
    assert "# version=" in out


def test_work_convergence_failure_exit_code(capsys, tmp_path):
    code, out, err = run_cli(
        capsys,
        "work",
        "--n", "2", "--g", "-0.5", "--t", "0.3",
        "--tol", "1e-18", "--modes", "8", "--rem-grid", "11",
        "--cache-dir", str(tmp_path),
    )
    assert code == 2
    assert "convergence" in err


def test_scan_csv_columns_and_determinism(capsys):
    args = (
        "scan", "--n", "2", "--g", "0", "--baseline", "ideal-bose",
        "--t-range", "0.05:0.5:4",
    )
    code, out1, _ = run_cli(capsys, *args)
    assert code == 0
    code, out2, _ = run_cli(capsys, *args)
    assert out1 == out2  # byte-identical reruns
    header, rows = parse_csv(out1)
    assert any(ln.startswith("# baseline=ideal-bose") for ln in header)
    assert any(ln.startswith("# version=") for ln in header)
    assert len(rows) == 4
    expected_cols = {
        "value", "t_e1", "ratio", "w_insert", "w_expand", "w_remove", "w_total",
        "info", "p0", "p1", "p2", "rem0", "rem1", "rem2", "converged", "note",
    }
    assert set(rows[0]) == expected_cols
    assert all(r["converged"] == "true" for r in rows)
    assert float(rows[0]["ratio"]) == pytest.approx(1.0566, abs=1e-3)


def test_scan_json_mirror(capsys):
    code, out, _ = run_cli(
        capsys,
        "scan", "--n", "1", "--g", "0", "--baseline", "ideal-bose",
        "--t-range", "0.1:0.3:3", "--format", "json",
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["config"]["baseline"] == "ideal-bose"
    assert len(payload["rows"]) == 3
    assert payload["rows"][0]["ratio"] == "1"


def test_scan_requires_exactly_one_range(capsys):
    with pytest.raises(SystemExit):
        main(["scan", "--n", "1", "--t", "1"])


def test_scan_exit_code_on_unconverged_points(capsys, tmp_path):
    code, out, _ = run_cli(
        capsys,
        "scan", "--n", "2", "--g", "-0.5", "--t-range", "0.3:0.5:2",
        "--tol", "1e-18", "--modes", "8", "--rem-grid", "11",
        "--cache-dir", str(tmp_path),
    )
    assert code == 3
    _, rows = parse_csv(out)
    assert all(r["converged"] == "false" for r in rows)


def test_config_file_with_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("n = 1\ng = 0\nt = 1\nbaseline = ideal-bose\n# comment\n")
    code, out, _ = run_cli(capsys, "work", "--config", str(cfg))
    assert code == 0
    assert "# n=1" in out
    code, out, _ = run_cli(capsys, "work", "--config", str(cfg), "--t", "2")
    assert code == 0
    assert "# t=2\n" in out


def test_optimize_classical(capsys):
    code, out, _ = run_cli(capsys, "optimize", "--baseline", "classical", "--n", "4")
    assert code == 0
    assert "ratio      = 0.885896" in out


def test_optimize_insertion_free(capsys):
    code, out, _ = run_cli(
        capsys,
        "optimize", "--n", "2", "--g", "0", "--t", "0.2",
        "--baseline", "ideal-bose", "--ins-free",
    )
    assert code == 0
    _, rows = parse_csv(out)
    assert float(rows[0]["value"]) == pytest.approx(0.5, abs=1e-4)
    assert "maxima=" in rows[0]["note"]


def test_cache_lifecycle(capsys, tmp_path):
    store = str(tmp_path)
    code, out, _ = run_cli(capsys, "cache", "inspect", "--cache-dir", store)
    assert code == 0 and "entries = 0" in out

    # g = 0: the scaling law maps every wall position onto one unit-box key
    code, out, _ = run_cli(
        capsys,
        "cache", "prewarm", "--n", "2", "--g", "0", "--t", "0.4",
        "--cache-dir", store, "--rem-grid", "21",
    )
    assert code == 0
    code, out, _ = run_cli(capsys, "cache", "inspect", "--cache-dir", store)
    n_entries = int(out.splitlines()[1].split("=")[1])
    assert n_entries > 0

    # a scan against the warmed store performs no new diagonalizations,
    # hence creates no new keys (even golden refinement reuses g_eff = 0)
    code, _, _ = run_cli(
        capsys,
        "scan", "--n", "2", "--g", "0", "--t-range", "0.1:0.4:3",
        "--cache-dir", store,
    )
    assert code == 0
    code, out, _ = run_cli(capsys, "cache", "inspect", "--cache-dir", store)
    assert int(out.splitlines()[1].split("=")[1]) == n_entries

    code, out, _ = run_cli(capsys, "cache", "clear", "--cache-dir", store)
    assert code == 0 and "entries = 0" in out
    code, out, _ = run_cli(capsys, "cache", "inspect", "--cache-dir", store)
    assert "entries = 0" in out


def test_work_writes_table(capsys, tmp_path):
    out_path = tmp_path / "row.csv"
    code, _, _ = run_cli(
        capsys,
        "work", "--n", "1", "--g", "0", "--t", "1", "--baseline", "ideal-bose",
        "--out", str(out_path),
    )
    assert code == 0
    header, rows = parse_csv(out_path.read_text())
    assert len(rows) == 1
    assert float(rows[0]["ratio"]) == pytest.approx(1.0)
