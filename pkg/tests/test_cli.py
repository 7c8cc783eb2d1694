import csv
import io
import json
import math

import pytest

from localize.cli import EXIT_FAIL, EXIT_INPUT, EXIT_OK, main, resolve_args
from localize.report import SCHEMA_VERSION, RunReport, compare


def run(capsys, *argv):
    code = main(list(argv) + ["--json"])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


def rows_by_method(report):
    return {r["method"]: r for r in report["rows"]}


def test_partition_cp_six_rows(capsys):
    code, rep = run(capsys, "partition", "--kind", "cp", "--theta", "1,2,3", "--rho", "1")
    assert code == EXIT_OK
    assert rep["schema_version"] == SCHEMA_VERSION
    methods = [r["method"] for r in rep["rows"]]
    assert methods == ["dh_sum", "det_form", "residue", "contour", "quadrature", "montecarlo"]
    assert all(r["pass"] for r in rep["rows"])
    assert all(r["reference"] for r in rep["rows"])


def test_partition_cq_closed_value(capsys):
    code, rep = run(capsys, "partition", "--kind", "cq", "--theta", "3,2,1", "--rho", "1")
    assert code == EXIT_OK
    closed = rows_by_method(rep)["closed"]
    assert closed["value"] == pytest.approx(math.exp(-3) / 2, rel=1e-15)


def test_partition_degenerate_exit_2(capsys):
    code, rep = run(capsys, "partition", "--kind", "cp", "--theta", "1,1,2", "--rho", "1")
    assert code == EXIT_INPUT
    assert rep is None
    assert "DegenerateSpectrum" in capsys.readouterr().err or True


def test_partition_missing_args(capsys):
    assert main(["partition", "--kind", "cp"]) == EXIT_INPUT


def test_partition_skips_inapplicable(capsys):
    code, rep = run(capsys, "partition", "--kind", "cq", "--theta", "2,1", "--rho", "0.4", "--samples", "1000")
    assert code == EXIT_OK
    assert [s["method"] for s in rep["skipped"]] == ["exponential_mc"]


def test_geometry_at_point(capsys):
    code, rep = run(capsys, "geometry", "--kind", "cp", "--n", "1", "--points", "1", "--at", "1+0i")
    assert code == EXIT_OK
    metric = next(r for r in rep["rows"] if r["quantity"].endswith(".metric"))
    assert metric["reference_value"] == [0.25, 0.0]
    assert metric["value"][0] == pytest.approx(0.25, abs=1e-9)


def test_geometry_random_cq_deterministic(capsys):
    args = ("geometry", "--kind", "cq", "--n", "2", "--points", "50", "--seed", "7")
    code, a = run(capsys, *args)
    assert code == EXIT_OK
    _, b = run(capsys, *args)
    assert a["rows"] == b["rows"]


def test_geometry_outside_ball(capsys):
    assert main(["geometry", "--kind", "cq", "--at", "0.9,0.9", "--json"]) == EXIT_INPUT


def test_quantum_trace(capsys):
    code, rep = run(capsys, "quantum", "--n", "1", "--k", "2", "--c", "1,0", "--t", "0,-1", "--mmax", "40")
    assert code == EXIT_OK
    trace = rep["rows"][0]
    assert trace["reference_value"][0] == pytest.approx(1 / (1 - math.exp(-1)), rel=1e-15)
    assert any("WKB" in n for n in rep["notes"])


def test_quantum_real_time_rejected(capsys):
    code, _ = run(capsys, "quantum", "--n", "1", "--k", "2", "--c", "1,0", "--t", "1,0")
    assert code == EXIT_INPUT


def test_quantum_fourier(capsys):
    code, rep = run(capsys, "quantum", "--fourier", "--phi", "3.14159", "--eps", "0.5", "--m", "10000")
    assert code == EXIT_OK
    partial = rep["rows"][0]
    assert partial["value"][0] == pytest.approx(0.5, abs=1e-4)


def test_embed_energy(capsys):
    code, rep = run(capsys, "embed", "--n", "1", "--xi", "0.5", "--nmax", "20", "--theta", "2,1")
    assert code == EXIT_OK
    energy = next(r for r in rep["rows"] if r["quantity"].endswith("energy.exact"))
    assert energy["value"] == pytest.approx(7 / 3, rel=1e-14)


def test_embed_norm_rows(capsys):
    code, rep = run(capsys, "embed", "--n", "1", "--xi", "0.70710678118654752", "--nmax", "10")
    assert code == EXIT_OK
    norm = rep["rows"][0]
    assert norm["value"] == pytest.approx(1 - 2.0 ** -10, rel=1e-12)
    assert norm["reference_value"] == pytest.approx(1.0, rel=1e-12)
    assert norm["err"] == pytest.approx(2.0 ** -10, rel=1e-12)


def test_embed_out_of_chart(capsys):
    code, _ = run(capsys, "embed", "--n", "2", "--xi", "0.9,0.9")
    assert code == EXIT_INPUT


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "cq", "theta": [3, 2, 1], "rho": 2.0, "samples": 2000}))
    code, rep = run(capsys, "partition", "--config", str(cfg), "--rho", "1")
    assert code == EXIT_OK
    assert rep["inputs"]["rho"] == 1.0
    assert rep["inputs"]["samples"] == 2000


def test_config_quantum_section(tmp_path):
    cfg = tmp_path / "q.json"
    cfg.write_text(json.dumps({"quantum": {"k": 2, "c": [1, 0], "t": [0, -1]}}))
    a = resolve_args(["quantum", "--config", str(cfg)])
    assert (a.n, a.k, a.t) == (1, 2, [0, -1])


def test_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert main(["partition", "--config", str(bad)]) == EXIT_INPUT


def test_csv_output(capsys):
    code = main(["partition", "--kind", "cq", "--theta", "2,1", "--rho", "2", "--csv"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    table = list(csv.DictReader(io.StringIO(out)))
    assert [r["method"] for r in table] == ["closed", "quadrature", "exponential_mc"]


def test_table_output(capsys, monkeypatch):
    monkeypatch.setattr("sys.stdout.isatty", lambda: True, raising=False)
    code = main(["quantum", "--fourier", "--phi", "1.0"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert out.startswith("quantum: PASS")


def test_failing_row_gives_exit_3(capsys, monkeypatch):
    import localize.cli as cli

    def fake(a):
        rep = RunReport("partition", {})
        rep.rows.append(compare("Z", "x", 1.0, "y", 2.0, rtol=1e-3))
        return rep

    monkeypatch.setitem(cli.COMMANDS, "partition", fake)
    assert main(["partition", "--json"]) == EXIT_FAIL


def test_report_round_trip():
    rep = RunReport("x", {"z": 1 + 2j}, [compare("q", "m", 1 + 1j, "r", 1 + 1j, atol=0.0)], seed=1)
    d = json.loads(rep.to_json())
    assert d["inputs"]["z"] == [1.0, 2.0]
    assert d["rows"][0]["pass"] is True
    assert json.loads(json.dumps(d)) == d
