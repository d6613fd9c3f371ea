import csv
import io
import json

import numpy as np
import pytest

from orliczlab import SpecError, load_mesh
from orliczlab import cli
from orliczlab.reports import (
    TABLE_COLUMNS,
    VerificationReport,
    emit_norm_table,
    run_suite,
    table_to_csv,
    table_to_json,
)


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture(scope="module")
def simplicial_report():
    return run_suite("simplicial", {"mesh": "circle:n=8", "seed": 3})


def test_unknown_suite_is_a_usage_error():
    with pytest.raises(SpecError):
        run_suite("nosuch")


def test_unknown_phi_exits_two(capsys):
    code, out, err = run_cli(capsys, "run", "simplicial", "--phi", "powr:p=2")
    assert code == 2 and "powr" in err and out == ""
    code, _, _ = run_cli(capsys, "orlicz", "norm", "--phi", "powr:p=2", "--values", "1,2")
    assert code == 2


def test_unknown_mesh_exits_two(capsys):
    code, _, err = run_cli(capsys, "mesh", "--mesh", "klein:m=3")
    assert code == 2 and err


def test_bad_thread_env_exits_two(capsys, monkeypatch):
    monkeypatch.setenv("ORLICZLAB_THREADS", "many")
    code, _, err = run_cli(capsys, "orlicz", "norm", "--phi", "power:p=2", "--values", "3,4")
    assert code == 2 and "ORLICZLAB_THREADS" in err


def test_thread_env_is_honoured(capsys, monkeypatch):
    monkeypatch.setenv("ORLICZLAB_THREADS", "1")
    code, out, _ = run_cli(capsys, "orlicz", "norm", "--phi", "power:p=2", "--values", "3,4")
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(5.0, rel=1e-12)


def test_passing_run_exits_zero(capsys):
    code, out, _ = run_cli(capsys, "run", "simplicial", "--mesh", "circle:n=8")
    doc = json.loads(out)
    assert code == 0 and doc["pass"] and doc["schema"] == 1
    assert doc["environment"]["seed"] == 0
    assert "timing" not in doc


def test_failing_report_exits_one(capsys, monkeypatch):
    def failing(name, config):
        rep = VerificationReport(name)
        rep.add("always_fails", 1.0, 0.5)
        return rep

    monkeypatch.setattr(cli, "run_suite", failing)
    code, out, _ = run_cli(capsys, "run", "orlicz")
    assert code == 1 and json.loads(out)["pass"] is False


def test_check_pass_rule():
    rep = VerificationReport("x")
    assert rep.add("eq", 1e-3, 1e-3).passed
    assert not rep.add("gt", 2e-3, 1e-3).passed
    assert not rep.add("nan", float("nan"), 1.0).passed
    assert not rep.passed


def test_json_round_trip(simplicial_report):
    text = simplicial_report.to_json()
    back = VerificationReport.from_json(text)
    assert back == simplicial_report
    assert back.to_json() == text
    assert list(json.loads(text)) == sorted(json.loads(text))


def test_non_finite_values_round_trip():
    rep = VerificationReport("x", data={"v": np.array([np.inf, 1.0])})
    rep.add("inf", float("inf"), 1.0)
    back = VerificationReport.from_json(rep.to_json())
    assert back.checks[0].value == float("inf") and not back.passed


def test_wrong_schema_rejected(simplicial_report):
    doc = json.loads(simplicial_report.to_json())
    doc["schema"] = 99
    with pytest.raises(SpecError):
        VerificationReport.from_json(json.dumps(doc))


def test_csv_output(simplicial_report, capsys):
    rows = list(csv.reader(io.StringIO(simplicial_report.to_csv())))
    assert rows[0] == ["suite", "check", "value", "tolerance", "pass"]
    assert len(rows) == len(simplicial_report.checks) + 1
    code, out, _ = run_cli(capsys, "run", "simplicial", "--mesh", "circle:n=8", "--format", "csv")
    assert code == 0 and out.startswith("suite,check")


def test_timing_only_on_request(capsys):
    code, out, _ = run_cli(capsys, "run", "simplicial", "--mesh", "circle:n=8", "--timing")
    assert code == 0 and json.loads(out)["timing"]["seconds"] >= 0


def test_seed_changes_are_recorded():
    a = run_suite("orlicz", {"seed": 1, "trials": 20})
    b = run_suite("orlicz", {"seed": 2, "trials": 20})
    assert a.environment["seed"] == 1 and b.environment["seed"] == 2
    assert a.to_json() != b.to_json()


def test_norm_table_two_rows():
    rows = emit_norm_table(["power:p=2", "power:p=1"], [np.array([3.0, 4.0])])
    assert len(rows) == 2 and list(rows[0]) == list(TABLE_COLUMNS)
    assert rows[0]["norm"] == pytest.approx(5.0, rel=1e-12)
    assert rows[1]["norm"] == pytest.approx(7.0, rel=1e-12)
    assert rows[1]["ratio_to_first"] == pytest.approx(7 / 5, rel=1e-12)
    assert table_to_csv(rows).splitlines()[0] == ",".join(TABLE_COLUMNS)
    assert json.loads(table_to_json(rows))["columns"] == list(TABLE_COLUMNS)


def test_empty_phi_list(capsys):
    assert emit_norm_table([], [np.ones(3)]) == []
    code, out, _ = run_cli(capsys, "table", "--values", "1,2")
    assert code == 0 and out.strip() == ",".join(TABLE_COLUMNS)


def test_scaled_phi_ratio_bracket():
    rng = np.random.default_rng(0)
    vecs = [rng.standard_normal(rng.integers(1, 40)) for _ in range(30)]
    rows = emit_norm_table(["power:p=2", "scale:lambda=4,inner=power:p=2"], vecs)
    ratios = [r["ratio_to_first"] for r in rows if r["phi"].startswith("scale")]
    assert len(ratios) == 30
    assert all(1 / 4 <= r <= 4 for r in ratios)


def test_norm_table_on_forms():
    mesh = load_mesh("torus:m=4")
    from orliczlab import MeshForm

    one = MeshForm(mesh, 0, np.ones(mesh.complex.count(0)))
    rows = emit_norm_table(["power:p=2", "power:p=4"], [one])
    # torus of unit area: the constant 1 has norm 1 for every p
    assert [r["norm"] for r in rows] == pytest.approx([1.0, 1.0], rel=1e-10)


def test_orlicz_norm_command(capsys):
    code, out, _ = run_cli(capsys, "orlicz", "norm", "--phi", "power:p=1", "--values", "1,-2", "--weights", "2,0.5")
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(3.0, rel=1e-12)


def test_figures_are_written(tmp_path, capsys):
    out = tmp_path / "rep.json"
    figs = tmp_path / "figs"
    code, _, _ = run_cli(capsys, "run", "simplicial", "--mesh", "circle:n=8", "--out", str(out), "--figures", str(figs))
    assert code == 0
    assert json.loads(out.read_text())["suite"] == "simplicial"
    png = figs / "simplicial_checks.png"
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    code, _, _ = run_cli(capsys, "table", "--phi", "power:p=2", "--phi", "exp", "--values", "1,2,3", "--figures", str(figs))
    assert code == 0 and (figs / "norm_table.png").stat().st_size > 0


def test_mesh_command_exports_json(tmp_path, capsys):
    path = tmp_path / "oct.json"
    code, out, _ = run_cli(capsys, "mesh", "--mesh", "sphere:oct", "--out", str(path))
    assert code == 0 and json.loads(out)["counts"] == [6, 12, 8]
    reread = load_mesh(str(path))
    assert [reread.complex.count(k) for k in range(3)] == [6, 12, 8]


def test_verify_poincare_flattened(capsys):
    code, out, _ = run_cli(capsys, "verify", "poincare", "--dim", "2", "--degree", "1", "--phi", "power:p=2")
    doc = json.loads(out)
    assert code == 0 and doc["pass"]
    assert doc["max_residual"] < 1e-3


def test_endtoend_torus_betti():
    rep = run_suite("endtoend", {"mesh": "torus:m=6", "phi": "powerlog:p=2,kappa=1"})
    assert rep.passed and rep.data["betti"] == [1, 2, 1]
