"""
Pruebas de la linea de comandos, los reportes reproducibles, la configuracion
y el lock de directorio de salida.
"""
import json
import os

import pandas as pd
import pytest
from pydantic import ValidationError

import main
from app.core.config import Settings
from app.core.errors import InvariantFailure
from app.core.file_lock import ProcessLockError, acquire_process_lock
from app.services.report_service import ReportService
from app.services.verification_service import VerificationService

ORBIT_COLUMNS = ["n", "m", "q", "batch_row2", "pattern", "filling", "dim_exponent", "orbit_size"]


@pytest.fixture(autouse=True)
def _work_in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def _read(path):
    with open(path, encoding="utf-8") as f:
        return f.read()


def test_settings_ignore_environment(monkeypatch):
    monkeypatch.setenv("DEFAULT_BUDGET", "5")
    assert Settings().DEFAULT_BUDGET == 5_000_000
    assert Settings(VERIFY_Q_VALUES="3, 2,3").verify_q_values == [3, 2]


@pytest.mark.parametrize("overrides", [
    {"VERIFY_Q_VALUES": "2,x"},
    {"VERIFY_Q_VALUES": "2,6"},
    {"CENSUS_Q_VALUES": "2,3,32"},
    {"CENSUS_HELDOUT_Q": 3},
])
def test_settings_reject_bad_field_orders(overrides):
    with pytest.raises(ValidationError):
        Settings(**overrides)


def test_report_service_formats(tmp_path):
    reports = ReportService(str(tmp_path / "out"), config={"n": 4}, seed=7)
    df = pd.DataFrame([{"q": 2, "count": 35}])
    csv_path = reports.write_table(df, "tabla", "csv")
    lines = _read(csv_path).splitlines()
    header = json.loads(lines[0][2:])
    assert header["kind"] == "header"
    assert header["seed"] == 7
    assert header["config"] == {"n": 4}
    assert lines[1:] == ["q,count", "2,35"]

    json_path = reports.write_table(df, "tabla", "json")
    payload = json.loads(_read(json_path))
    assert payload["rows"] == [{"q": 2, "count": 35}]

    jsonl_path = reports.write_jsonl([{"a": 1}, {"b": 2}], "registros")
    assert [json.loads(line) for line in _read(jsonl_path).splitlines()][1:] == [{"a": 1}, {"b": 2}]
    with pytest.raises(ValueError):
        reports.write_table(df, "tabla", "xlsx")
    assert not any(name.endswith(".tmp") for name in os.listdir(tmp_path / "out"))


def test_process_lock_is_exclusive(tmp_path):
    out = str(tmp_path / "locked")
    with acquire_process_lock(out):
        with pytest.raises(ProcessLockError):
            with acquire_process_lock(out):
                pass


def test_locked_output_dir_exits_with_one(tmp_path):
    out = str(tmp_path / "busy")
    with acquire_process_lock(out):
        assert main.main(["enumerate", "--n", "2", "--m", "1", "--q", "2", "--out", out]) == ProcessLockError.exit_code == 1
    assert main.main(["enumerate", "--n", "2", "--m", "1", "--q", "2", "--out", out]) == 0


def test_enumerate_is_reproducible(tmp_path):
    out = str(tmp_path / "enum")
    assert main.main(["enumerate", "--n", "4", "--m", "2", "--q", "2", "--out", out]) == 0
    first = {name: _read(os.path.join(out, name)) for name in sorted(os.listdir(out))}
    assert main.main(["enumerate", "--n", "4", "--m", "2", "--q", "2", "--out", out]) == 0
    second = {name: _read(os.path.join(out, name)) for name in sorted(os.listdir(out))}
    assert first == second
    records = first["xi_n4_m2_q2.jsonl"].splitlines()
    assert len(records) == 1 + 35
    assert "gaussian_n4_m2.csv" in first


@pytest.mark.parametrize(
    "argv",
    [
        ["enumerate", "--n", "4", "--m", "3"],
        ["enumerate", "--n", "4", "--m", "2", "--q", "6"],
        ["basis", "--n", "4"],
        ["orbits", "--n", "4", "--m", "2", "--q", "2", "--q", "2"],
        ["census", "--n", "4", "--m", "2", "--q", "2"],
    ],
)
def test_usage_errors(argv, tmp_path):
    assert main.main(argv + ["--out", str(tmp_path / "err")]) == 2


def test_headers_carry_field_descriptor(tmp_path):
    out = str(tmp_path / "gf4")
    assert main.main(["enumerate", "--n", "3", "--m", "1", "--q", "4", "--out", out]) == 0
    gf4 = {"q": 4, "p": 2, "k": 2, "modulus": [1, 1, 1]}
    jsonl_header = json.loads(_read(os.path.join(out, "xi_n3_m1_q4.jsonl")).splitlines()[0])
    assert jsonl_header["fields"] == [gf4]
    csv_header = json.loads(_read(os.path.join(out, "batches_n3_m1.csv")).splitlines()[0][2:])
    assert csv_header["fields"] == [gf4]
    assert csv_header["config"]["q"] == [4]


def test_basis_dimension_mismatch_exits_with_invariant_code(tmp_path, monkeypatch):
    monkeypatch.setattr(main, "standard_basis", lambda *args, **kwargs: [])
    argv = ["basis", "--n", "4", "--m", "2", "--q", "2", "--out", str(tmp_path / "broken")]
    assert main.main(argv) == InvariantFailure.exit_code == 4
    assert not os.path.exists(tmp_path / "broken" / "basis_n4_m2_q2.jsonl")


def test_budget_exit_code(tmp_path):
    argv = ["enumerate", "--n", "4", "--m", "2", "--q", "2", "--budget", "10", "--out", str(tmp_path)]
    assert main.main(argv) == 3


def test_basis_and_rankpoly_commands(tmp_path):
    out = str(tmp_path / "basis")
    assert main.main(["basis", "--n", "4", "--m", "2", "--q", "2", "--out", out]) == 0
    lines = _read(os.path.join(out, "basis_n4_m2_q2.jsonl")).splitlines()
    assert len(lines) == 1 + 20
    assert json.loads(lines[1])["integral"] is True
    assert _read(os.path.join(out, "phi_n4_m2_q2.txt")).splitlines()[1].startswith("# source=(2,2)")

    assert main.main(["rankpoly", "--n", "3", "--m", "1", "--q", "2", "--q", "3", "--heldout-q", "4", "--out", out]) == 0
    rank = json.loads(_read(os.path.join(out, "rankpoly_n3_m1.json")))
    assert [p["value_at_one"] for p in rank["rank_polynomials"]] == [1, 1]


def test_orbits_and_census_commands(tmp_path):
    out = str(tmp_path / "orbits")
    assert main.main(["orbits", "--n", "4", "--m", "2", "--q", "2", "--format", "json", "--out", out]) == 0
    rows = json.loads(_read(os.path.join(out, "orbits_n4_m2.json")))["rows"]
    assert set(rows[0]) == set(ORBIT_COLUMNS)
    assert sum(row["orbit_size"] for row in rows) == 35
    assert all(row["orbit_size"] == 2 ** row["dim_exponent"] for row in rows)
    assert main.main(["orbits", "--n", "4", "--m", "2", "--q", "3", "--out", out]) == 0
    csv_lines = _read(os.path.join(out, "orbits_n4_m2.csv")).splitlines()
    assert csv_lines[1] == ",".join(ORBIT_COLUMNS)

    argv = ["census", "--n", "3", "--m", "1", "--q", "2", "--q", "3", "--heldout-q", "4", "--out", out]
    assert main.main(argv) == 0
    census = json.loads(_read(os.path.join(out, "census_n3_m1.json")))
    assert all(p["validated"] for p in census["polynomials"])
    assert [f["q"] for f in census["header"]["fields"]] == [2, 3, 4]


def test_verify_detects_injected_fault(tmp_path):
    out = str(tmp_path / "verify")
    assert main.main(["verify", "--n", "3", "--m", "1", "--q", "3", "--inject-fault", "theta-sign", "--out", out]) == 4
    report = json.loads(_read(os.path.join(out, "verification.json")))
    failed = {check["check"] for check in report["failed"]}
    assert "monomial_action_oracle" in failed
    assert all("replay" in check for check in report["failed"])


def test_verify_passes_on_small_shape(tmp_path):
    out = str(tmp_path / "clean")
    assert main.main(["verify", "--n", "3", "--m", "1", "--q", "2", "--out", out]) == 0
    report = json.loads(_read(os.path.join(out, "verification.json")))
    assert report["success"] and not report["failed"]


def test_verify_runs_orbit_module_checks_past_the_oracle_limit():
    results = VerificationService(q_values=[2], shape=(6, 1)).execute_verification()
    assert results["success"]
    status = {
        check["check"]: check["status"]
        for check in results["checks"]
        if check["scope"].get("tableau") == [6]
    }
    assert status["monomial_action_oracle"] == "skipped"
    assert status["character_orthogonality"] == "skipped"
    assert status["u_invariance"] == "pass"
    assert status["cyclic_generation"] == "pass"
