import io
import json

import pandas as pd
import pytest

from src.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFICATION_FAILED, SWEEP_COLUMNS, main
from src.formats import EvaluateReport, SgpoCommandReport, SweepReport, VerificationReport

BOUNDARY = ["--weights", "1/6", "1/6", "1/2", "1/6"]
CLASSICAL = ["--state", "1", "0", "0", "0"]


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_evaluate_classical_json(capsys):
    code, out, _ = run(capsys, "evaluate", *CLASSICAL, "--profile", "0,0,0,0", "--format", "json")
    assert code == EXIT_OK
    report = EvaluateReport.model_validate_json(out)
    assert report.restricted
    assert report.density_payoffs.as_tuple() == (1.0, 1.0, 1.0, 1.0)
    assert report.discrepancy <= 1e-9


def test_evaluate_fraction_weights(capsys):
    code, out, _ = run(capsys, "evaluate", *BOUNDARY, "--profile", "1,1,0,0", "--format", "json")
    assert code == EXIT_OK
    report = EvaluateReport.model_validate_json(out)
    assert report.density_payoffs.as_tuple() == pytest.approx((5 / 3,) * 4, abs=1e-12)
    assert report.closed_form_payoffs.as_tuple() == pytest.approx((5 / 3,) * 4, abs=1e-12)


def test_evaluate_general_state_has_no_closed_form(capsys):
    code, out, _ = run(capsys, "evaluate", "--state", *(["1/4"] * 16), "--profile", "0.2,0.4,0.6,0.8", "--format", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert "discrepancy" not in payload
    assert "closed_form_payoffs" not in payload
    assert payload["product_state"] is True
    values = [payload["density_payoffs"][k] for k in ("a1", "b1", "a2", "b2")]
    assert all(0.0 <= v <= 5.0 for v in values)


def test_evaluate_complex_amplitudes_text(capsys):
    half = "0.7071067811865476"
    code, out, _ = run(capsys, "evaluate", "--state", half, f"0,{half}", "0", "0", "--profile", "1,1,1,1")
    assert code == EXIT_OK
    assert "density-matrix payoffs" in out
    assert "max discrepancy" in out


def test_sgpo_classical_json_round_trip(capsys):
    code, out, _ = run(capsys, "sgpo", *CLASSICAL, "--format", "json")
    assert code == EXIT_OK
    report = SgpoCommandReport.model_validate_json(out)
    assert report.sgpo_kind.value == "all-defect"
    assert report.oracle_agrees
    assert [entry.profile.as_tuple() for entry in report.report.sgpo_profiles] == [(0.0, 0.0, 0.0, 0.0)]
    assert report.report.sgpo_profiles[0].totals == pytest.approx((2.0, 2.0), abs=1e-12)
    assert json.loads(report.model_dump_json(indent=2, exclude_none=True)) == json.loads(out)


def test_sgpo_boundary_example_csv(capsys):
    code, out, _ = run(capsys, "sgpo", *BOUNDARY, "--format", "csv", "--grid-n", "30")
    assert code == EXIT_OK
    table = pd.read_csv(io.StringIO(out))
    row = table[(table.p == 1.0) & (table.q == 1.0) & (table.p1 == 0.0) & (table.q1 == 0.0)]
    assert len(row) == 1
    assert row.strictness.iloc[0] == "weak"
    assert row.a_total.iloc[0] == pytest.approx(10 / 3, abs=1e-12)


def test_sgpo_strict_interior_text(capsys):
    code, out, _ = run(capsys, "sgpo", "--weights", "0.2", "0.1", "0.5", "0.2")
    assert code == EXIT_OK
    assert "sgpo profiles (cooperate-then-defect)" in out
    assert "(1, 1, 0, 0) totals=" in out
    assert "strict" in out
    assert "grid oracle N=100: agrees" in out


def test_conditions_csv(capsys):
    code, out, _ = run(capsys, "conditions", *BOUNDARY, "--format", "csv")
    assert code == EXIT_OK
    table = pd.read_csv(io.StringIO(out))
    assert table.cond1_class.iloc[0] == "boundary-hold"
    assert table.cond2_class.iloc[0] == "boundary-hold"
    assert abs(table.cond1_value.iloc[0]) <= 1e-12


def test_sweep_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--resolution", "2", "--format", "csv")
    assert code == EXIT_OK
    table = pd.read_csv(io.StringIO(out))
    assert list(table.columns) == SWEEP_COLUMNS
    assert len(table) == 10

    cooperative = table[(table.w3 == 1.0)].iloc[0]
    assert (cooperative.x_sum, cooperative.y_sum) == (0.0, 0.0)
    assert cooperative.cond1_class == "strict-hold"
    assert cooperative.cond2_class == "strict-hold"
    assert cooperative.sgpo_kind == "cooperate-then-defect"

    classical = table[(table.w1 == 1.0)].iloc[0]
    assert classical.cond2_class == "fail"
    assert classical.sgpo_kind == "all-defect"
    assert (classical.a_total, classical.b_total) == (2.0, 2.0)


def test_sweep_is_deterministic(capsys, tmp_path):
    _, first, _ = run(capsys, "sweep", "--resolution", "3", "--format", "csv")
    _, second, _ = run(capsys, "sweep", "--resolution", "3", "--format", "csv")
    assert first == second

    path = tmp_path / "sweep.csv"
    code, out, _ = run(capsys, "sweep", "--resolution", "3", "--format", "csv", "--out", str(path))
    assert code == EXIT_OK
    assert out == ""
    assert path.read_text(encoding="utf-8") == first

    _, parallel, _ = run(capsys, "sweep", "--resolution", "3", "--format", "csv", "--workers", "2")
    assert parallel == first


def test_sweep_json_round_trip(capsys):
    code, out, _ = run(capsys, "sweep", "--resolution", "2", "--format", "json")
    assert code == EXIT_OK
    report = SweepReport.model_validate_json(out)
    assert report.resolution == 2
    assert [row.w1 + row.w2 + row.w3 + row.w4 for row in report.rows] == pytest.approx([1.0] * 10)


def test_sweep_resolution_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("QPD_RESOLUTION", "2")
    code, out, _ = run(capsys, "sweep", "--format", "json")
    assert code == EXIT_OK
    assert len(SweepReport.model_validate_json(out).rows) == 10


def test_verify_classical_passes(capsys):
    code, out, _ = run(capsys, "verify-classical", "--samples", "200", "--format", "json")
    assert code == EXIT_OK
    report = VerificationReport.model_validate_json(out)
    assert report.passed
    assert all(check.max_error <= 1e-9 for check in report.checks)


def test_verify_classical_corrupted_fails(capsys):
    code, out, _ = run(capsys, "verify-classical", "--samples", "50", "--corrupt")
    assert code == EXIT_VERIFICATION_FAILED
    assert "oracle-equivalence" in out
    assert "verification FAILED" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["evaluate", "--state", "abc", "0", "0", "0", "--profile", "0,0,0,0"],
        ["evaluate", "--state", "1", "1", "0", "0", "--profile", "0,0,0,0"],
        ["evaluate", "--state", "1", "0", "0", "--profile", "0,0,0,0"],
        ["evaluate", *CLASSICAL],
        ["evaluate", *CLASSICAL, "--profile", "0,0,0,2"],
        ["sgpo", *CLASSICAL, *BOUNDARY],
        ["sgpo"],
        ["conditions", "--state", *(["1/4"] * 16)],
        ["sweep", "--resolution", "1"],
    ],
)
def test_error_paths_exit_with_single_line(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert out == ""
    assert err.startswith("error: ")
    assert err.count("\n") == 1


def test_unwritable_output_path(capsys, tmp_path):
    code, _, err = run(capsys, "conditions", *BOUNDARY, "--out", str(tmp_path / "missing" / "out.txt"))
    assert code == EXIT_USAGE
    assert err.startswith("error: cannot write")


def test_usage_error_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == EXIT_USAGE
    assert capsys.readouterr().err.count("\n") == 1


def test_bad_format_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("QPD_FORMAT", "yaml")
    code, _, err = run(capsys, "conditions", *BOUNDARY)
    assert code == EXIT_USAGE
    assert err.startswith("error: invalid configuration")
