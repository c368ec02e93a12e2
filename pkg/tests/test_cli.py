import json

import numpy as np
import pandas as pd
import pytest

from config.run_config import RunConfig, parse_run_config
from main import EXIT_BOUND_VIOLATION, EXIT_DOMAIN, EXIT_INFEASIBLE, EXIT_OK, main
from utils.budget import equal_budget
from utils.cost import ProblemSpec
from utils.errors import DomainError
from utils.logger import get_run_summary


def _load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def test_estimate_writes_report(output_dir):
    assert main(["estimate", "--t", "10000"]) == EXIT_OK
    report = _load(output_dir / "estimate_report.json")
    for key in ("problem", "budget", "plan", "truncation", "report", "constraint", "fixed_point_trace",
                "aa_preconditions"):
        assert key in report
    assert report["constraint"]["satisfied"]
    assert report["report"]["c_a"] == report["report"]["c_lchs"] * report["report"]["qubitization_per_call"]
    assert report["truncation"]["published_k"] >= report["plan"]["k_cut"]


def test_estimate_exit_codes(output_dir):
    assert main(["estimate", "--eps", "2"]) == EXIT_INFEASIBLE
    assert main(["estimate", "--beta", "1.0"]) == EXIT_DOMAIN
    assert main(["estimate", "--frobnicate"]) == EXIT_DOMAIN
    assert main(["estimate", "--t", "ten"]) == EXIT_DOMAIN
    assert main([]) == EXIT_DOMAIN

    summary = get_run_summary(output_dir)
    assert summary["by_exit_code"] == {"2": 1, "1": 1}
    assert summary["failed_runs"] == 2


def test_estimate_csv_outputs(output_dir, tmp_path):
    plan_csv = tmp_path / "plan.csv"
    sign_csv = tmp_path / "sign.csv"
    code = main(["estimate", "--t", "1", "--eps", "1e-6", "--plan-csv", str(plan_csv),
                 "--sign-csv", str(sign_csv)])
    assert code == EXIT_OK
    report = _load(output_dir / "estimate_report.json")

    plan = pd.read_csv(plan_csv)
    assert len(plan) == report["plan"]["m_total"]
    assert np.isclose(plan["re_c_j"].sum(), 1.0, atol=1e-6)

    sign = pd.read_csv(sign_csv)
    assert len(sign) == report["report"]["c_lchs"] + 1
    assert report["sign_polynomial"]["sup_error"] <= 1.05 * report["budget"]["eps_aa"]


def test_output_dir_flag_beats_environment(output_dir, tmp_path):
    explicit = tmp_path / "explicit"
    assert main(["estimate", "--output-dir", str(explicit)]) == EXIT_OK
    assert (explicit / "estimate_report.json").exists()
    assert not (output_dir / "estimate_report.json").exists()


def test_validate_rejects_large_dimension(output_dir):
    assert main(["validate", "--d", "64"]) == EXIT_DOMAIN


def test_validate_is_deterministic(output_dir, tmp_path):
    argv = ["validate", "--seed", "7", "--trials", "2", "--d", "4", "--t-values", "1.0"]
    assert main(argv + ["--output-dir", str(tmp_path / "a")]) == EXIT_OK
    assert main(argv + ["--output-dir", str(tmp_path / "b")]) == EXIT_OK
    a = (tmp_path / "a" / "validation_report.json").read_bytes()
    b = (tmp_path / "b" / "validation_report.json").read_bytes()
    assert a == b


def test_validate_reports_bound_violation(output_dir, monkeypatch):
    monkeypatch.setattr("validation.lchs_validator.lchs_apply",
                        lambda gen, plan, t, u0: np.zeros(gen.dim, dtype=complex))
    code = main(["validate", "--trials", "1", "--d", "3", "--t-values", "0.5"])
    assert code == EXIT_BOUND_VIOLATION
    assert (output_dir / "validation_report.json").exists()


def test_sweep_grid(output_dir):
    assert main(["sweep", "--t-min-exp", "2", "--t-max-exp", "6", "--t-points", "5"]) == EXIT_OK
    df = pd.read_csv(output_dir / "sweep.csv")
    assert np.allclose(df["t"], np.logspace(2, 6, 5))
    assert df["C_A_equal"].is_monotonic_increasing
    assert df["C_A_opt"].isna().all()
    assert (output_dir / "sweep.xlsx").exists()


def test_sweep_keeps_infeasible_rows(output_dir):
    assert main(["sweep", "--eps", "2", "--t-min-exp", "2", "--t-max-exp", "3", "--t-points", "2"]) == EXIT_OK
    df = pd.read_csv(output_dir / "sweep.csv")
    assert len(df) == 2
    assert df["C_A_equal"].isna().all()


def test_sweep_needs_points(output_dir):
    assert main(["sweep", "--t-points", "0"]) == EXIT_DOMAIN


def test_speedup_with_matching_costs(output_dir, tmp_path):
    rows = []
    for t in (100.0, 1000.0):
        report = equal_budget(ProblemSpec(t=t)).report
        rows.append({"t": t, "rls_c_a": report.c_a, "rls_c_0": report.c_0})
    rls_csv = tmp_path / "rls.csv"
    pd.DataFrame(rows).to_csv(rls_csv, index=False)

    assert main(["speedup", "--rls-csv", str(rls_csv), "--chi-points", "7"]) == EXIT_OK
    df = pd.read_csv(output_dir / "speedup.csv")
    assert list(df.columns) == ["t", "chi", "ell"]
    assert len(df) == 2 * 8
    assert np.allclose(df["ell"], 1.0, rtol=1e-12)
    assert (df.groupby("t")["chi"].first() == 0.0).all()


def test_speedup_rejects_bad_table(output_dir, tmp_path):
    rls_csv = tmp_path / "rls.csv"
    rls_csv.write_text("t,rls_c_a\n100,1e9\n")
    assert main(["speedup", "--rls-csv", str(rls_csv)]) == EXIT_DOMAIN
    assert main(["speedup"]) == EXIT_DOMAIN


@pytest.mark.parametrize("argv", [
    ["estimate", "--t", "37.5", "--eps", "1e-08", "--tight", "--no-perfect-oracle", "--m-a", "3"],
    ["optimize", "--method", "sol_exp", "--eval-limit", "30", "--seed", "5"],
    ["sweep", "--t-min-exp", "1.5", "--t-points", "4", "--optimize"],
    ["validate", "--d", "4", "--t-values", "0.5", "1.0"],
    ["speedup", "--rls-csv", "rls.csv", "--chi-points", "3"],
])
def test_run_config_round_trip(argv):
    config = parse_run_config(argv)
    assert isinstance(config, RunConfig)
    assert parse_run_config(config.to_argv()) == config


def test_run_config_parsing():
    config = parse_run_config(["validate", "--d", "4", "--t-values", "0.5", "1.0"])
    assert config.dimension == 4
    assert config.t_values == (0.5, 1.0)
    assert config.trials is None

    config = parse_run_config(["estimate", "--no-perfect-oracle"])
    assert not config.perfect_oracle and not config.tight
    with pytest.raises(DomainError):
        parse_run_config(["optimize", "--method", "anneal"])


def test_validate_exits_on_failed_contraction_check(output_dir, monkeypatch):
    monkeypatch.setattr("validation.lchs_validator.check_cmax", lambda gen, t_grid: False)
    code = main(["validate", "--trials", "1", "--d", "3", "--t-values", "0.5"])
    assert code == EXIT_BOUND_VIOLATION
    report = _load(output_dir / "validation_report.json")
    assert report["trials"][0]["failed_checks"] == "contraction bound failed"


def test_run_log_file_setting_is_used(output_dir, monkeypatch):
    monkeypatch.setattr("main.RUN_LOG_FILE", "estimator_runs.json")
    assert main(["estimate", "--t", "1", "--eps", "1e-6"]) == EXIT_OK
    assert (output_dir / "estimator_runs.json").exists()
    assert not (output_dir / "run_log.json").exists()
    assert get_run_summary(output_dir, "estimator_runs.json")["total_runs"] == 1
