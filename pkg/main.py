import asyncio
import sys

import numpy as np
import pandas as pd

from config.run_config import parse_run_config
from config.settings import (BETA_MAX, BETA_MIN, DEBUG, FIXED_POINT_MAX_ITERATIONS, MAX_PLAN_TERMS,
                             OPTIMIZER_SEED, RUN_LOG_FILE, VERBOSE_LOGGING, resolve_output_dir)
from utils.bounds import naive_k, published_k
from utils.budget import check_constraint, equal_budget, optimize
from utils.cost import ProblemSpec, load_rls_table, speedup_ratio
from utils.errors import BoundViolationError, DomainError, InfeasibleError, LCHSError
from utils.excel_logger import save_sweep_to_excel
from utils.logger import get_run_summary, save_report, save_run_to_log
from utils.quad import export_plan_csv, plan_summary
from utils.signpoly import build_sign_poly, sign_poly_params, sign_poly_sup_error
from validation.checks import check_aa_preconditions
from validation.lchs_validator import LCHSValidator

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_INFEASIBLE = 2
EXIT_BOUND_VIOLATION = 3
MAX_SIGN_CSV_DEGREE = 4001


def print_banner(title):
    print("\n" + "=" * 80)
    print(title)
    print("=" * 80)


def _spec_for(config, t=None):
    kwargs = config.problem_kwargs()
    if t is not None:
        kwargs['t'] = float(t)
    return ProblemSpec(**kwargs)


def _equal(spec, config):
    return equal_budget(spec, perfect_oracle=config.perfect_oracle, tight=config.tight,
                        max_plan_terms=MAX_PLAN_TERMS, max_iterations=FIXED_POINT_MAX_ITERATIONS,
                        verbose=VERBOSE_LOGGING)


def _optimized(spec, config):
    return optimize(spec, method=config.method, eval_limit=config.eval_limit,
                    seed=OPTIMIZER_SEED if config.seed is None else config.seed,
                    beta_bounds=(BETA_MIN, BETA_MAX), tight=config.tight, max_plan_terms=MAX_PLAN_TERMS,
                    verbose=DEBUG)


def _truncation_comparison(spec, eps_trunc):
    params = spec.kernel
    published = published_k(params, eps_trunc)
    comparison = {"published_k": published.k_cut, "published_rhs": published.rhs_at_k}
    try:
        comparison["naive_k"] = naive_k(params, eps_trunc)
    except DomainError:
        comparison["naive_k"] = None
    return comparison


def cmd_estimate(config, output_dir):
    """Equal-budget estimate for one (t, eps, beta)"""
    spec = _spec_for(config)
    print(f"🚀 Estimating LCHS costs: t = {spec.t:g}, eps = {spec.eps_total:g}, beta = {spec.beta}")
    result = _equal(spec, config)
    budget, plan, report = result

    check = check_constraint(spec, plan, budget)
    if not check.satisfied:
        raise InfeasibleError(f"estimate failed re-verification: {check.failed}", condition=check.failed)

    outputs = []
    payload = {
        "problem": spec.to_dict(),
        "mode": {"perfect_oracle": config.perfect_oracle, "tight": config.tight},
        "budget": budget.to_dict(),
        "plan": plan_summary(plan),
        "truncation": _truncation_comparison(spec, budget.eps_trunc),
        "report": report.to_dict(),
        "constraint": check.to_dict(),
        "fixed_point_trace": result.trace,
        "aa_preconditions": check_aa_preconditions(spec, plan, budget).to_dict(),
    }

    if config.plan_csv:
        if plan.materialized:
            outputs.append(str(export_plan_csv(plan, config.plan_csv)))
        else:
            print(f"⚠️ Plan has M = {plan.header.m_total} summands and was not materialised; skipping CSV")

    if config.sign_csv:
        if report.c_lchs <= MAX_SIGN_CSV_DEGREE:
            params = sign_poly_params(report.delta, budget.eps_aa)
            series = build_sign_poly(params)
            payload["sign_polynomial"] = {**params.to_dict(), "sup_error": sign_poly_sup_error(series, params)}
            outputs.append(str(series.export_csv(config.sign_csv)))
        else:
            print(f"⚠️ Sign polynomial degree {report.c_lchs} exceeds {MAX_SIGN_CSV_DEGREE}; skipping CSV")

    report_path = save_report(payload, output_dir / "estimate_report.json")
    outputs.insert(0, str(report_path))

    print_banner("📊 LCHS ESTIMATE")
    print(f"🎯 C_A: {report.c_a:,}")
    print(f"🔁 C_LCHS = C_0: {report.c_lchs:,}")
    print(f"🔄 C_R: {report.c_r:,}")
    print(f"📏 K: {plan.header.k_cut:.6g}   Q: {plan.header.q_points}   M: {plan.header.m_total:,}")
    print(f"📐 ||c||_1: {plan.c_l1:.6f}   Delta: {report.delta:.6f}")
    print(f"🧮 Ancilla estimate: {report.ancilla_estimate}")
    print(f"⚖️  Constraint slack: {check.slack:.3e}")
    print("=" * 80)
    print(f"💾 Report: {report_path}")
    return outputs


def cmd_optimize(config, output_dir):
    """Optimised budget for one (t, eps)"""
    spec = _spec_for(config)
    if not config.perfect_oracle:
        print("⚠️ The optimiser budgets perfect oracles; oracle errors are set to zero")
    print(f"🚀 Optimising error budget ({config.method}, {config.eval_limit} evaluations)")
    result = _optimized(spec, config)

    payload = {"problem": spec.to_dict(), **result.to_dict()}
    report_path = save_report(payload, output_dir / "optimize_report.json")

    report = result.report
    print_banner("📊 LCHS OPTIMISED ESTIMATE")
    print(f"🎯 C_A: {report.c_a:,}")
    print(f"🔁 C_0: {report.c_0:,}")
    print(f"🔺 beta: {result.beta:.4f}   ||c||_1: {result.plan.c_l1:.6f}")
    print(f"🧮 Evaluations: {result.evaluations}{' (limit reached)' if result.exhausted else ''}")
    if result.fallback_to_equal:
        print("⚠️ Equal budget was cheaper and is reported instead")
    print("=" * 80)
    print(f"💾 Report: {report_path}")
    return [str(report_path)]


def sweep_row(config, t):
    """One sweep point; cells stay empty where the budget is infeasible"""
    row = {"t": float(t), "C_A_equal": None, "C_A_opt": None, "C_0": None, "M": None, "K": None,
           "c_l1": None, "beta_opt": None}
    spec = _spec_for(config, t)
    try:
        budget, plan, report = _equal(spec, config)
        row.update({"C_A_equal": report.c_a, "C_0": report.c_0, "M": plan.header.m_total,
                    "K": plan.header.k_cut, "c_l1": plan.c_l1})
    except LCHSError as e:
        print(f"⚠️ t = {t:g}: equal budget infeasible ({e})")
    if config.optimize:
        try:
            result = _optimized(spec, config)
            row.update({"C_A_opt": result.report.c_a, "beta_opt": result.beta})
        except LCHSError as e:
            print(f"⚠️ t = {t:g}: optimised budget infeasible ({e})")
    return row


async def run_sweep_rows(config, t_grid):
    tasks = [asyncio.to_thread(sweep_row, config, t) for t in t_grid]
    # gather keeps grid order
    return await asyncio.gather(*tasks)


def cmd_sweep(config, output_dir):
    if config.t_points < 1:
        raise DomainError(f"t_points must be at least 1, got {config.t_points}")
    t_grid = np.logspace(config.t_min_exp, config.t_max_exp, int(config.t_points))
    print(f"🚀 Sweeping {t_grid.size} points: t = {t_grid[0]:g} .. {t_grid[-1]:g}")
    rows = asyncio.run(run_sweep_rows(config, t_grid))

    csv_path = output_dir / "sweep.csv"
    output_dir.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows).to_csv(csv_path, index=False)
    excel_path = save_sweep_to_excel(rows, output_dir / "sweep.xlsx")
    report_path = save_report({"config": config.to_dict(), "rows": rows}, output_dir / "sweep_report.json")

    print_banner("📊 LCHS COST SWEEP")
    for row in rows:
        c_a = f"{row['C_A_equal']:.4e}" if row['C_A_equal'] is not None else "infeasible"
        print(f"   t = {row['t']:.3e}   C_A = {c_a}")
    print("=" * 80)
    print(f"📁 Results saved:")
    print(f"   📄 CSV: {csv_path}")
    print(f"   📊 Excel: {excel_path}")
    return [str(csv_path), str(excel_path), str(report_path)]


def cmd_validate(config, output_dir):
    settings = {"beta": config.beta}
    for name, key in (("dimension", "dimension"), ("trials", "trials"), ("seed", "seed"),
                      ("eps_v", "eps_v"), ("t_values", "t_values")):
        value = getattr(config, name)
        if value is not None:
            settings[key] = list(value) if name == "t_values" else value

    validator = LCHSValidator(overrides={"validation_settings": settings})
    try:
        validator.run_validation()
    except BoundViolationError:
        validator.save_results(output_dir)
        validator.print_summary_report()
        raise
    report_path = validator.save_results(output_dir)
    validator.print_summary_report()
    return [str(report_path)]


def speedup_rows(table, chi_grid, lchs_by_t):
    rows = []
    for record in table.itertuples(index=False):
        lchs = lchs_by_t[record.t]
        for chi in chi_grid:
            ell = speedup_ratio(lchs, record.rls_c_a, record.rls_c_0, chi)
            rows.append({"t": record.t, "chi": float(chi), "ell": ell})
    return rows


def cmd_speedup(config, output_dir):
    if not config.rls_csv:
        raise DomainError("speedup needs --rls-csv with columns t, rls_c_a, rls_c_0")
    table = load_rls_table(config.rls_csv)
    chi_grid = np.concatenate([[0.0], np.logspace(config.chi_min_exp, config.chi_max_exp,
                                                  int(config.chi_points))])
    print(f"🚀 Speedup over {len(table)} RLS rows and {chi_grid.size} chi values")

    lchs_by_t = {}
    for t in table["t"]:
        lchs_by_t[t] = _equal(_spec_for(config, t), config).report
    rows = speedup_rows(table, chi_grid, lchs_by_t)

    csv_path = output_dir / "speedup.csv"
    output_dir.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(rows, columns=["t", "chi", "ell"]).to_csv(csv_path, index=False)
    report_path = save_report({
        "config": config.to_dict(),
        "lchs": {str(t): r.to_dict() for t, r in lchs_by_t.items()},
        "rows": rows,
    }, output_dir / "speedup_report.json")

    print_banner("📊 LCHS SPEEDUP OVER RLS")
    for t in lchs_by_t:
        at_t = [r for r in rows if r["t"] == t]
        print(f"   t = {t:.3e}   ell(chi=0) = {at_t[0]['ell']:.4f}   ell(chi={at_t[-1]['chi']:g}) = {at_t[-1]['ell']:.4f}")
    print("=" * 80)
    print(f"📄 CSV: {csv_path}")
    return [str(csv_path), str(report_path)]


COMMAND_HANDLERS = {
    "estimate": cmd_estimate,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "speedup": cmd_speedup,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_run_config(argv)
    except DomainError as e:
        print(f"❌ {e}")
        return EXIT_DOMAIN

    output_dir = resolve_output_dir(config.output_dir)
    outputs = []
    try:
        outputs = COMMAND_HANDLERS[config.command](config, output_dir)
        exit_code = EXIT_OK
    except DomainError as e:
        print(f"❌ Invalid parameters: {e}")
        exit_code = EXIT_DOMAIN
    except InfeasibleError as e:
        print(f"❌ Infeasible: {e}")
        if e.condition:
            print(f"❌ Violated condition: {e.condition}")
        exit_code = EXIT_INFEASIBLE
    except BoundViolationError as e:
        print(f"❌ Bound violated: {e}")
        for failure in e.failures:
            print(f"   ❌ {failure}")
        exit_code = EXIT_BOUND_VIOLATION

    save_run_to_log({"command": config.command, "argv": argv, "exit_code": exit_code, "outputs": outputs},
                    output_dir, RUN_LOG_FILE)
    if DEBUG:
        print(f"🔍 Run log summary: {get_run_summary(output_dir, RUN_LOG_FILE)}")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
