# validation/lchs_validator.py
import json
import math
from pathlib import Path

import numpy as np
import pandas as pd

from utils.bounds import plan_discretization
from utils.cost import ProblemSpec
from utils.errors import BoundViolationError, DomainError
from utils.excel_logger import ExcelReportLogger
from utils.quad import build_plan
from validation.checks import (MAX_GENERATOR_DIM, check_cmax, check_norm_decay, check_select_structure,
                               check_unitarity, exact_evolution, lchs_apply, random_generator)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent / "config" / "validation_config.json"
SELECT_DIM = 4
SELECT_NODES = 8
UNITARITY_TOLERANCE = 1e-10
NORM_GROWTH_TOLERANCE = 1e-10


class LCHSValidator:
    def __init__(self, config_path=DEFAULT_CONFIG_PATH, overrides=None):
        self.config = self.load_config(config_path)
        for section, values in (overrides or {}).items():
            self.config.setdefault(section, {}).update(values)
        self.trials = []
        self.structure_checks = []
        self.summary_metrics = {}
        self._check_dimension()

    def load_config(self, config_path):
        """Load validation configuration"""
        try:
            with open(config_path, 'r') as f:
                return json.load(f)
        except FileNotFoundError:
            print(f"❌ Config file not found: {config_path}")
            return {
                "validation_settings": {
                    "trials": 20,
                    "dimension": 8,
                    "t_values": [0.5, 1.0, 2.0],
                    "eps_v": 1e-6,
                    "beta": 0.75,
                    "seed": 7
                },
                "output_settings": {
                    "report_file": "validation_report.json",
                    "excel_file": "validation_report.xlsx"
                }
            }

    @property
    def settings(self):
        return self.config["validation_settings"]

    def _check_dimension(self):
        d = int(self.settings["dimension"])
        if not 2 <= d <= MAX_GENERATOR_DIM:
            raise DomainError(f"validation dimension must lie in [2, {MAX_GENERATOR_DIM}], got {d}")
        if int(self.settings["trials"]) < 1 or not self.settings["t_values"]:
            raise DomainError("validation needs at least one trial and one time")

    def _plan_for(self, gen, t):
        s = self.settings
        norm_l = max(gen.norm_l(), 1e-12)
        spec = ProblemSpec(t=t, alpha_a=max(float(np.linalg.norm(gen.a, 2)), norm_l), norm_l=norm_l,
                           eps_total=s["eps_v"], beta=s["beta"])
        share = s["eps_v"] / 2.0
        header = plan_discretization(spec, share, share)
        return build_plan(spec.kernel, header, materialize=True)

    def run_trial(self, seed, t):
        """One seeded generator at one time: LCHS sum against the exact propagator"""
        base = random_generator(self.settings["dimension"], seed)
        gen = base.shifted()
        rng = np.random.default_rng(seed + 1_000_003)
        u0 = rng.standard_normal(gen.dim) + 1j * rng.standard_normal(gen.dim)
        u0 /= np.linalg.norm(u0)

        plan = self._plan_for(gen, t)
        approx = lchs_apply(gen, plan, t, u0)
        exact = exact_evolution(gen, t, u0)
        error = float(np.linalg.norm(exact - approx))
        bound = float(np.linalg.norm(u0)) * self.settings["eps_v"]

        sample = plan.nodes[np.linspace(0, plan.nodes.size - 1, 16).astype(int)]
        record = {
            "seed": int(seed),
            "t": float(t),
            "dimension": gen.dim,
            "shift": base.shift,
            "k_cut": plan.header.k_cut,
            "m_total": plan.header.m_total,
            "c_l1": plan.c_l1,
            "coefficient_sum_error": abs(complex(plan.coeffs.sum()) - 1.0),
            "measured_error": error,
            "bound": bound,
            "ratio": error / bound,
            "unshifted_error": math.exp(base.shift * t) * error,
            "unshifted_bound": math.exp(base.shift * t) * bound,
            "unitarity_deviation": check_unitarity(gen, sample, t),
            "norm_decay_ratio": check_norm_decay(gen, [t], u0),
            "cmax_holds": check_cmax(gen, [0.0, t]),
        }
        failed = self.trial_failures(record)
        record["failed_checks"] = "; ".join(failed)
        record["passed"] = not failed
        return record

    @staticmethod
    def trial_failures(record):
        """Names of the checks a trial record fails, empty when it passes"""
        failed = []
        if not record["measured_error"] <= record["bound"]:
            failed.append(f"error {record['measured_error']:.3e} > {record['bound']:.3e}")
        if not record["unitarity_deviation"] <= UNITARITY_TOLERANCE:
            failed.append(f"unitarity deviation {record['unitarity_deviation']:.3e}")
        if not record["norm_decay_ratio"] <= 1.0 + NORM_GROWTH_TOLERANCE:
            failed.append(f"norm grew by {record['norm_decay_ratio']:.12f}")
        if not record["cmax_holds"]:
            failed.append("contraction bound failed")
        return failed

    def run_structure_checks(self):
        s = self.settings
        gen = random_generator(SELECT_DIM, s["seed"]).shifted()
        t = 1.0
        plan = self._plan_for(gen, t)
        nodes = plan.nodes[np.linspace(0, plan.nodes.size - 1, SELECT_NODES).astype(int)]
        check = check_select_structure(gen, nodes, t)
        return [{"check": "select_structure", **check.to_dict()}]

    def run_validation(self):
        """Run every trial; raises BoundViolationError when any trial or structure check fails"""
        s = self.settings
        print(f"🚀 Validating LCHS identity: {s['trials']} trials x {len(s['t_values'])} times, d = {s['dimension']}")
        self.trials = []
        for trial in range(int(s["trials"])):
            for t in s["t_values"]:
                self.trials.append(self.run_trial(int(s["seed"]) + trial, float(t)))
        self.structure_checks = self.run_structure_checks()
        self.calculate_summary_metrics()

        failures = [f"seed {r['seed']} t {r['t']}: {r['failed_checks']}"
                    for r in self.trials if not r["passed"]]
        failures += [c["check"] for c in self.structure_checks if not c["passed"]]
        if failures:
            raise BoundViolationError(f"{len(failures)} validation check(s) failed", failures=failures)
        return self.summary_metrics

    def calculate_summary_metrics(self):
        if not self.trials:
            return
        df = pd.DataFrame(self.trials)
        self.summary_metrics = {
            "total_trials": len(df),
            "passed_trials": int(df["passed"].sum()),
            "failed_trials": int((~df["passed"]).sum()),
            "max_measured_error": float(df["measured_error"].max()),
            "max_ratio": float(df["ratio"].max()),
            "mean_ratio": float(df["ratio"].mean()),
            "max_unshifted_error": float(df["unshifted_error"].max()),
            "max_unitarity_deviation": float(df["unitarity_deviation"].max()),
            "max_norm_decay_ratio": float(df["norm_decay_ratio"].max()),
            "structure_checks_passed": all(c["passed"] for c in self.structure_checks),
        }

    def save_results(self, output_dir):
        """Save a deterministic JSON report and an Excel workbook"""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        outputs = self.config.get("output_settings", {})
        json_path = output_dir / outputs.get("report_file", "validation_report.json")
        excel_path = output_dir / outputs.get("excel_file", "validation_report.xlsx")

        report = {
            "summary": self.summary_metrics,
            "trials": self.trials,
            "structure_checks": self.structure_checks,
            "config": self.config,
        }
        with open(json_path, 'w') as f:
            json.dump(report, f, indent=2, default=str)

        ExcelReportLogger(excel_path).write_validation(self.trials, self.summary_metrics)

        print(f"📁 Results saved:")
        print(f"   📊 Excel: {excel_path}")
        print(f"   📄 JSON: {json_path}")
        return json_path

    def print_summary_report(self):
        print("\n" + "=" * 80)
        print("📊 LCHS VALIDATION RESULTS")
        print("=" * 80)
        if self.summary_metrics:
            m = self.summary_metrics
            print(f"🧪 Trials: {m['total_trials']}")
            print(f"✅ Passed: {m['passed_trials']}")
            print(f"❌ Failed: {m['failed_trials']}")
            print(f"📏 Max measured error: {m['max_measured_error']:.3e}")
            print(f"⚖️  Max error/bound ratio: {m['max_ratio']:.3e}")
            print(f"🔁 Max unshifted error: {m['max_unshifted_error']:.3e}")
            print(f"🔒 Max unitarity deviation: {m['max_unitarity_deviation']:.3e}")
            print(f"🧱 SELECT structure: {'OK' if m['structure_checks_passed'] else 'FAILED'}")
        print("=" * 80)
