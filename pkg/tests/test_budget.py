import numpy as np
import pytest

from utils.budget import (EPS_V_FRACTION_BOUNDS, MAX_C_L1, UPPER_PREFACTOR, BudgetResult, ErrorBudget,
                          check_constraint, equal_budget, free_bounds, lifted_ratio, optimize,
                          output_norm_bound, perfect_oracle_lhs, sol_aa_free_floor, sol_eps_aa,
                          sol_eps_exp)
from utils.cost import (ProblemSpec, c_lchs, c_lchs_upper, delta_conservative, lchs_errors,
                        qubitization_queries)
from utils.errors import DomainError, InfeasibleError


def test_equal_budget_satisfies_constraint(default_spec):
    result = equal_budget(default_spec)
    assert isinstance(result, BudgetResult)
    assert result.check.satisfied
    assert result.check.lhs <= default_spec.eps_total * (1.0 + 1e-12)
    assert result.check.amplification_condition and result.check.robustness_condition

    budget = result.budget
    assert budget.eps_trunc == budget.eps_disc == default_spec.eps_total / 8.0
    assert budget.eps_c == budget.eps_0 == budget.eps_a == budget.eps_r == 0.0
    # the fixed point ends once the implied degree stops growing
    assert len(result.trace) >= 2
    assert result.trace[-1] <= result.trace[-2]


def test_equal_budget_with_oracle_errors(default_spec):
    result = equal_budget(default_spec, perfect_oracle=False)
    assert result.check.satisfied
    assert result.budget.eps_c > 0.0 and result.budget.eps_r > 0.0
    assert result.report.c_a >= equal_budget(default_spec).report.c_a


def test_tight_mode_never_costs_more_summands(default_spec):
    relaxed = equal_budget(default_spec)
    tight = equal_budget(default_spec, tight=True)
    assert tight.plan.header.q_points <= relaxed.plan.header.q_points
    assert tight.plan.header.m_total <= relaxed.plan.header.m_total


def test_equal_budget_rejects_eps_above_output_norm():
    with pytest.raises(InfeasibleError) as info:
        equal_budget(ProblemSpec(t=1e4, eps_total=2.0))
    assert info.value.condition == "eps_total < norm_ut"


def test_ancilla_register_at_long_times():
    budget, plan, report = equal_budget(ProblemSpec(t=1e10))
    assert 45 <= (plan.header.m_total - 1).bit_length() <= 51
    assert not plan.materialized


def test_costs_grow_with_time():
    costs = [equal_budget(ProblemSpec(t=t)).report.c_a for t in np.logspace(2, 10, 9)]
    assert all(a <= b for a, b in zip(costs, costs[1:]))


def test_constraint_rejects_oversized_budget(default_spec):
    budget, plan, _ = equal_budget(default_spec)
    loose = ErrorBudget(eps_trunc=budget.eps_trunc, eps_disc=budget.eps_disc, eps_aa=default_spec.eps_total,
                        eps_exp=budget.eps_exp)
    check = check_constraint(default_spec, plan, loose)
    assert not check.satisfied
    assert check.slack < 0.0
    assert "exceeds" in check.failed


def test_error_budget_validation_and_serialisation():
    with pytest.raises(DomainError):
        ErrorBudget(eps_trunc=-1.0, eps_disc=0.0, eps_aa=0.0, eps_exp=0.0)
    budget = ErrorBudget(eps_trunc=1e-11, eps_disc=2e-11, eps_aa=3e-11, eps_exp=4e-13)
    assert ErrorBudget.from_dict(budget.to_dict()) == budget


def _sol_aa_instance(rng, eps=1e-10):
    spec = ProblemSpec(t=1e4, eps_total=eps)
    eps_v = rng.uniform(0.05, 0.6) * eps
    delta = rng.uniform(0.8, 1.6)
    ratio = lifted_ratio(spec, eps_v)
    scale = rng.uniform(40.0, 200.0)
    eps_exp = ratio * delta / (4.5 * UPPER_PREFACTOR * scale)
    return spec, eps_v, delta, eps_exp


def test_sol_eps_aa_back_substitution(rng):
    for _ in range(100):
        spec, eps_v, delta, eps_exp = _sol_aa_instance(rng)
        eps_aa = sol_eps_aa(spec, eps_v, eps_exp, delta)
        assert 0.0 < eps_aa < lifted_ratio(spec, eps_v)
        lhs = perfect_oracle_lhs(spec, eps_v, eps_aa, eps_exp, c_lchs_upper(delta, eps_aa))
        assert abs(lhs - spec.eps_total) <= 1e-6 * spec.eps_total


def test_sol_eps_exp_back_substitution(rng):
    for _ in range(100):
        eps = 10.0 ** rng.uniform(-12, -6)
        spec = ProblemSpec(t=1e4, eps_total=eps)
        eps_v = rng.uniform(0.05, 0.6) * eps
        delta = rng.uniform(0.8, 1.6)
        eps_aa = rng.uniform(0.05, 0.95) * lifted_ratio(spec, eps_v)
        eps_exp = sol_eps_exp(spec, eps_v, eps_aa, delta)
        lhs = perfect_oracle_lhs(spec, eps_v, eps_aa, eps_exp, c_lchs(delta, eps_aa))
        assert abs(lhs - eps) <= 1e-6 * eps


def test_solver_domains(default_spec):
    with pytest.raises(DomainError):
        sol_eps_aa(default_spec, default_spec.eps_total, 1e-12, 1.0)
    with pytest.raises(DomainError):
        sol_eps_aa(default_spec, 1e-11, 0.0, 1.0)
    with pytest.raises(InfeasibleError):
        sol_eps_exp(default_spec, 1e-11, 1.0, 1.0)
    assert output_norm_bound(default_spec, 1e-11) == 1.0 + 1e-11


@pytest.mark.parametrize("method", ["sol_aa", "sol_exp"])
def test_optimizer_never_worse_than_equal(default_spec, method):
    result = optimize(default_spec, method=method, eval_limit=60, seed=1234)
    equal = equal_budget(default_spec)
    assert result.check.satisfied
    assert result.report.c_a <= equal.report.c_a
    assert result.evaluations <= 60
    assert result.method == method
    assert 0.4 <= result.beta <= 0.95


def test_optimizer_is_seed_deterministic(default_spec):
    first = optimize(default_spec, eval_limit=40, seed=99)
    second = optimize(default_spec, eval_limit=40, seed=99)
    assert first.report.c_a == second.report.c_a
    assert first.beta == second.beta
    assert first.budget == second.budget


def test_optimizer_argument_checks(default_spec):
    with pytest.raises(DomainError):
        optimize(default_spec, method="anneal")
    with pytest.raises(DomainError):
        optimize(default_spec, eval_limit=5)
    with pytest.raises(InfeasibleError):
        optimize(ProblemSpec(t=1e4, eps_total=2.0), eval_limit=20)


@pytest.mark.slow
def test_optimizer_over_cost_grid():
    for t in np.logspace(2, 10, 5):
        spec = ProblemSpec(t=t)
        result = optimize(spec, eval_limit=240, seed=1234)
        assert result.check.satisfied
        assert result.report.c_a <= equal_budget(spec).report.c_a
        assert 0.75 <= result.beta <= 0.85
        assert 1.45 <= result.plan.c_l1 <= 1.65
        assert not result.fallback_to_equal


def test_equal_budget_matches_closed_form_costs(default_spec):
    budget, plan, report = equal_budget(default_spec)
    eps = default_spec.eps_total
    norm_v = output_norm_bound(default_spec, lchs_errors(default_spec, plan, budget).eps_v)
    assert np.isclose(budget.eps_aa, eps / (8.0 * norm_v), rtol=1e-15)

    headline = c_lchs(2.0 * default_spec.norm_ut / (default_spec.norm_u0 * plan.c_l1), eps / (8.0 * norm_v))
    assert headline <= report.c_lchs <= headline + 2

    alpha_select = np.sqrt(1.0 + plan.header.k_cut ** 2) * default_spec.alpha_a
    per_call = qubitization_queries(alpha_select, default_spec.t, budget.eps_exp)
    assert report.qubitization_per_call == per_call
    assert report.c_a == report.c_lchs * per_call


def test_sol_aa_search_box_stays_in_solver_domain(default_spec):
    low, high = free_bounds("sol_aa", default_spec)
    assert low == sol_aa_free_floor(default_spec) > 2.0
    assert high >= low + 2.0
    assert free_bounds("sol_aa") == (2.0, 8.0)
    assert free_bounds("sol_exp", default_spec) == (0.01, 0.99)

    eps = default_spec.eps_total
    worst_delta = delta_conservative(default_spec, MAX_C_L1)
    for frac in EPS_V_FRACTION_BOUNDS:
        eps_v = frac * eps
        ratio = lifted_ratio(default_spec, eps_v)
        for delta in (worst_delta, 1.0, 2.0):
            for z in (low, 0.5 * (low + high), high):
                assert 0.0 < sol_eps_aa(default_spec, eps_v, ratio * 10.0 ** (-z), delta) < ratio

    # just below the floor the worst corner has no saturating root
    eps_v = EPS_V_FRACTION_BOUNDS[1] * eps
    ratio = lifted_ratio(default_spec, eps_v)
    with pytest.raises(DomainError):
        sol_eps_aa(default_spec, eps_v, ratio * 10.0 ** (-(low - 0.05)), worst_delta)


@pytest.mark.slow
def test_both_optimizer_methods_agree(default_spec):
    by_aa = optimize(default_spec, method="sol_aa", eval_limit=240, seed=1234)
    by_exp = optimize(default_spec, method="sol_exp", eval_limit=240, seed=1234)
    assert abs(by_aa.report.c_a / by_exp.report.c_a - 1.0) <= 0.1
