# utils/budget.py
import math
from dataclasses import dataclass, asdict, field, fields

import numpy as np
from scipy.optimize import differential_evolution, minimize

from utils.bounds import plan_discretization
from utils.cost import (assemble_costs, c_lchs, c_lchs_upper, delta_conservative, delta_gap,
                        lchs_errors)
from utils.errors import DomainError, InfeasibleError, LCHSError
from utils.quad import DEFAULT_MAX_PLAN_TERMS, build_plan
from utils.specfun import lambert_w_m1_from_log

CONSTRAINT_SLACK = 1e-12
MAX_FIXED_POINT_ITERATIONS = 20
INFEASIBLE_PENALTY = 1e3
UPPER_PREFACTOR = 8.0 * math.e * math.sqrt(1.0 + 1.0 / math.e)
METHODS = ("sol_aa", "sol_exp")
EPS_V_FRACTION_BOUNDS = (0.02, 0.98)
MAX_C_L1 = 2.0


@dataclass(frozen=True)
class ErrorBudget:
    eps_trunc: float
    eps_disc: float
    eps_aa: float
    eps_exp: float
    eps_c: float = 0.0
    eps_0: float = 0.0
    eps_a: float = 0.0
    eps_r: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (math.isfinite(value) and value >= 0.0):
                raise DomainError(f"{f.name} must be finite and nonnegative, got {value!r}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**{f.name: float(data.get(f.name, 0.0)) for f in fields(cls)})


@dataclass(frozen=True)
class ConstraintCheck:
    satisfied: bool
    lhs: float
    slack: float
    amplification_condition: bool
    robustness_condition: bool
    c_lchs: int = None
    delta: float = None
    eps_lchs: float = 0.0
    eps_v: float = 0.0
    failed: str = ""

    def to_dict(self):
        return asdict(self)


@dataclass
class BudgetResult:
    budget: ErrorBudget
    plan: object
    report: object
    check: ConstraintCheck
    trace: list = field(default_factory=list)
    method: str = "equal"
    evaluations: int = 0
    exhausted: bool = False
    fallback_to_equal: bool = False
    beta: float = 0.0

    def __iter__(self):
        return iter((self.budget, self.plan, self.report))

    def to_dict(self):
        return {
            "method": self.method,
            "beta": self.beta,
            "budget": self.budget.to_dict(),
            "plan": self.plan.to_dict(),
            "report": self.report.to_dict(),
            "constraint": self.check.to_dict(),
            "fixed_point_trace": list(self.trace),
            "evaluations": self.evaluations,
            "exhausted": self.exhausted,
            "fallback_to_equal": self.fallback_to_equal,
        }


def output_norm_bound(spec, eps_v):
    """||v(t)|| <= ||u(t)|| + eps_v"""
    return spec.norm_ut + eps_v


def lifted_ratio(spec, eps_v):
    """(eps - eps_v)/(||u(t)|| + eps_v), the share left for amplification and simulation"""
    return (spec.eps_total - eps_v) / output_norm_bound(spec, eps_v)


def perfect_oracle_lhs(spec, eps_v, eps_aa, eps_exp, degree):
    """eps_v + (||u(t)|| + eps_v)(eps_AA + 9/2 eps_exp C_LCHS)"""
    return eps_v + output_norm_bound(spec, eps_v) * (eps_aa + 4.5 * eps_exp * degree)


def check_constraint(spec, plan, budget):
    """Evaluate the full error inequality and the two amplification side conditions"""
    errors = lchs_errors(spec, plan, budget)
    eps = spec.eps_total
    norm_v = output_norm_bound(spec, errors.eps_v)
    robust = errors.eps_lchs / (plan.c_l1 * spec.norm_u0) <= 1.0 / 12.0

    try:
        delta = delta_gap(spec, plan.c_l1, errors.eps_lchs, errors.eps_v)
        degree = c_lchs(delta, budget.eps_aa)
    except LCHSError as e:
        return ConstraintCheck(satisfied=False, lhs=math.inf, slack=-math.inf,
                               amplification_condition=False, robustness_condition=robust,
                               eps_lchs=errors.eps_lchs, eps_v=errors.eps_v, failed=str(e))

    lhs = errors.eps_v + norm_v * (
        budget.eps_aa + 9.0 * degree / (2.0 * plan.c_l1 * spec.norm_u0) * errors.eps_lchs)
    amplification = eps <= 3.0 * degree * norm_v / 8.0
    within = lhs <= eps * (1.0 + CONSTRAINT_SLACK)

    failed = []
    if not within:
        failed.append(f"error sum {lhs:.6g} exceeds eps = {eps:.6g}")
    if not amplification:
        failed.append("eps <= 3 C_LCHS ||v(t)|| / 8")
    if not robust:
        failed.append("eps_LCHS / (||c||_1 ||u0||) <= 1/12")
    return ConstraintCheck(
        satisfied=not failed, lhs=lhs, slack=eps - lhs,
        amplification_condition=amplification, robustness_condition=robust,
        c_lchs=degree, delta=delta, eps_lchs=errors.eps_lchs, eps_v=errors.eps_v,
        failed="; ".join(failed),
    )


def _equal_shares(spec, plan, eps_aa, eps_v, degree, perfect_oracle):
    eps = spec.eps_total
    norm_v = output_norm_bound(spec, eps_v)
    header = plan.header
    base = eps / (36.0 * norm_v * degree)
    eps_exp = base
    if perfect_oracle:
        eps_c = eps_0 = eps_a = eps_r = 0.0
    else:
        root = math.sqrt(1.0 + header.k_cut ** 2)
        eps_c = plan.c_l1 * base
        eps_0 = spec.norm_u0 * base
        eps_a = base / (root * spec.t)
        eps_r = base / (2.0 * header.m_total * spec.t * root * spec.alpha_a)
    share = eps / (8.0 * spec.norm_u0)
    return ErrorBudget(eps_trunc=share, eps_disc=share, eps_aa=eps_aa, eps_exp=eps_exp,
                       eps_c=eps_c, eps_0=eps_0, eps_a=eps_a, eps_r=eps_r)


def equal_budget(spec, perfect_oracle=True, tight=False, max_plan_terms=DEFAULT_MAX_PLAN_TERMS,
                 max_iterations=MAX_FIXED_POINT_ITERATIONS, verbose=False):
    """
    Spread eps evenly over the error contributions.

    C_LCHS sits inside its own shares, so the split is iterated from
    C_LCHS(delta_0, eps/8||v||) with delta_0 the error-free gap until the
    degree implied by the split no longer exceeds the one it was built with.
    """
    eps = spec.eps_total
    if eps >= spec.norm_ut:
        raise InfeasibleError(f"eps = {eps:.6g} is not below ||u(t)|| = {spec.norm_ut:.6g}",
                              condition="eps_total < norm_ut")

    share = eps / (8.0 * spec.norm_u0)
    eps_v = spec.norm_u0 * 2.0 * share
    eps_aa = eps / (8.0 * output_norm_bound(spec, eps_v))

    params = spec.kernel
    header = plan_discretization(spec, share, share, tight=tight)
    plan = build_plan(params, header, max_terms=max_plan_terms)

    degree = c_lchs(delta_gap(spec, plan.c_l1, 0.0, 0.0), eps_aa)
    trace = [degree]
    budget = None
    for iteration in range(max_iterations):
        budget = _equal_shares(spec, plan, eps_aa, eps_v, degree, perfect_oracle)
        errors = lchs_errors(spec, plan, budget)
        implied = c_lchs(delta_gap(spec, plan.c_l1, errors.eps_lchs, errors.eps_v), eps_aa)
        trace.append(implied)
        if verbose:
            print(f"🔍 fixed point {iteration + 1}: C_LCHS {degree} -> {implied}")
        if implied <= degree:
            break
        degree = implied
    else:
        raise InfeasibleError(f"equal split did not settle within {max_iterations} iterations",
                              condition="fixed point convergence")

    report = assemble_costs(spec, plan, budget)
    check = check_constraint(spec, plan, budget)
    if not check.satisfied:
        raise InfeasibleError(f"equal split violates the error constraint: {check.failed}",
                              condition=check.failed)
    return BudgetResult(budget=budget, plan=plan, report=report, check=check, trace=trace,
                        method="equal", beta=spec.beta)


def sol_eps_aa(spec, eps_v, eps_exp, delta):
    """
    eps_AA saturating the constraint for given (eps_v, eps_exp), with C_LCHS at its upper form.

    With kappa = 36 e sqrt(1+1/e) eps_exp / delta and b = 64 sqrt(2)/(3 sqrt(pi) delta),
    eps_AA + kappa ln(b/eps_AA) = R solves to eps_AA = -kappa W-1(-(b/kappa) exp(-R/kappa)).
    """
    if not (0.0 <= eps_v < spec.eps_total):
        raise DomainError(f"eps_v must lie in [0, eps), got {eps_v!r}")
    if not eps_exp > 0.0:
        raise DomainError(f"eps_exp must be positive, got {eps_exp!r}")
    if not (0.0 < delta <= 2.0):
        raise DomainError(f"delta must lie in (0, 2], got {delta!r}")

    ratio = lifted_ratio(spec, eps_v)
    kappa = 4.5 * UPPER_PREFACTOR * eps_exp / delta
    b = 64.0 * math.sqrt(2.0) / (3.0 * math.sqrt(math.pi) * delta)
    log_arg = math.log(b / kappa) - ratio / kappa
    if log_arg > -1.0:
        raise DomainError("(eps_v, eps_exp) cannot saturate the budget: W-1 argument below -1/e")
    eps_aa = -kappa * lambert_w_m1_from_log(log_arg)
    if not (0.0 < eps_aa < ratio) or eps_aa >= b:
        raise DomainError(f"saturating eps_AA = {eps_aa:.6g} leaves the admissible range")
    return eps_aa


def sol_eps_exp(spec, eps_v, eps_aa, delta_conservative):
    """eps_exp = (R - eps_AA) 2/(9 C_LCHS(delta, eps_AA))"""
    bracket = lifted_ratio(spec, eps_v) - eps_aa
    if bracket < 0.0:
        raise InfeasibleError(f"eps_AA = {eps_aa:.6g} already exceeds the lifted budget",
                              condition="(eps - eps_v)/(||u(t)|| + eps_v) > eps_AA")
    if bracket == 0.0:
        return 0.0
    return bracket * 2.0 / (9.0 * c_lchs(delta_conservative, eps_aa))


class _EvaluationLimit(Exception):
    pass


class _Search:
    """Objective over (beta, eps_v fraction, free error) with best-feasible bookkeeping"""

    def __init__(self, spec, method, eval_limit, tight, max_plan_terms):
        self.spec = spec
        self.method = method
        self.eval_limit = eval_limit
        self.tight = tight
        self.max_plan_terms = max_plan_terms
        self.evaluations = 0
        self.best = None
        self.best_cost = math.inf

    def candidate(self, x):
        beta, frac_v, free = (float(v) for v in x)
        spec = self.spec.with_beta(beta)
        eps_v = frac_v * spec.eps_total
        share = eps_v / (2.0 * spec.norm_u0)
        header = plan_discretization(spec, share, share, tight=self.tight)
        plan = build_plan(spec.kernel, header, max_terms=self.max_plan_terms)
        ratio = lifted_ratio(spec, eps_v)

        if self.method == "sol_aa":
            eps_exp = ratio * 10.0 ** (-free)
            delta = delta_gap(spec, plan.c_l1, plan.c_l1 * spec.norm_u0 * eps_exp, eps_v)
            eps_aa = sol_eps_aa(spec, eps_v, eps_exp, delta)
        else:
            eps_aa = free * ratio
            eps_exp = sol_eps_exp(spec, eps_v, eps_aa, delta_conservative(spec, plan.c_l1))

        budget = ErrorBudget(eps_trunc=share, eps_disc=share, eps_aa=eps_aa, eps_exp=eps_exp)
        check = check_constraint(spec, plan, budget)
        # ceilings in the exact degree can overshoot the upper form; pull eps_AA back
        for _ in range(8):
            if check.satisfied or check.c_lchs is None:
                break
            eps_aa = ratio - 4.5 * eps_exp * check.c_lchs * (1.0 + 1e-9)
            if eps_aa <= 0.0:
                break
            budget = ErrorBudget(eps_trunc=share, eps_disc=share, eps_aa=eps_aa, eps_exp=eps_exp)
            check = check_constraint(spec, plan, budget)
        if not check.satisfied:
            raise InfeasibleError(check.failed or "candidate violates the constraint",
                                  condition=check.failed)
        report = assemble_costs(spec, plan, budget)
        return BudgetResult(budget=budget, plan=plan, report=report, check=check,
                            method=self.method, beta=beta)

    def __call__(self, x):
        if self.evaluations >= self.eval_limit:
            raise _EvaluationLimit()
        self.evaluations += 1
        try:
            result = self.candidate(x)
        except LCHSError:
            return INFEASIBLE_PENALTY
        cost = math.log10(result.report.c_a)
        if cost < self.best_cost:
            self.best_cost = cost
            self.best = result
        return cost


def sol_aa_free_floor(spec):
    """
    Smallest z in eps_exp = R 10^-z for which sol_eps_aa has a root.

    Taken at the worst corner of the search box: the largest eps_v share and
    the conservative gap at ||c||_1 = 2. With s = R/kappa the W-1 argument
    stays at or below -1/e while s - ln s >= 1 + ln(b/R).
    """
    eps_v = EPS_V_FRACTION_BOUNDS[1] * spec.eps_total
    ratio = lifted_ratio(spec, eps_v)
    delta = min(2.0, delta_conservative(spec, MAX_C_L1))
    b = 64.0 * math.sqrt(2.0) / (3.0 * math.sqrt(math.pi) * delta)
    c = 1.0 + math.log(b / ratio)
    s = -lambert_w_m1_from_log(-c) if c > 1.0 else 1.0
    return math.log10(4.5 * UPPER_PREFACTOR * s / delta) + 0.01


def free_bounds(method, spec=None):
    if method == "sol_aa":
        # eps_exp = R 10^-z
        low, high = 2.0, 8.0
        if spec is not None:
            low = max(low, sol_aa_free_floor(spec))
            high = max(high, low + 2.0)
        return (low, high)
    return (0.01, 0.99)


def optimize(spec, method="sol_aa", eval_limit=240, seed=1234, beta_bounds=(0.4, 0.95),
             tight=False, max_plan_terms=DEFAULT_MAX_PLAN_TERMS, verbose=False):
    """
    Minimise C_A over beta, the eps_v share of eps and one free error parameter.

    Global differential evolution followed by a bounded Powell polish, both
    inside eval_limit objective calls. The equal split is returned instead when
    it is cheaper.
    """
    if method not in METHODS:
        raise DomainError(f"unknown optimisation method {method!r}, expected one of {METHODS}")
    eval_limit = int(eval_limit)
    if eval_limit < 10:
        raise DomainError(f"eval_limit must be at least 10, got {eval_limit}")
    if spec.eps_total >= spec.norm_ut:
        raise InfeasibleError(f"eps = {spec.eps_total:.6g} is not below ||u(t)|| = {spec.norm_ut:.6g}",
                              condition="eps_total < norm_ut")

    search = _Search(spec, method, eval_limit, tight, max_plan_terms)
    bounds = [tuple(beta_bounds), EPS_V_FRACTION_BOUNDS, free_bounds(method, spec)]
    dims = len(bounds)
    popsize = 5
    global_share = int(eval_limit * 0.6)
    maxiter = max(1, global_share // (popsize * dims) - 1)

    x_best = None
    try:
        de = differential_evolution(search, bounds, popsize=popsize, maxiter=maxiter, polish=False,
                                    init="latinhypercube", tol=0.0, updating="immediate",
                                    rng=np.random.default_rng(seed))
        x_best = de.x
        remaining = eval_limit - search.evaluations
        if remaining > 0:
            minimize(search, x_best, method="Powell", bounds=bounds,
                     options={"maxfev": remaining, "xtol": 1e-4, "ftol": 1e-9})
    except _EvaluationLimit:
        pass
    exhausted = search.evaluations >= eval_limit

    if verbose:
        print(f"🔍 {method}: {search.evaluations} evaluations, best log10 C_A = {search.best_cost:.6f}")

    try:
        equal = equal_budget(spec, tight=tight, max_plan_terms=max_plan_terms)
    except InfeasibleError:
        equal = None

    best = search.best
    if best is None and equal is None:
        raise InfeasibleError(f"no feasible budget found within {search.evaluations} evaluations",
                              condition="feasible candidate")
    if best is None or (equal is not None and equal.report.c_a < best.report.c_a):
        best = equal
        best.fallback_to_equal = True
        best.method = method
    best.evaluations = search.evaluations
    best.exhausted = exhausted
    return best
