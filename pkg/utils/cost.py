# utils/cost.py
import math
import numbers
from dataclasses import dataclass, asdict, replace
from pathlib import Path

import pandas as pd

from utils.errors import DomainError, InfeasibleError
from utils.kernel import make_kernel_params
from utils.signpoly import degree_bound, degree_upper

ETA = 4.0 / (math.sqrt(2.0 * math.pi) * math.exp(1.0 / 13.0))
REGISTER_OVERHEAD = 5
# six doubly controlled U_A queries plus the two extra calls per Hamiltonian simulation
EXCLUDED_QUERIES_PER_CALL = 8
RLS_COLUMNS = ("t", "rls_c_a", "rls_c_0")


@dataclass(frozen=True)
class ProblemSpec:
    t: float
    alpha_a: float = 1.0
    norm_l: float = 1.0
    norm_u0: float = 1.0
    norm_ut: float = 1.0
    eps_total: float = 1e-10
    beta: float = 0.75
    m_a: int = 0

    def __post_init__(self):
        for name in ("t", "alpha_a", "norm_l", "norm_u0", "norm_ut", "eps_total"):
            value = getattr(self, name)
            if not (isinstance(value, numbers.Real) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
            # numpy scalars are stored as plain floats
            object.__setattr__(self, name, float(value))
        if self.norm_l > self.alpha_a * (1.0 + 1e-12):
            raise DomainError(f"||L|| = {self.norm_l} exceeds the subnormalisation alpha_A = {self.alpha_a}")
        if self.norm_ut > self.norm_u0 * (1.0 + 1e-12):
            raise DomainError("||u(t)|| cannot exceed ||u0|| when L is positive semidefinite")
        if int(self.m_a) != self.m_a or self.m_a < 0:
            raise DomainError(f"m_A must be a nonnegative integer, got {self.m_a!r}")
        object.__setattr__(self, "m_a", int(self.m_a))
        # validates beta
        make_kernel_params(self.beta)

    @property
    def kernel(self):
        return make_kernel_params(self.beta)

    def with_beta(self, beta):
        return replace(self, beta=float(beta))

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LCHSErrors:
    eps_q: float
    eps_lchs: float
    eps_v: float

    @property
    def eps_prime(self):
        return self.eps_v + self.eps_lchs


@dataclass(frozen=True)
class CostReport:
    delta: float
    c_lchs: int
    qubitization_per_call: int
    c_a: int
    c_r: int
    c_0: int
    ancilla_estimate: int
    success_prob_lower: float
    m_total: int = 0
    k_cut: float = 0.0
    c_l1: float = 0.0
    eps_lchs: float = 0.0
    eps_prime: float = 0.0
    alpha_select: float = 0.0
    excluded_queries_per_call: int = EXCLUDED_QUERIES_PER_CALL

    def to_dict(self):
        return asdict(self)


def qubitization_queries(alpha_eff, t, eps_exp):
    """Queries to the SELECT block encoding per Hamiltonian simulation, at least one"""
    if not eps_exp > 0:
        raise DomainError(f"eps_exp must be positive, got {eps_exp!r}")
    if alpha_eff < 0 or t < 0:
        raise DomainError("alpha_eff and t must be nonnegative")
    n = math.ceil(math.e * alpha_eff * t + 2.0 * math.log(2.0 * ETA / eps_exp))
    return max(1, int(n))


def select_block_encoding(spec, k_cut, eps_a, eps_r, m_total):
    """Block-encoding parameters of the SELECT Hamiltonian sum_j |j><j| (k_j L + H)"""
    root = math.sqrt(1.0 + k_cut * k_cut)
    return {
        "alpha": root * spec.alpha_a,
        "ancillas": int(spec.m_a) + 2,
        "error": root * eps_a + 2.0 * m_total * root * spec.alpha_a * eps_r,
    }


def lchs_errors(spec, plan, budget):
    """Error of one LCHS block encoding and of the approximated output vector"""
    header = plan.header
    select = select_block_encoding(spec, header.k_cut, budget.eps_a, budget.eps_r, header.m_total)
    eps_q = budget.eps_exp + spec.t * select["error"]
    eps_lchs = spec.norm_u0 * (budget.eps_c + plan.c_l1 * eps_q) + plan.c_l1 * budget.eps_0
    eps_v = spec.norm_u0 * (budget.eps_trunc + budget.eps_disc)
    return LCHSErrors(eps_q=eps_q, eps_lchs=eps_lchs, eps_v=eps_v)


def _checked_delta(value, condition):
    if not value > 0.0:
        raise InfeasibleError(f"amplitude gap {value:.6g} is not positive", condition=condition)
    if value > 2.0 * (1.0 + 1e-12):
        raise InfeasibleError(f"amplitude gap {value:.6g} exceeds 2", condition="delta <= 2")
    return min(value, 2.0)


def delta_gap(spec, c_l1, eps_lchs, eps_v):
    """2(||u(t)|| - eps_LCHS - eps_v)/(||u0|| ||c||_1)"""
    value = 2.0 * (spec.norm_ut - eps_lchs - eps_v) / (spec.norm_u0 * c_l1)
    return _checked_delta(value, "norm_ut > eps_lchs + eps_v")


def delta_conservative(spec, c_l1):
    """2(||u(t)|| - eps)/(||u0|| ||c||_1), the gap with the whole budget spent"""
    value = 2.0 * (spec.norm_ut - spec.eps_total) / (spec.norm_u0 * c_l1)
    return _checked_delta(value, "norm_ut > eps_total")


def c_lchs(delta, eps_aa):
    return degree_bound(delta, eps_aa)


def c_lchs_upper(delta, eps_aa):
    return degree_upper(delta, eps_aa)


def lchs_registers(m_total, m_a):
    """ceil(log2 M) + m_A + 5"""
    return (int(m_total) - 1).bit_length() + int(m_a) + REGISTER_OVERHEAD


def assemble_costs(spec, plan, budget):
    """Query counts C_A, C_R, C_0 for an amplified LCHS output"""
    header = plan.header
    errors = lchs_errors(spec, plan, budget)
    delta = delta_gap(spec, plan.c_l1, errors.eps_lchs, errors.eps_v)
    degree = c_lchs(delta, budget.eps_aa)
    alpha_select = math.sqrt(1.0 + header.k_cut ** 2) * spec.alpha_a
    per_call = qubitization_queries(alpha_select, spec.t, budget.eps_exp)
    c_a = degree * per_call
    amplitude = (spec.norm_ut - errors.eps_prime) / (spec.norm_u0 * plan.c_l1)
    success = min(1.0, max(0.0, amplitude)) ** 2
    return CostReport(
        delta=delta,
        c_lchs=degree,
        qubitization_per_call=per_call,
        c_a=c_a,
        c_r=header.m_total * c_a,
        c_0=degree,
        ancilla_estimate=lchs_registers(header.m_total, spec.m_a),
        success_prob_lower=success,
        m_total=header.m_total,
        k_cut=header.k_cut,
        c_l1=plan.c_l1,
        eps_lchs=errors.eps_lchs,
        eps_prime=errors.eps_prime,
        alpha_select=alpha_select,
    )


def speedup_ratio(lchs, rls_c_a, rls_c_0, chi):
    """(C_A^RLS + chi C_0^RLS)/(C_A^LCHS + chi C_0^LCHS)"""
    if rls_c_a <= 0 or rls_c_0 <= 0 or lchs.c_a <= 0 or lchs.c_0 <= 0:
        raise DomainError("query counts must be positive")
    if chi < 0:
        raise DomainError(f"chi must be nonnegative, got {chi!r}")
    return (rls_c_a + chi * rls_c_0) / (lchs.c_a + chi * lchs.c_0)


def load_rls_table(path):
    """Read externally supplied RLS costs with columns t, rls_c_a, rls_c_0"""
    if not Path(path).exists():
        raise DomainError(f"RLS table not found: {path}")
    try:
        df = pd.read_csv(path)
    except Exception as e:
        raise DomainError(f"could not parse RLS table {path}: {e}") from e
    missing = [c for c in RLS_COLUMNS if c not in df.columns]
    if missing:
        raise DomainError(f"RLS table {path} is missing columns {missing}")
    df = df[list(RLS_COLUMNS)]
    try:
        df = df.astype(float)
    except (TypeError, ValueError) as e:
        raise DomainError(f"RLS table {path} has non-numeric entries: {e}") from e
    if df.empty or df.isna().any().any() or (df <= 0).any().any():
        raise DomainError(f"RLS table {path} needs positive entries in every row")
    return df.reset_index(drop=True)
