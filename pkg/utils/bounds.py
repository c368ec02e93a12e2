# utils/bounds.py
"""
Truncation cutoff K, Gauss-Legendre point count Q, time step h and the
summand count M of the discretised LCHS integral.
"""
import math
from dataclasses import dataclass, asdict

from utils.errors import DomainError
from utils.kernel import make_kernel_params
from utils.specfun import lambert_w0_from_log, lambert_w_m1

LOG2_E = 1.0 / math.log(2.0)
E_THIRD = math.exp(1.0 / 3.0)
RHS_SLACK = 1e-9
MAX_Q_SCAN = 10_000


@dataclass(frozen=True)
class TruncationResult:
    k_cut: float
    rhs_at_k: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class QuadratureCount:
    """Points per interval: the Lambert value, the verified value and the minimal tight value"""
    q_lambert: int
    q_points: int
    q_tight: int
    safety_iterations: int
    tight: bool = False

    @property
    def selected(self):
        return self.q_tight if self.tight else self.q_points

    def to_dict(self):
        data = asdict(self)
        data["selected"] = self.selected
        return data


@dataclass(frozen=True)
class DiscretizationPlanHeader:
    k_cut: float
    h: float
    intervals: int
    q_points: int
    m_total: int
    h_max: float = 0.0
    beta: float = 0.0
    q_lambert: int = 0
    q_tight: int = 0

    @property
    def half_intervals(self):
        return self.intervals // 2

    def to_dict(self):
        return asdict(self)


def _check_eps(name, eps):
    if not (0.0 < eps < 1.0) or math.isnan(eps):
        raise DomainError(f"{name} must lie in (0, 1), got {eps!r}")


def log_truncation_rhs(params, k):
    return params.log_b_beta - math.log(k) - (k ** params.beta) * params.cos_half / 2.0


def truncation_rhs(params, k):
    """B_beta K^-1 exp(-K^beta cos(beta pi/2)/2), the bound on the dropped tail of g"""
    if k <= 0:
        raise DomainError(f"cutoff must be positive, got {k!r}")
    return math.exp(log_truncation_rhs(params, k))


def truncation_k(params, eps_trunc):
    """
    Smallest K whose tail bound equals eps_trunc.

    With u = K^beta and c = cos(beta pi/2) the bound B/K exp(-u c/2) = eps
    rearranges to (beta c u/2) exp(beta c u/2) = (beta c/2)(B/eps)^beta, so
    u = 2 W0(z)/(beta c). z is carried as its logarithm throughout.
    """
    eps_trunc = float(eps_trunc)
    _check_eps("eps_trunc", eps_trunc)
    beta = params.beta
    c = params.cos_half
    log_z = math.log(beta * c / 2.0) + beta * (params.log_b_beta - math.log(eps_trunc))
    if not math.isfinite(log_z):
        raise DomainError(f"truncation argument overflows for beta={beta}, eps={eps_trunc}")
    w = lambert_w0_from_log(log_z)
    u = 2.0 * w / (beta * c)
    k_cut = math.exp(math.log(u) / beta)
    return TruncationResult(k_cut=k_cut, rhs_at_k=truncation_rhs(params, k_cut))


def published_k(params, eps_trunc):
    """
    Closed form K = ((2 beta/c) W0((B/eps)^(1/beta) c/(2 beta)))^(1/beta).

    Solves B (2 beta/c)^beta K^(-beta^2) exp(-K^beta c/2) = eps rather than the
    tail bound itself, which makes it a conservative (larger) cutoff.
    """
    eps_trunc = float(eps_trunc)
    _check_eps("eps_trunc", eps_trunc)
    beta = params.beta
    c = params.cos_half
    log_arg = (params.log_b_beta - math.log(eps_trunc)) / beta + math.log(c / (2.0 * beta))
    w = lambert_w0_from_log(log_arg)
    k_cut = math.exp((math.log(2.0 * beta / c) + math.log(w)) / beta)
    return TruncationResult(k_cut=k_cut, rhs_at_k=truncation_rhs(params, k_cut))


def naive_k(params, eps_trunc):
    """(2 ln(B/eps)/cos(beta pi/2))^(1/beta), ignoring the 1/K factor"""
    eps_trunc = float(eps_trunc)
    _check_eps("eps_trunc", eps_trunc)
    log_ratio = params.log_b_beta - math.log(eps_trunc)
    if log_ratio <= 0.0:
        raise DomainError(f"naive cutoff requires eps < B_beta = {params.b_beta:.6g}")
    return (2.0 * log_ratio / params.cos_half) ** (1.0 / params.beta)


def discretization_bound(params, q, k_cut):
    """(2 pi e^(1/3) K)/(3 C_beta e^Q Q)"""
    log_value = math.log(2.0 * math.pi * E_THIRD * k_cut / (3.0 * params.c_beta)) - q - math.log(q)
    return math.exp(log_value)


def tight_discretization_bound(params, q, k_cut):
    """pi e^(1/3) Q 2^(-4Q) 8K/(3 C_beta), before the e^-Q relaxation"""
    log_value = (math.log(8.0 * math.pi * E_THIRD * k_cut / (3.0 * params.c_beta))
                 + math.log(q) - 4.0 * q * math.log(2.0))
    return math.exp(log_value)


def quadrature_q(params, eps_disc, k_cut, tight=False):
    """Gauss-Legendre points per interval for discretisation error eps_disc"""
    eps_disc = float(eps_disc)
    if not eps_disc > 0.0:
        raise DomainError(f"eps_disc must be positive, got {eps_disc!r}")
    if not k_cut > 0.0:
        raise DomainError(f"cutoff must be positive, got {k_cut!r}")

    arg = -3.0 * params.c_beta * eps_disc / (2.0 * math.pi * E_THIRD * LOG2_E * k_cut)
    try:
        w = lambert_w_m1(arg)
    except DomainError:
        raise DomainError(
            f"eps_disc/K = {eps_disc / k_cut:.4g} is too large for the W-1 branch"
        ) from None
    q_lambert = max(1, math.ceil(-(LOG2_E / 4.0) * w))

    q_points = q_lambert
    safety_iterations = 0
    while discretization_bound(params, q_points, k_cut) > eps_disc:
        q_points += 1
        safety_iterations += 1
        if safety_iterations > MAX_Q_SCAN:
            raise DomainError("quadrature count did not settle")

    q_tight = 1
    while tight_discretization_bound(params, q_tight, k_cut) > eps_disc:
        q_tight += 1
        if q_tight > MAX_Q_SCAN:
            raise DomainError("tight quadrature count did not settle")

    return QuadratureCount(q_lambert=q_lambert, q_points=q_points, q_tight=q_tight,
                           safety_iterations=safety_iterations, tight=bool(tight))


def plan_discretization(spec, eps_trunc, eps_disc, tight=False):
    """Cutoff, interval count, effective step and summand count for one instance"""
    if not spec.t > 0 or not spec.norm_l > 0:
        raise DomainError("plan needs t > 0 and ||L|| > 0")
    params = make_kernel_params(spec.beta)
    k_cut = truncation_k(params, eps_trunc).k_cut
    h_max = 1.0 / (math.e * spec.t * spec.norm_l)
    half_intervals = math.ceil(k_cut / h_max)
    h = k_cut / half_intervals
    count = quadrature_q(params, eps_disc, k_cut, tight=tight)
    intervals = 2 * half_intervals
    return DiscretizationPlanHeader(
        k_cut=k_cut,
        h=h,
        intervals=intervals,
        q_points=count.selected,
        m_total=intervals * count.selected,
        h_max=h_max,
        beta=params.beta,
        q_lambert=count.q_lambert,
        q_tight=count.q_tight,
    )
