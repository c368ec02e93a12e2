# utils/quad.py
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import pandas as pd

from utils.errors import DomainError
from utils.kernel import integrate_abs, kernel_g, make_kernel_params

MAX_LEGENDRE_POINTS = 200
DEFAULT_MAX_PLAN_TERMS = 2_000_000


def _legendre_pair(n, x):
    """P_n(x) and P_{n-1}(x) by the three-term recurrence"""
    p_prev = np.ones_like(x)
    p = x.copy()
    for j in range(2, n + 1):
        p_prev, p = p, ((2 * j - 1) * x * p - (j - 1) * p_prev) / j
    return p, p_prev


def legendre_rule(n):
    """Gauss-Legendre nodes (ascending) and weights on [-1, 1]"""
    n = int(n)
    if not 1 <= n <= MAX_LEGENDRE_POINTS:
        raise DomainError(f"Legendre rule supports 1 <= n <= {MAX_LEGENDRE_POINTS}, got {n}")
    if n == 1:
        return np.array([0.0]), np.array([2.0])

    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (4 * k - 1) / (4 * n + 2))
    for _ in range(100):
        p, p_prev = _legendre_pair(n, x)
        dp = n * (x * p - p_prev) / (x * x - 1.0)
        dx = p / dp
        x -= dx
        if np.max(np.abs(dx)) < 1e-15:
            break

    p, p_prev = _legendre_pair(n, x)
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    w = 2.0 / ((1.0 - x * x) * dp * dp)

    order = np.argsort(x)
    x, w = x[order], w[order]
    # exact mirror symmetry
    x = (x - x[::-1]) / 2.0
    w = (w + w[::-1]) / 2.0
    return x, w


@dataclass
class DiscretizationPlan:
    header: object
    nodes: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)
    c_l1: float
    materialized: bool = True

    def to_dict(self):
        return plan_summary(self)


@lru_cache(maxsize=512)
def coefficient_l1_limit(beta, k_cut):
    """Limit of sum |c_j| as h -> 0: the integral of |g| over [-K, K]"""
    params = make_kernel_params(beta)
    return 2.0 * integrate_abs(params, 0.0, k_cut)


def _plan_arrays(params, header):
    zeta, omega = legendre_rule(header.q_points)
    half = header.half_intervals
    h = header.h
    m = np.arange(-half, half)
    centres = (2 * m + 1) * h / 2.0
    nodes = (centres[:, None] + (h / 2.0) * zeta[None, :]).ravel()
    weights = np.tile((h / 2.0) * omega, m.size)
    coeffs = weights * kernel_g(params, nodes)
    return nodes, np.asarray(coeffs, dtype=complex)


def build_plan(params, header, materialize=None, max_terms=DEFAULT_MAX_PLAN_TERMS):
    """
    Nodes k_{q,m} = (h/2) zeta_q + (2m+1) h/2 and weights c_{q,m} = (h/2) omega_q g(k_{q,m}).

    Plans above max_terms summands keep only the header and the coefficient
    norm, taken from its h -> 0 limit.
    """
    if materialize is None:
        materialize = header.m_total <= max_terms
    if not materialize:
        c_l1 = coefficient_l1_limit(params.beta, header.k_cut)
        return DiscretizationPlan(header=header, nodes=np.empty(0), coeffs=np.empty(0, dtype=complex),
                                  c_l1=c_l1, materialized=False)

    nodes, coeffs = _plan_arrays(params, header)
    c_l1 = float(np.abs(coeffs).sum())
    return DiscretizationPlan(header=header, nodes=nodes, coeffs=coeffs, c_l1=c_l1, materialized=True)


def plan_summary(plan):
    header = plan.header
    summary = header.to_dict()
    summary.update({
        "c_l1": plan.c_l1,
        "materialized": plan.materialized,
        "log2_m_total": (header.m_total - 1).bit_length(),
    })
    if plan.materialized:
        summary["coefficient_sum_re"] = float(plan.coeffs.sum().real)
        summary["coefficient_sum_im"] = float(plan.coeffs.sum().imag)
    return summary


def export_plan_csv(plan, path):
    """Write index, k_j, Re c_j, Im c_j for a materialised plan"""
    if not plan.materialized:
        raise DomainError(f"plan with M = {plan.header.m_total} summands was not materialised")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame({
        "index": np.arange(plan.nodes.size),
        "k_j": plan.nodes,
        "re_c_j": plan.coeffs.real,
        "im_c_j": plan.coeffs.imag,
    })
    df.to_csv(path, index=False, float_format="%.17g")
    return path
