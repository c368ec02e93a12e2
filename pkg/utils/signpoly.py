# utils/signpoly.py
"""
Degree bounds for polynomial approximations of sign(x - s) outside a gap of
width delta, and an explicit Chebyshev construction of the approximant:

    Gaussian  exp(-(kx)^2)   truncated Jacobi-Anger series in T_2j(x)
    erf(kx)                  term-wise Chebyshev antiderivative, scaled by 2k/sqrt(pi)
    sign(x - s)              erf(k(x - s)) re-expanded at degree n
"""
import math
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np
import pandas as pd
from numpy.polynomial import chebyshev

from utils.errors import DomainError
from utils.specfun import bessel_i_scaled, erf

EPS_MAX = 2.0 * math.sqrt(2.0 / (math.e * math.pi))
SQRT_PI = math.sqrt(math.pi)
DEFAULT_GRID_POINTS = 100_000
GRID_INFLATION = 1.05


def _check_delta_eps(delta, eps):
    if not (0.0 < delta <= 2.0):
        raise DomainError(f"gap delta must lie in (0, 2], got {delta!r}")
    if not (0.0 < eps < EPS_MAX):
        raise DomainError(f"eps must lie in (0, {EPS_MAX:.6f}), got {eps!r}")


def _log_term(eps):
    return math.log(8.0 / (math.pi * eps * eps))


def erf_scale(delta, eps):
    """k = (sqrt(2)/delta) ln^(1/2)(8/(pi eps^2))"""
    _check_delta_eps(delta, eps)
    return math.sqrt(2.0) / delta * math.sqrt(_log_term(eps))


def _gauss_branch(delta, eps):
    return 4.0 / (delta * delta) * _log_term(eps) * math.e ** 2


def degree_bound(delta, eps):
    """Odd degree of the sign approximant for gap delta and accuracy eps"""
    _check_delta_eps(delta, eps)
    k = erf_scale(delta, eps)
    t = math.ceil(_gauss_branch(delta, eps))
    n = math.ceil(math.sqrt(8.0 * t * math.log(64.0 * k / (3.0 * SQRT_PI * eps))) + 1.0)
    if n % 2 == 0:
        n += 1
    return n


def degree_upper(delta, eps):
    """(8e/delta) sqrt(1 + 1/e) ln(64 sqrt(2)/(3 sqrt(pi) delta eps))"""
    _check_delta_eps(delta, eps)
    return (8.0 * math.e / delta) * math.sqrt(1.0 + 1.0 / math.e) * math.log(
        64.0 * math.sqrt(2.0) / (3.0 * SQRT_PI * delta * eps))


def max_branch_holds(delta, eps):
    """The Gaussian branch dominates the max in the auxiliary truncation t"""
    k = erf_scale(delta, eps)
    return _gauss_branch(delta, eps) >= math.log(32.0 * k / (3.0 * SQRT_PI * eps))


@dataclass(frozen=True)
class SignPolyParams:
    delta: float
    eps: float
    shift: float
    k_scale: float
    degree: int
    trunc_t: int

    def to_dict(self):
        return asdict(self)


def sign_poly_params(delta, eps, shift=0.0):
    delta, eps, shift = float(delta), float(eps), float(shift)
    _check_delta_eps(delta, eps)
    if shift - delta / 2.0 < -1.0 or shift + delta / 2.0 > 1.0:
        raise DomainError(f"gap [{shift - delta / 2:.4g}, {shift + delta / 2:.4g}] leaves [-1, 1]")
    k = erf_scale(delta, eps)
    t = math.ceil(max(math.log(32.0 * k / (3.0 * SQRT_PI * eps)), _gauss_branch(delta, eps)))
    return SignPolyParams(delta=delta, eps=eps, shift=shift, k_scale=k,
                          degree=degree_bound(delta, eps), trunc_t=t)


@dataclass
class ChebSeries:
    coefficients: np.ndarray

    def __post_init__(self):
        self.coefficients = np.asarray(self.coefficients, dtype=float)

    @property
    def degree(self):
        return self.coefficients.size - 1

    def __call__(self, x):
        # numpy's chebval runs the Clenshaw recurrence
        return chebyshev.chebval(x, self.coefficients)

    def export_csv(self, path):
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        df = pd.DataFrame({"order": np.arange(self.coefficients.size), "coefficient": self.coefficients})
        df.to_csv(path, index=False, float_format="%.17g")
        return path


def gauss_degree(k_scale, eps):
    """Degree in x that brings the Gaussian series within eps"""
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps!r}")
    t = gauss_trunc_t(k_scale, eps)
    return max(2, math.ceil(math.sqrt(8.0 * t * math.log(4.0 / eps))))


def gauss_trunc_t(k_scale, eps):
    return math.ceil(max(math.log(2.0 / eps), k_scale * k_scale * math.e ** 2 / 2.0))


def gauss_error_bound(k_scale, n, t):
    """2 exp(-n^2/(8t)) + exp(-k^2/2 - t)"""
    return 2.0 * math.exp(-(n * n) / (8.0 * t)) + math.exp(-k_scale * k_scale / 2.0 - t)


def build_gauss_poly(k_scale, n):
    """
    Chebyshev series of exp(-(kx)^2) on [-1, 1] up to degree n.

    With y = 2x^2 - 1 and lam = k^2/2 the Gaussian is exp(-lam) exp(-lam y), whose
    Jacobi-Anger expansion sum (2 - delta_j0) (-1)^j I_j(lam) T_j(y) becomes a
    series in T_2j(x) because T_j(2x^2 - 1) = T_2j(x).
    """
    n = int(n)
    if n < 2:
        raise DomainError(f"Gaussian series needs degree >= 2, got {n}")
    lam = float(k_scale) ** 2 / 2.0
    half = n // 2
    scaled = bessel_i_scaled(half, lam)
    signs = np.where(np.arange(half + 1) % 2 == 0, 1.0, -1.0)
    coefficients = np.zeros(n + 1)
    coefficients[0::2][:half + 1] = 2.0 * signs * scaled
    coefficients[0] = scaled[0]
    return ChebSeries(coefficients)


def build_erf_poly(k_scale, n):
    """Odd Chebyshev series of erf(kx) of degree n (n odd), via the Gaussian antiderivative"""
    n = int(n)
    gauss = build_gauss_poly(k_scale, n - 1)
    integral = chebyshev.chebint(gauss.coefficients, lbnd=0.0)
    coefficients = 2.0 * k_scale / SQRT_PI * integral
    coefficients[0::2] = 0.0
    return ChebSeries(coefficients[:n + 1])


def build_sign_poly(params):
    """Approximant of sign(x - s) of degree params.degree"""
    n = params.degree
    if params.shift == 0.0:
        return build_erf_poly(params.k_scale, n)
    # the shifted step needs arguments outside [-1, 1]; re-expand at n+1 Chebyshev points
    k, s = params.k_scale, params.shift
    coefficients = chebyshev.chebinterpolate(lambda x: erf(k * (x - s)), n)
    return ChebSeries(coefficients)


def _outside_gap(params, grid_points):
    x = np.linspace(-1.0, 1.0, int(grid_points))
    lo = params.shift - params.delta / 2.0
    hi = params.shift + params.delta / 2.0
    x = x[(x <= lo) | (x >= hi)]
    return np.concatenate([x, [lo, hi]])


def sign_poly_sup_error(series, params, grid_points=DEFAULT_GRID_POINTS):
    """Max |p(x) - sign(x - s)| over a uniform grid outside the gap plus the gap edges"""
    x = _outside_gap(params, grid_points)
    target = np.where(x >= params.shift, 1.0, -1.0)
    return float(np.max(np.abs(series(x) - target)))


def sup_error_on_grid(series, func, grid_points=DEFAULT_GRID_POINTS):
    x = np.linspace(-1.0, 1.0, int(grid_points))
    return float(np.max(np.abs(series(x) - func(x))))


def meets_target(series, params, grid_points=DEFAULT_GRID_POINTS):
    return sign_poly_sup_error(series, params, grid_points) <= GRID_INFLATION * params.eps
