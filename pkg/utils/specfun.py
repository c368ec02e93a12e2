# utils/specfun.py
"""
Special functions used by the bounds: both real branches of the Lambert W
function, exponentially scaled modified Bessel functions of integer order and
the error function.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from utils.errors import DomainError

INV_E = math.exp(-1.0)
BRANCH_TOLERANCE = 1e-14
MAX_HALLEY_ITERATIONS = 60

# below this distance from the branch point the series alone is exact to rounding
SERIES_ONLY_P = 1e-3
RESCALE_ABOVE = 1e250


@dataclass(frozen=True)
class BranchedSolveResult:
    """Root of w*exp(w) = x on one real branch"""
    value: float
    residual: float
    iterations: int


def _branch_point_p(x):
    return math.sqrt(max(0.0, 2.0 * (1.0 + math.e * x)))


def _branch_series(p, sign):
    # W = -1 + sign*p - p^2/3 + sign*11p^3/72 - 43p^4/540
    return -1.0 + sign * p - p * p / 3.0 + sign * 11.0 * p ** 3 / 72.0 - 43.0 * p ** 4 / 540.0


def _halley_direct(x, w, tol):
    """Halley iteration on f(w) = w*exp(w) - x"""
    iterations = 0
    for iterations in range(1, MAX_HALLEY_ITERATIONS + 1):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol:
            return w, iterations - 1
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(dw) <= 4e-16 * abs(w):
            break
    return w, iterations


def _check_branch_domain(x):
    if x < -INV_E and (-INV_E - x) > BRANCH_TOLERANCE:
        raise DomainError(f"Lambert W is real only for x >= -1/e, got {x!r}")


def _solve_w0_log(log_x):
    """W0 for x = exp(log_x) > e, iterating on w + ln(w) = ln(x)"""
    w = log_x - math.log(log_x) + math.log(log_x) / log_x
    iterations = 0
    for iterations in range(1, MAX_HALLEY_ITERATIONS + 1):
        f = w + math.log(w) - log_x
        fp = 1.0 + 1.0 / w
        fpp = -1.0 / (w * w)
        dw = 2.0 * f * fp / (2.0 * fp * fp - f * fpp)
        w -= dw
        if abs(dw) <= 4e-16 * (1.0 + abs(w)):
            break
    rel = abs(math.expm1(w + math.log(w) - log_x))
    return w, rel, iterations


def solve_lambert_w0(x):
    """Principal branch W0(x) for x >= -1/e, with its residual |W e^W - x|"""
    x = float(x)
    if math.isnan(x):
        raise DomainError("Lambert W argument is NaN")
    _check_branch_domain(x)
    if x <= -INV_E:
        return BranchedSolveResult(-1.0, abs(-INV_E - x), 0)
    if x == 0.0:
        return BranchedSolveResult(0.0, 0.0, 0)
    if math.isinf(x):
        raise DomainError("Lambert W argument must be finite; use lambert_w0_from_log")

    if x > math.e:
        w, rel, iterations = _solve_w0_log(math.log(x))
        return BranchedSolveResult(w, x * rel, iterations)

    # relative to |x|
    tol = 2e-16 * abs(x)
    if x < -0.25:
        p = _branch_point_p(x)
        w = _branch_series(p, +1.0)
        if p < SERIES_ONLY_P:
            return BranchedSolveResult(w, abs(w * math.exp(w) - x), 0)
    elif abs(x) < 1e-3:
        w = x - x * x + 1.5 * x ** 3
    else:
        w = math.log1p(x)
    w, iterations = _halley_direct(x, w, tol)
    w = max(w, -1.0)
    return BranchedSolveResult(w, abs(w * math.exp(w) - x), iterations)


def lambert_w0(x):
    return solve_lambert_w0(x).value


def lambert_w0_from_log(log_x):
    """
    W0(exp(log_x)) without forming exp(log_x).

    Used where the argument of W0 is far outside the double range, e.g. the
    truncation cutoff at tiny error targets.
    """
    log_x = float(log_x)
    if log_x <= 1.0:
        return lambert_w0(math.exp(log_x))
    w, _, _ = _solve_w0_log(log_x)
    return w


def _solve_wm1_log(log_neg_x):
    """W-1 for x = -exp(log_neg_x), iterating on v - ln(v) = -ln(-x) with v = -w"""
    target = -log_neg_x
    l1 = log_neg_x
    l2 = math.log(-l1)
    v = -(l1 - l2 + l2 / l1)
    v = max(v, 1.0 + 1e-12)
    iterations = 0
    for iterations in range(1, MAX_HALLEY_ITERATIONS + 1):
        g = v - math.log(v) - target
        gp = 1.0 - 1.0 / v
        gpp = 1.0 / (v * v)
        dv = 2.0 * g * gp / (2.0 * gp * gp - g * gpp)
        v -= dv
        if abs(dv) <= 4e-16 * (1.0 + abs(v)):
            break
    rel = abs(math.expm1(-(v - math.log(v) - target)))
    return -v, rel, iterations


def solve_lambert_w_m1(x):
    """Lower branch W-1(x) for -1/e <= x < 0, with its residual"""
    x = float(x)
    if math.isnan(x) or x >= 0.0:
        raise DomainError(f"Lambert W-1 requires -1/e <= x < 0, got {x!r}")
    _check_branch_domain(x)
    if x <= -INV_E:
        return BranchedSolveResult(-1.0, abs(-INV_E - x), 0)

    if x < -0.25:
        p = _branch_point_p(x)
        w = _branch_series(p, -1.0)
        if p < SERIES_ONLY_P:
            return BranchedSolveResult(w, abs(w * math.exp(w) - x), 0)
        w, iterations = _halley_direct(x, w, 2e-16)
        w = min(w, -1.0)
        return BranchedSolveResult(w, abs(w * math.exp(w) - x), iterations)

    w, rel, iterations = _solve_wm1_log(math.log(-x))
    return BranchedSolveResult(w, abs(x) * rel, iterations)


def lambert_w_m1(x):
    return solve_lambert_w_m1(x).value


def lambert_w_m1_from_log(log_neg_x):
    """W-1(-exp(log_neg_x)) for log_neg_x <= -1, safe when -x underflows"""
    log_neg_x = float(log_neg_x)
    if log_neg_x > -1.0 + BRANCH_TOLERANCE:
        raise DomainError(f"Lambert W-1 requires ln(-x) <= -1, got {log_neg_x!r}")
    if log_neg_x >= math.log(0.25):
        return lambert_w_m1(-math.exp(min(log_neg_x, -1.0)))
    w, _, _ = _solve_wm1_log(log_neg_x)
    return w


def bessel_i_scaled(order_max, lam):
    """
    Return [exp(-lam) I_0(lam), ..., exp(-lam) I_order_max(lam)].

    Miller's downward recurrence I_{n-1} = (2n/lam) I_n + I_{n+1}, started well
    above the orders that carry weight and normalised through
    I_0 + 2 sum I_n = exp(lam). Orders past the representable range come out
    as exact zeros.
    """
    order_max = int(order_max)
    lam = float(lam)
    if order_max < 0:
        raise DomainError(f"order_max must be nonnegative, got {order_max}")
    if lam < 0 or math.isnan(lam):
        raise DomainError(f"lambda must be nonnegative, got {lam!r}")

    result = np.zeros(order_max + 1)
    if lam == 0.0:
        result[0] = 1.0
        return result

    start = order_max + int(math.ceil(10.0 * math.sqrt(lam))) + 50
    values = np.zeros(start + 2)
    values[start] = 1.0
    two_over_lam = 2.0 / lam
    for n in range(start, 0, -1):
        values[n - 1] = n * two_over_lam * values[n] + values[n + 1]
        if values[n - 1] > RESCALE_ABOVE:
            values[n - 1:] /= RESCALE_ABOVE

    norm = values[0] + 2.0 * values[1:].sum()
    result[:] = values[:order_max + 1] / norm
    return result


def erf(x):
    """Error function, odd by construction"""
    x = np.asarray(x, dtype=float)
    value = np.sign(x) * special.erf(np.abs(x))
    if value.ndim == 0:
        return float(value)
    return value
