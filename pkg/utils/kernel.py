# utils/kernel.py
import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy import integrate

from utils.errors import DomainError

# B_beta needs ceil(1/beta)! and cos(beta*pi/2)^ceil(1/beta); below this it is useless
MIN_BETA = 0.05


@dataclass(frozen=True)
class KernelParams:
    """Kernel parameter beta with its normalisation C_beta and tail constant B_beta"""
    beta: float
    c_beta: float
    b_beta: float
    log_b_beta: float

    @property
    def cos_half(self):
        """cos(beta*pi/2), the decay rate of the kernel tail"""
        return math.cos(self.beta * math.pi / 2.0)

    def to_dict(self):
        return asdict(self)


def c_beta(beta):
    return 2.0 * math.pi * math.exp(-(2.0 ** beta))


def make_kernel_params(beta):
    """Validate beta and compute C_beta and B_beta"""
    beta = float(beta)
    if not (0.0 < beta < 1.0):
        raise DomainError(f"beta must lie in the open interval (0, 1), got {beta!r}")
    if beta < MIN_BETA:
        raise DomainError(f"beta = {beta} is below the supported minimum {MIN_BETA}")

    c = c_beta(beta)
    n = math.ceil(1.0 / beta)
    cos_half = math.cos(beta * math.pi / 2.0)
    log_b = (n + 1) * math.log(2.0) + math.log(math.factorial(n)) - math.log(c) - n * math.log(cos_half)
    b = float(2 ** (n + 1) * math.factorial(n)) / (c * cos_half ** n)
    return KernelParams(beta=beta, c_beta=c, b_beta=b, log_b_beta=log_b)


def _one_plus_ik_power(beta, k):
    # principal branch of (1+ik)^beta in polar form
    r = np.hypot(1.0, k)
    theta = np.arctan2(k, 1.0)
    rb = r ** beta
    return rb * np.cos(beta * theta), rb * np.sin(beta * theta)


def _as_output(value):
    if np.ndim(value) == 0:
        return complex(value)
    return value


def kernel_f(params, k):
    """f(k) = exp(-(1+ik)^beta) / C_beta"""
    k = np.asarray(k, dtype=float)
    re, im = _one_plus_ik_power(params.beta, k)
    value = np.exp(-re) * (np.cos(im) - 1j * np.sin(im)) / params.c_beta
    return _as_output(value)


def kernel_g(params, k):
    """g(k) = f(k) / (1 - ik), the LCHS weight"""
    k = np.asarray(k, dtype=float)
    value = np.asarray(kernel_f(params, k)) / (1.0 - 1j * k)
    return _as_output(value)


def kernel_g_abs(params, k):
    """|g(k)|, evaluated without forming the phase"""
    k = np.asarray(k, dtype=float)
    re, _ = _one_plus_ik_power(params.beta, k)
    value = np.exp(-re) / (params.c_beta * np.hypot(1.0, k))
    if np.ndim(value) == 0:
        return float(value)
    return value


def kernel_decay_bound(params, k):
    """Envelope exp(-|k|^beta cos(beta pi/2)/2) / (C_beta sqrt(1+k^2)) of |g|"""
    k = np.abs(np.asarray(k, dtype=float))
    value = np.exp(-(k ** params.beta) * params.cos_half / 2.0) / (params.c_beta * np.hypot(1.0, k))
    if np.ndim(value) == 0:
        return float(value)
    return value


def negligible_tail_start(params, tol=1e-18):
    """Smallest power of two beyond which the decay envelope is below tol"""
    upper = 1.0
    while kernel_decay_bound(params, upper) > tol:
        upper *= 2.0
    return upper


def _segments(upper):
    edges = [0.0, 1.0]
    while edges[-1] < upper:
        edges.append(min(edges[-1] * 2.0, upper))
    return edges


def integrate_real_part(params, lower, upper):
    """Integral of Re g over [lower, upper], split on a doubling grid"""
    total = 0.0
    edges = [e for e in _segments(upper) if e > lower]
    start = lower
    for edge in edges:
        value, _ = integrate.quad(lambda k: kernel_g(params, k).real, start, edge,
                                  limit=200, epsabs=1e-15, epsrel=1e-13)
        total += value
        start = edge
    return total


def integrate_abs(params, lower, upper):
    """Integral of |g| over [lower, upper], split on a doubling grid"""
    total = 0.0
    edges = [e for e in _segments(upper) if e > lower]
    start = lower
    for edge in edges:
        value, _ = integrate.quad(lambda k: kernel_g_abs(params, k), start, edge,
                                  limit=200, epsabs=1e-16, epsrel=1e-13)
        total += value
        start = edge
    return total


def kernel_integral(params):
    """Integral of g over the real line; the LCHS identity at t = 0 makes this 1"""
    upper = negligible_tail_start(params)
    # g(-k) = conj(g(k)), so the imaginary parts cancel
    return 2.0 * integrate_real_part(params, 0.0, upper)
