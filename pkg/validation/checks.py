# validation/checks.py
"""
Dense linear-algebra checks of the LCHS construction at desk scale.
"""
import math
from dataclasses import dataclass, asdict

import numpy as np
import scipy.linalg
from scipy import integrate

from utils.budget import output_norm_bound
from utils.cost import delta_gap, lchs_errors
from utils.errors import DomainError, InfeasibleError
from utils.kernel import kernel_g

MAX_GENERATOR_DIM = 32
MAX_EXPM_DIM = 64
MAX_SELECT_NODES = 16
MAX_SELECT_DIM = 8
APPLY_CHUNK = 4096


@dataclass
class Generator:
    """A = L + iH with L = (A + A^dag)/2, H = (A - A^dag)/(2i); shift = max(0, -lambda_min(L))"""
    a: np.ndarray
    l: np.ndarray
    h: np.ndarray
    shift: float

    @property
    def dim(self):
        return self.a.shape[0]

    @classmethod
    def from_matrix(cls, a):
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"generator must be square, got shape {a.shape}")
        l, h = cartesian_parts(a)
        lam_min = float(np.linalg.eigvalsh(l)[0])
        return cls(a=a, l=l, h=h, shift=max(0.0, -lam_min))

    def shifted(self):
        """A + cI, whose Hermitian part is positive semidefinite"""
        eye = np.eye(self.dim)
        return Generator(a=self.a + self.shift * eye, l=self.l + self.shift * eye, h=self.h.copy(),
                         shift=0.0)

    def norm_l(self):
        return float(np.linalg.norm(self.l, 2))


def cartesian_parts(a):
    adj = a.conj().T
    return 0.5 * (a + adj), -0.5j * (a - adj)


def random_generator(d, seed):
    """Seeded complex Gaussian generator rescaled to unit spectral norm"""
    d = int(d)
    if not 2 <= d <= MAX_GENERATOR_DIM:
        raise DomainError(f"validation dimension must lie in [2, {MAX_GENERATOR_DIM}], got {d}")
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2.0)
    a /= np.linalg.norm(a, 2)
    return Generator.from_matrix(a)


def _is_hermitian(m, atol=1e-12):
    return np.allclose(m, m.conj().T, rtol=0.0, atol=atol)


def expm(m, scale=1.0):
    """exp(scale * m); unitary eigen-route for Hermitian m with imaginary scale"""
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expm needs a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_EXPM_DIM:
        raise DomainError(f"expm supports d <= {MAX_EXPM_DIM}, got {m.shape[0]}")
    scale = complex(scale)
    if scale.real == 0.0 and _is_hermitian(m):
        w, v = np.linalg.eigh(m)
        return (v * np.exp(scale * w)) @ v.conj().T
    return scipy.linalg.expm(scale * m)


def exact_evolution(gen, t, u0):
    return expm(gen.a, -t) @ np.asarray(u0, dtype=complex)


def lchs_apply(gen, plan, t, u0):
    """sum_j c_j exp(-it(k_j L + H)) u0, term by term"""
    if not plan.materialized:
        raise DomainError(f"plan with M = {plan.header.m_total} summands was not materialised")
    u0 = np.asarray(u0, dtype=complex)
    if u0.shape != (gen.dim,):
        raise DomainError(f"initial vector has shape {u0.shape}, expected ({gen.dim},)")
    result = np.zeros(gen.dim, dtype=complex)
    for start in range(0, plan.nodes.size, APPLY_CHUNK):
        k = plan.nodes[start:start + APPLY_CHUNK]
        c = plan.coeffs[start:start + APPLY_CHUNK]
        hk = k[:, None, None] * gen.l[None, :, :] + gen.h[None, :, :]
        w, v = np.linalg.eigh(hk)
        y = np.einsum("nji,j->ni", v.conj(), u0)
        y *= np.exp(-1j * t * w) * c[:, None]
        result += np.einsum("nij,nj->i", v, y)
    return result


@dataclass(frozen=True)
class SelectCheck:
    block_deviation: float
    decomposition_deviation: float

    @property
    def passed(self):
        return self.block_deviation <= 1e-10 and self.decomposition_deviation <= 1e-12

    def to_dict(self):
        data = asdict(self)
        data["passed"] = self.passed
        return data


def select_hamiltonian(gen, nodes):
    """S = sum_j |j><j| (x) (k_j L + H)"""
    blocks = [k * gen.l + gen.h for k in nodes]
    return scipy.linalg.block_diag(*blocks)


def check_select_structure(gen, nodes, t):
    """exp(-itS) against the direct sum of per-node exponentials, and the A/A^dag form of S"""
    nodes = np.asarray(nodes, dtype=float)
    if not 1 <= nodes.size <= MAX_SELECT_NODES:
        raise DomainError(f"SELECT check takes 1..{MAX_SELECT_NODES} nodes, got {nodes.size}")
    if gen.dim > MAX_SELECT_DIM:
        raise DomainError(f"SELECT check supports d <= {MAX_SELECT_DIM}, got {gen.dim}")

    s = select_hamiltonian(gen, nodes)
    full = scipy.linalg.expm(-1j * t * s)
    direct = scipy.linalg.block_diag(*[expm(k * gen.l + gen.h, -1j * t) for k in nodes])
    block_dev = float(np.max(np.abs(full - direct)))

    eye = np.eye(nodes.size)
    d = np.diag(nodes)
    rebuilt = 0.5 * (np.kron(-1j * eye + d, gen.a) + np.kron(1j * eye + d, gen.a.conj().T))
    decomposition_dev = float(np.max(np.abs(rebuilt - s)))
    return SelectCheck(block_deviation=block_dev, decomposition_deviation=decomposition_dev)


def check_unitarity(gen, nodes, t):
    """max_j ||U_j^dag U_j - I|| over the given nodes"""
    eye = np.eye(gen.dim)
    worst = 0.0
    for k in np.asarray(nodes, dtype=float):
        u = expm(k * gen.l + gen.h, -1j * t)
        worst = max(worst, float(np.max(np.abs(u.conj().T @ u - eye))))
    return worst


def cmax_norms(gen, t_grid):
    """(t, ||exp(-tA)||, exp(-t lambda_min(L))) for every t"""
    lam_min = float(np.linalg.eigvalsh(gen.l)[0])
    if lam_min < -1e-10:
        raise DomainError(f"L is not positive semidefinite (lambda_min = {lam_min:.3g})")
    rows = []
    for t in t_grid:
        norm = float(np.linalg.norm(expm(gen.a, -t), 2))
        rows.append((float(t), norm, math.exp(-t * lam_min)))
    return rows


def check_cmax(gen, t_grid, atol=1e-9):
    """||exp(-tA)|| <= exp(-t lambda_min(L)) <= 1 on the grid"""
    return all(norm <= bound + atol and bound <= 1.0 + atol for _, norm, bound in cmax_norms(gen, t_grid))


def check_norm_decay(gen, t_grid, u0):
    """Largest ||exp(-tA) u0|| / ||u0|| over the grid"""
    u0 = np.asarray(u0, dtype=complex)
    base = np.linalg.norm(u0)
    return max(float(np.linalg.norm(exact_evolution(gen, t, u0)) / base) for t in t_grid)


@dataclass(frozen=True)
class AAPreconditions:
    eps_ratio: float
    norm_ratio: float
    delta: float
    eps_ok: bool
    norm_ok: bool
    delta_ok: bool

    @property
    def passed(self):
        return self.eps_ok and self.norm_ok and self.delta_ok

    def to_dict(self):
        data = asdict(self)
        data["passed"] = self.passed
        return data


def check_aa_preconditions(spec, plan, budget):
    """Robust amplitude amplification needs eps/alpha <= 1/12, ||x||/alpha <= 9/10, delta <= 9/5"""
    errors = lchs_errors(spec, plan, budget)
    alpha = plan.c_l1 * spec.norm_u0
    eps_ratio = errors.eps_lchs / alpha
    norm_ratio = output_norm_bound(spec, errors.eps_v) / alpha
    try:
        delta = delta_gap(spec, plan.c_l1, errors.eps_lchs, errors.eps_v)
    except InfeasibleError:
        delta = math.nan
    return AAPreconditions(
        eps_ratio=eps_ratio,
        norm_ratio=norm_ratio,
        delta=delta,
        eps_ok=eps_ratio <= 1.0 / 12.0,
        norm_ok=norm_ratio <= 0.9,
        delta_ok=(not math.isnan(delta)) and delta <= 1.8,
    )


def truncation_oracle(gen, params, k_cut, t, u0, epsabs=1e-12):
    """Adaptive integral of g(k) exp(-it(kL + H)) u0 over [-K, K]"""
    u0 = np.asarray(u0, dtype=complex)
    d = gen.dim

    def integrand(k):
        w, v = np.linalg.eigh(k * gen.l + gen.h)
        vec = v @ (np.exp(-1j * t * w) * (v.conj().T @ u0)) * kernel_g(params, k)
        return np.concatenate([vec.real, vec.imag])

    value, _ = integrate.quad_vec(integrand, -k_cut, k_cut, epsabs=epsabs, epsrel=1e-12, limit=20000)
    return value[:d] + 1j * value[d:]
