# config/run_config.py
import argparse
from dataclasses import dataclass, asdict, fields

from config.settings import (CHI_EXPONENT_MAX, CHI_EXPONENT_MIN, CHI_POINTS, DEFAULT_ALPHA_A, DEFAULT_BETA,
                             DEFAULT_EPS, DEFAULT_M_A, DEFAULT_NORM_L, DEFAULT_NORM_U0, DEFAULT_NORM_UT,
                             DEFAULT_T, EVAL_LIMIT, OPTIMIZER_METHOD, PERFECT_ORACLE, SWEEP_OPTIMIZE,
                             T_EXPONENT_MAX, T_EXPONENT_MIN, T_POINTS, TIGHT_MODE)
from utils.errors import DomainError

COMMANDS = ("estimate", "optimize", "sweep", "validate", "speedup")


@dataclass(frozen=True)
class RunConfig:
    """One parsed command line; parse(to_argv()) reproduces it"""
    command: str
    t: float = DEFAULT_T
    eps: float = DEFAULT_EPS
    beta: float = DEFAULT_BETA
    alpha: float = DEFAULT_ALPHA_A
    norm_l: float = DEFAULT_NORM_L
    norm_u0: float = DEFAULT_NORM_U0
    norm_ut: float = DEFAULT_NORM_UT
    m_a: int = DEFAULT_M_A
    tight: bool = TIGHT_MODE
    perfect_oracle: bool = PERFECT_ORACLE
    output_dir: str = None
    plan_csv: str = None
    sign_csv: str = None
    method: str = OPTIMIZER_METHOD
    eval_limit: int = EVAL_LIMIT
    seed: int = None
    t_min_exp: float = T_EXPONENT_MIN
    t_max_exp: float = T_EXPONENT_MAX
    t_points: int = T_POINTS
    optimize: bool = SWEEP_OPTIMIZE
    dimension: int = None
    trials: int = None
    eps_v: float = None
    t_values: tuple = None
    rls_csv: str = None
    chi_min_exp: float = CHI_EXPONENT_MIN
    chi_max_exp: float = CHI_EXPONENT_MAX
    chi_points: int = CHI_POINTS

    def problem_kwargs(self):
        """Keyword arguments for ProblemSpec"""
        return dict(t=self.t, alpha_a=self.alpha, norm_l=self.norm_l, norm_u0=self.norm_u0,
                    norm_ut=self.norm_ut, eps_total=self.eps, beta=self.beta, m_a=self.m_a)

    def to_dict(self):
        data = asdict(self)
        if data["t_values"] is not None:
            data["t_values"] = list(data["t_values"])
        return data

    def to_argv(self):
        argv = [self.command]
        for name in COMMAND_FIELDS[self.command]:
            spec = ARGUMENTS[name]
            value = getattr(self, name)
            kind = spec.get("kind", "value")
            if kind == "flag":
                if value:
                    argv.append(spec["flag"])
            elif kind == "negflag":
                if not value:
                    argv.append(spec["flag"])
            elif value is None:
                continue
            elif kind == "list":
                argv.append(spec["flag"])
                argv.extend(repr(float(v)) for v in value)
            else:
                argv.extend([spec["flag"], repr(value) if isinstance(value, float) else str(value)])
        return argv

    @classmethod
    def from_namespace(cls, ns):
        values = {"command": ns.command}
        for f in fields(cls):
            if f.name == "command" or not hasattr(ns, f.name):
                continue
            value = getattr(ns, f.name)
            if value is None:
                continue
            if f.name == "t_values":
                value = tuple(float(v) for v in value)
            values[f.name] = value
        return cls(**values)


ARGUMENTS = {
    "t": {"flag": "--t", "type": float, "help": "evolution time"},
    "eps": {"flag": "--eps", "type": float, "help": "total error budget"},
    "beta": {"flag": "--beta", "type": float, "help": "kernel exponent, 0 < beta < 1"},
    "alpha": {"flag": "--alpha", "type": float, "help": "block-encoding subnormalisation of A"},
    "norm_l": {"flag": "--norm-l", "type": float, "help": "spectral norm of L"},
    "norm_u0": {"flag": "--norm-u0", "type": float, "help": "norm of the initial state"},
    "norm_ut": {"flag": "--norm-ut", "type": float, "help": "norm of the solution at time t"},
    "m_a": {"flag": "--m-a", "type": int, "help": "ancilla qubits of the block encoding of A"},
    "tight": {"flag": "--tight", "kind": "flag", "help": "use the tight quadrature count"},
    "perfect_oracle": {"flag": "--no-perfect-oracle", "kind": "negflag",
                       "help": "budget nonzero oracle errors eps_c, eps_0, eps_A, eps_R"},
    "output_dir": {"flag": "--output-dir", "type": str, "help": "overrides LCHS_OUTPUT_DIR"},
    "plan_csv": {"flag": "--plan-csv", "type": str, "help": "write the quadrature plan as CSV"},
    "sign_csv": {"flag": "--sign-csv", "type": str, "help": "write the sign polynomial series as CSV"},
    "method": {"flag": "--method", "type": str, "choices": ("sol_aa", "sol_exp")},
    "eval_limit": {"flag": "--eval-limit", "type": int, "help": "objective evaluations per optimisation"},
    "seed": {"flag": "--seed", "type": int},
    "t_min_exp": {"flag": "--t-min-exp", "type": float},
    "t_max_exp": {"flag": "--t-max-exp", "type": float},
    "t_points": {"flag": "--t-points", "type": int},
    "optimize": {"flag": "--optimize", "kind": "flag", "help": "fill the optimised columns"},
    "dimension": {"flag": "--d", "type": int, "help": "generator dimension"},
    "trials": {"flag": "--trials", "type": int},
    "eps_v": {"flag": "--eps-v", "type": float, "help": "truncation plus discretisation budget"},
    "t_values": {"flag": "--t-values", "kind": "list", "type": float},
    "rls_csv": {"flag": "--rls-csv", "type": str, "help": "CSV with columns t, rls_c_a, rls_c_0"},
    "chi_min_exp": {"flag": "--chi-min-exp", "type": float},
    "chi_max_exp": {"flag": "--chi-max-exp", "type": float},
    "chi_points": {"flag": "--chi-points", "type": int},
}

_PROBLEM = ("eps", "beta", "alpha", "norm_l", "norm_u0", "norm_ut", "m_a", "tight", "perfect_oracle")
_SEARCH = ("method", "eval_limit", "seed")

COMMAND_FIELDS = {
    "estimate": ("t",) + _PROBLEM + ("plan_csv", "sign_csv", "output_dir"),
    "optimize": ("t",) + _PROBLEM + _SEARCH + ("output_dir",),
    "sweep": _PROBLEM + ("t_min_exp", "t_max_exp", "t_points", "optimize") + _SEARCH + ("output_dir",),
    "validate": ("dimension", "trials", "seed", "eps_v", "beta", "t_values", "output_dir"),
    "speedup": _PROBLEM + ("rls_csv", "chi_min_exp", "chi_max_exp", "chi_points", "output_dir"),
}


class RunArgumentParser(argparse.ArgumentParser):
    """argparse that raises DomainError instead of exiting with status 2"""

    def error(self, message):
        raise DomainError(f"{self.prog}: {message}")


def build_parser():
    parser = RunArgumentParser(prog="main.py", description="LCHS resource estimator and desk-scale validator")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=RunArgumentParser)
    for command in COMMANDS:
        sub = commands.add_parser(command)
        for name in COMMAND_FIELDS[command]:
            spec = dict(ARGUMENTS[name])
            flag = spec.pop("flag")
            kind = spec.pop("kind", "value")
            if kind == "flag":
                sub.add_argument(flag, dest=name, action="store_true", default=None, help=spec.get("help"))
            elif kind == "negflag":
                sub.add_argument(flag, dest=name, action="store_false", default=None, help=spec.get("help"))
            elif kind == "list":
                sub.add_argument(flag, dest=name, nargs="+", type=spec["type"], default=None)
            else:
                sub.add_argument(flag, dest=name, default=None, **spec)
    return parser


def parse_run_config(argv):
    return RunConfig.from_namespace(build_parser().parse_args(argv))
