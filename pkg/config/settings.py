import os
from pathlib import Path

from .config_manager import config_manager

# Load estimator configuration
LCHS_CONFIG = config_manager.config
PROBLEM_DEFAULTS = config_manager.get_problem_defaults()

# ==================== PROBLEM DEFAULTS ====================
DEFAULT_T = PROBLEM_DEFAULTS['t']
DEFAULT_ALPHA_A = PROBLEM_DEFAULTS['alpha_a']
DEFAULT_NORM_L = PROBLEM_DEFAULTS['norm_l']
DEFAULT_NORM_U0 = PROBLEM_DEFAULTS['norm_u0']
DEFAULT_NORM_UT = PROBLEM_DEFAULTS['norm_ut']
DEFAULT_EPS = PROBLEM_DEFAULTS['eps_total']
DEFAULT_BETA = PROBLEM_DEFAULTS['beta']
DEFAULT_M_A = PROBLEM_DEFAULTS['m_a']

# ==================== ESTIMATOR SETTINGS ====================
PERFECT_ORACLE = LCHS_CONFIG.get('estimator_settings', {}).get('perfect_oracle', True)
TIGHT_MODE = LCHS_CONFIG.get('estimator_settings', {}).get('tight_mode', False)
MAX_PLAN_TERMS = LCHS_CONFIG.get('estimator_settings', {}).get('max_plan_terms', 2_000_000)
FIXED_POINT_MAX_ITERATIONS = LCHS_CONFIG.get('estimator_settings', {}).get('fixed_point_max_iterations', 20)

# ==================== OPTIMIZER SETTINGS ====================
OPTIMIZER_METHOD = LCHS_CONFIG.get('optimizer_settings', {}).get('method', 'sol_aa')
EVAL_LIMIT = LCHS_CONFIG.get('optimizer_settings', {}).get('eval_limit', 240)
OPTIMIZER_SEED = LCHS_CONFIG.get('optimizer_settings', {}).get('seed', 1234)
BETA_MIN = LCHS_CONFIG.get('optimizer_settings', {}).get('beta_min', 0.4)
BETA_MAX = LCHS_CONFIG.get('optimizer_settings', {}).get('beta_max', 0.95)

# ==================== SWEEP SETTINGS ====================
T_EXPONENT_MIN = LCHS_CONFIG.get('sweep_settings', {}).get('t_exponent_min', 2)
T_EXPONENT_MAX = LCHS_CONFIG.get('sweep_settings', {}).get('t_exponent_max', 10)
T_POINTS = LCHS_CONFIG.get('sweep_settings', {}).get('t_points', 9)
SWEEP_OPTIMIZE = LCHS_CONFIG.get('sweep_settings', {}).get('optimize', False)

# ==================== SPEEDUP SETTINGS ====================
CHI_EXPONENT_MIN = LCHS_CONFIG.get('speedup_settings', {}).get('chi_exponent_min', -2)
CHI_EXPONENT_MAX = LCHS_CONFIG.get('speedup_settings', {}).get('chi_exponent_max', 4)
CHI_POINTS = LCHS_CONFIG.get('speedup_settings', {}).get('chi_points', 25)

# ==================== OUTPUT SETTINGS ====================
CONFIG_OUTPUT_DIR = LCHS_CONFIG.get('output_settings', {}).get('output_dir', 'results')


def resolve_output_dir(explicit=None):
    """--output-dir, then LCHS_OUTPUT_DIR, then the config value"""
    if explicit:
        return Path(explicit)
    return Path(os.environ.get('LCHS_OUTPUT_DIR', CONFIG_OUTPUT_DIR))


OUTPUT_DIR = resolve_output_dir()
RUN_LOG_FILE = LCHS_CONFIG.get('output_settings', {}).get('run_log_file', 'run_log.json')

# ==================== DEBUG & LOGGING SETTINGS ====================
DEBUG = LCHS_CONFIG.get('debug_settings', {}).get('debug_mode', False)
VERBOSE_LOGGING = LCHS_CONFIG.get('debug_settings', {}).get('verbose_logging', False)

# ==================== FALLBACK DEFAULTS ====================
# If optimizer_settings doesn't exist in config, use hardcoded defaults
if 'optimizer_settings' not in LCHS_CONFIG:
    print("⚠️ optimizer_settings not found in config, using defaults")
    OPTIMIZER_METHOD = 'sol_aa'
    EVAL_LIMIT = 240
    OPTIMIZER_SEED = 1234
    BETA_MIN = 0.4
    BETA_MAX = 0.95

if 'debug_settings' not in LCHS_CONFIG:
    DEBUG = False
    VERBOSE_LOGGING = False

# ==================== STARTUP INFO ====================
if VERBOSE_LOGGING:
    print(f"✅ LCHS settings loaded:")
    print(f"   ⏱️ Default t: {DEFAULT_T:g}")
    print(f"   🎯 Total error: {DEFAULT_EPS:g}")
    print(f"   🔺 Kernel beta: {DEFAULT_BETA}")
    print(f"   📏 alpha_A / ||L||: {DEFAULT_ALPHA_A} / {DEFAULT_NORM_L}")
    print(f"   🔒 Perfect oracle: {'ON' if PERFECT_ORACLE else 'OFF'}")
    print(f"   📐 Tight Q mode: {'ON' if TIGHT_MODE else 'OFF'}")
    print(f"   🧮 Optimizer: {OPTIMIZER_METHOD}, {EVAL_LIMIT} evaluations, seed {OPTIMIZER_SEED}")
    print(f"   📈 Sweep: t = 10^{T_EXPONENT_MIN} .. 10^{T_EXPONENT_MAX} ({T_POINTS} points)")
    print(f"   📁 Output dir: {OUTPUT_DIR}")
    print(f"   🐛 Debug Mode: {'ON' if DEBUG else 'OFF'}")
    print(f"   📝 Run log: {RUN_LOG_FILE}")

if DEBUG:
    print(f"\n🔍 Config sections found: {list(LCHS_CONFIG.keys())}")
