import dataclasses

import numpy as np
import pytest
import scipy.linalg

from utils.bounds import plan_discretization
from utils.budget import equal_budget
from utils.cost import ProblemSpec
from utils.errors import BoundViolationError, DomainError
from utils.quad import build_plan
from validation.checks import (Generator, check_aa_preconditions, check_cmax, check_norm_decay,
                               check_select_structure, check_unitarity, cmax_norms, exact_evolution, expm,
                               lchs_apply, random_generator, truncation_oracle)
from validation.lchs_validator import LCHSValidator


def _unit_vector(d, seed):
    rng = np.random.default_rng(seed)
    u0 = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return u0 / np.linalg.norm(u0)


def _plan_for(gen, t, eps_v):
    norm_l = gen.norm_l()
    spec = ProblemSpec(t=t, alpha_a=max(float(np.linalg.norm(gen.a, 2)), norm_l), norm_l=norm_l,
                       eps_total=eps_v)
    header = plan_discretization(spec, eps_v / 2.0, eps_v / 2.0)
    return spec, build_plan(spec.kernel, header, materialize=True)


def test_random_generator():
    gen = random_generator(8, 3)
    assert gen.dim == 8
    assert np.isclose(np.linalg.norm(gen.a, 2), 1.0)
    assert np.allclose(gen.l + 1j * gen.h, gen.a, rtol=0.0, atol=1e-14)
    assert np.allclose(gen.l, gen.l.conj().T) and np.allclose(gen.h, gen.h.conj().T)

    shifted = gen.shifted()
    assert shifted.shift == 0.0
    assert np.linalg.eigvalsh(shifted.l)[0] >= -1e-12
    assert np.array_equal(random_generator(8, 3).a, gen.a)
    assert not np.array_equal(random_generator(8, 4).a, gen.a)

    for d in (1, 64):
        with pytest.raises(DomainError):
            random_generator(d, 0)


def test_generator_must_be_square():
    with pytest.raises(DomainError):
        Generator.from_matrix(np.ones((2, 3)))


def test_expm_matches_scipy():
    gen = random_generator(6, 11)
    assert np.allclose(expm(gen.a, -1.7), scipy.linalg.expm(-1.7 * gen.a), rtol=0.0, atol=1e-12)
    hermitian = gen.l + 2.0 * gen.h
    assert np.allclose(expm(hermitian, -0.9j), scipy.linalg.expm(-0.9j * hermitian), rtol=0.0, atol=1e-12)
    with pytest.raises(DomainError):
        expm(np.ones((65, 65)))


def test_lchs_sum_reproduces_propagator():
    gen = random_generator(2, 5).shifted()
    u0 = _unit_vector(2, 6)
    _, plan = _plan_for(gen, 0.5, 1e-6)
    error = np.linalg.norm(lchs_apply(gen, plan, 0.5, u0) - exact_evolution(gen, 0.5, u0))
    assert error <= 1e-6


def test_lchs_apply_needs_matching_vector():
    gen = random_generator(3, 5).shifted()
    _, plan = _plan_for(gen, 0.5, 1e-4)
    with pytest.raises(DomainError):
        lchs_apply(gen, plan, 0.5, np.ones(4))


def test_truncated_integral_against_quadrature():
    gen = random_generator(3, 21).shifted()
    u0 = _unit_vector(3, 22)
    t = 0.5
    spec, plan = _plan_for(gen, t, 1e-4)
    oracle = truncation_oracle(gen, spec.kernel, plan.header.k_cut, t, u0)
    assert np.linalg.norm(oracle - lchs_apply(gen, plan, t, u0)) <= 5e-5
    assert np.linalg.norm(oracle - exact_evolution(gen, t, u0)) <= 5e-5


def test_select_structure():
    gen = random_generator(4, 7).shifted()
    check = check_select_structure(gen, np.linspace(-5.0, 5.0, 8), 1.0)
    assert check.passed
    assert check.to_dict()["passed"]

    with pytest.raises(DomainError):
        check_select_structure(gen, np.linspace(-1.0, 1.0, 17), 1.0)
    with pytest.raises(DomainError):
        check_select_structure(random_generator(9, 7), [0.0], 1.0)


def test_unitarity_and_decay():
    gen = random_generator(5, 13).shifted()
    assert check_unitarity(gen, [-30.0, -1.0, 0.0, 2.5, 30.0], 2.0) <= 1e-12
    assert check_norm_decay(gen, [0.1, 1.0, 4.0], _unit_vector(5, 14)) <= 1.0 + 1e-12


def test_contraction_bound():
    base = random_generator(6, 17)
    assert check_cmax(base.shifted(), [0.0, 0.5, 1.0, 2.0])
    # an indefinite Hermitian part has no contraction bound
    with pytest.raises(DomainError):
        check_cmax(base, [1.0])


def test_amplification_preconditions(default_spec):
    budget, plan, _ = equal_budget(default_spec)
    checks = check_aa_preconditions(default_spec, plan, budget)
    assert checks.eps_ok
    assert checks.eps_ratio <= 1.0 / 12.0
    assert np.isclose(checks.delta, 2.0 * checks.norm_ratio, rtol=1e-8)
    assert checks.to_dict()["passed"] == checks.passed


def _small_validator(**settings):
    values = {"trials": 2, "t_values": [1.0], "dimension": 4}
    values.update(settings)
    return LCHSValidator(overrides={"validation_settings": values})


def test_validator_passes_and_is_reproducible(tmp_path):
    first = _small_validator()
    summary = first.run_validation()
    assert summary["total_trials"] == 2
    assert summary["failed_trials"] == 0
    assert summary["structure_checks_passed"]
    for trial in first.trials:
        assert trial["measured_error"] <= trial["bound"]
        assert trial["cmax_holds"]
        assert trial["coefficient_sum_error"] <= 1e-6

    second = _small_validator()
    second.run_validation()
    a = first.save_results(tmp_path / "a")
    b = second.save_results(tmp_path / "b")
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a" / "validation_report.xlsx").exists()


def test_validator_rejects_bad_settings():
    with pytest.raises(DomainError):
        _small_validator(dimension=64)
    with pytest.raises(DomainError):
        _small_validator(trials=0)
    with pytest.raises(DomainError):
        _small_validator(t_values=[])


def test_validator_reports_violations(monkeypatch):
    monkeypatch.setattr("validation.lchs_validator.lchs_apply",
                        lambda gen, plan, t, u0: np.zeros(gen.dim, dtype=complex))
    validator = _small_validator(trials=1)
    with pytest.raises(BoundViolationError) as info:
        validator.run_validation()
    assert len(info.value.failures) == 1
    assert validator.summary_metrics["failed_trials"] == 1


def test_validator_missing_config_falls_back(tmp_path):
    validator = LCHSValidator(config_path=tmp_path / "absent.json")
    assert validator.settings["dimension"] == 8
    assert validator.settings["t_values"] == [0.5, 1.0, 2.0]


@pytest.mark.slow
def test_default_validation_run(tmp_path):
    validator = LCHSValidator()
    summary = validator.run_validation()
    assert summary["total_trials"] == 60
    assert summary["max_ratio"] <= 1.0
    validator.save_results(tmp_path)


def test_validator_fails_trials_on_side_checks(monkeypatch):
    monkeypatch.setattr("validation.lchs_validator.check_unitarity", lambda gen, nodes, t: 1.0)
    monkeypatch.setattr("validation.lchs_validator.check_norm_decay", lambda gen, t_grid, u0: 1.5)
    monkeypatch.setattr("validation.lchs_validator.check_cmax", lambda gen, t_grid: False)
    validator = _small_validator(trials=1)
    with pytest.raises(BoundViolationError) as info:
        validator.run_validation()
    assert len(info.value.failures) == 1
    message = info.value.failures[0]
    assert "unitarity deviation" in message
    assert "norm grew" in message
    assert "contraction bound failed" in message
    assert not message.split(": ", 1)[1].startswith("error")
    trial = validator.trials[0]
    assert trial["measured_error"] <= trial["bound"]
    assert not trial["passed"]


def test_trial_failures_names_each_check():
    record = {"measured_error": 1e-8, "bound": 1e-6, "unitarity_deviation": 1e-14,
              "norm_decay_ratio": 1.0, "cmax_holds": True}
    assert LCHSValidator.trial_failures(record) == []
    assert LCHSValidator.trial_failures({**record, "cmax_holds": False}) == ["contraction bound failed"]
    assert len(LCHSValidator.trial_failures({**record, "measured_error": 1e-5})) == 1


def test_lchs_sum_on_diagonal_generator():
    gen = Generator.from_matrix(np.diag([0.3, 1.0]))
    u0 = np.array([0.6, 0.8], dtype=complex)
    _, plan = _plan_for(gen, 1.0, 1e-6)
    expected = u0 * np.exp(-np.array([0.3, 1.0]))
    assert np.linalg.norm(lchs_apply(gen, plan, 1.0, u0) - expected) <= 1e-6


def test_contraction_bound_is_tight_for_hermitian_generators():
    rng = np.random.default_rng(31)
    b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    a = b @ b.conj().T
    a /= np.linalg.norm(a, 2)
    gen = Generator.from_matrix(a)
    rows = cmax_norms(gen, [0.0, 0.5, 1.0, 3.0])
    for _, norm, bound in rows:
        assert abs(norm - bound) <= 1e-12
    assert check_cmax(gen, [0.0, 0.5, 1.0, 3.0])


def test_amplification_needs_norm_ratio_below_nine_tenths(default_spec):
    budget, plan, _ = equal_budget(default_spec)
    squeezed = dataclasses.replace(plan, c_l1=1.05)
    checks = check_aa_preconditions(default_spec, squeezed, budget)
    assert checks.norm_ratio > 0.9
    assert not checks.norm_ok
    assert not checks.passed
