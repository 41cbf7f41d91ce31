"""
Module Name: test_stationarity.py
Description: Tests for the smallest-eigenvalue solver, stationarity classification, the fraction of
             first-order stationary iterates and the parameter schedules.
Date: 2026-10-19
"""

import math

import numpy as np
import pytest

from configs.errors import ConfigurationError, EigenBreakdownError
from configs.run_config import Kappas
from compress.compressors import CompressorSpec
from problems.oracle import NoiseModel
from problems.problems import SADDLE_QUARTIC, HETEROGENEOUS_QUADRATIC, make_problem, HvpOracle
from server.trace import RoundTrace
from stationarity.eigen import lanczos_min_eigenvalue, dense_min_eigenvalue, min_eigenvalue
from stationarity.schedule import (
    FIRST, SECOND, ScheduleInputs, param_schedule, p_lower_bound, estimate_phi, schedule_for_problem
)
from stationarity.stationarity import (
    NOT_FOSP, STRICT_SADDLE, SOSP, classify, classify_values, fosp_fraction
)


@pytest.fixture
def saddle():
    return make_problem(SADDLE_QUARTIC, n=1, d=2)


def random_symmetric(rng, d, low=-2.0, high=3.0):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    eigs = rng.uniform(low, high, d)
    return (q * eigs) @ q.T, eigs.min()

# ------------------------------------------------------------------
# Eigenvalues
# ------------------------------------------------------------------

def test_saddle_origin_eigenvalue(saddle):
    oracle = HvpOracle(saddle, np.zeros(2))
    assert min_eigenvalue(oracle, 2) == pytest.approx(-1.0, abs=1e-8)
    assert lanczos_min_eigenvalue(oracle, 2) == pytest.approx(-1.0, abs=1e-8)


def test_eigenvalue_at_minimum(saddle):
    assert min_eigenvalue(HvpOracle(saddle, np.array([1.0, 0.0])), 2) == pytest.approx(1.0, abs=1e-8)


def test_identity_hessian_recovers_after_breakdown():
    assert lanczos_min_eigenvalue(lambda v: v, 6) == pytest.approx(1.0)
    assert min_eigenvalue(lambda v: v, 6) == pytest.approx(1.0)


def test_lanczos_matches_dense_on_small_problems():
    rng = np.random.default_rng(21)
    for d in (3, 10, 25, 50):
        A, _ = random_symmetric(rng, d)
        hvp = lambda v, A=A: A @ v
        dense = dense_min_eigenvalue(hvp, d)
        assert dense == pytest.approx(np.linalg.eigvalsh(A)[0], abs=1e-10)
        assert lanczos_min_eigenvalue(hvp, d, iters=d) == pytest.approx(dense, abs=1e-6)


def test_lanczos_in_high_dimension():
    rng = np.random.default_rng(22)
    A, lowest = random_symmetric(rng, 120)
    assert min_eigenvalue(lambda v: A @ v, 120, iters=120) == pytest.approx(lowest, abs=1e-6)


def test_non_finite_products_raise():
    with pytest.raises(EigenBreakdownError):
        lanczos_min_eigenvalue(lambda v: np.full_like(v, np.nan), 4)


def test_iters_must_be_positive():
    with pytest.raises(ConfigurationError):
        min_eigenvalue(lambda v: v, 4, iters=0)

# ------------------------------------------------------------------
# Classification
# ------------------------------------------------------------------

def test_classify_saddle_and_minimum(saddle):
    report = classify(saddle, np.zeros(2), 0.1, rho_used=1.0)
    assert report.classification == STRICT_SADDLE
    assert report.grad_norm == 0.0
    assert report.saddle_threshold == pytest.approx(-math.sqrt(0.1))
    assert classify(saddle, np.array([1.0, 0.0]), 0.1, rho_used=1.0).classification == SOSP


def test_large_gradient_is_not_fosp(saddle):
    report = classify(saddle, np.array([0.0, 10.0]), 0.1, rho_used=1.0)
    assert report.grad_norm == pytest.approx(10.0)
    assert report.classification == NOT_FOSP


def test_classify_defaults_to_problem_rho(saddle):
    report = classify(saddle, np.zeros(2), 0.1)
    assert report.rho == saddle.rho
    assert report.to_dict()["classification"] == STRICT_SADDLE


def test_classification_is_monotone_in_epsilon():
    rng = np.random.default_rng(3)
    for _ in range(500):
        grad_norm, lam = rng.exponential(1.0), rng.normal()
        eps = rng.uniform(0.01, 2.0)
        if classify_values(grad_norm, lam, eps, 1.0) != NOT_FOSP:
            assert classify_values(grad_norm, lam, 2 * eps, 1.0) != NOT_FOSP


def test_classify_rejects_nonpositive_epsilon(saddle):
    with pytest.raises(ConfigurationError):
        classify(saddle, np.zeros(2), 0.0)

# ------------------------------------------------------------------
# fosp_fraction
# ------------------------------------------------------------------

def test_fosp_fraction_counts(saddle):
    mixed = RoundTrace.from_iterates([[1.0, 0.0], [-1.0, 0.0], [1.0, 0.05], [0.0, 5.0]])
    assert fosp_fraction(mixed, saddle, 0.1) == 0.75
    at_minimum = RoundTrace.from_iterates([[1.0, 0.0]] * 3)
    assert fosp_fraction(at_minimum, saddle, 0.1) == 1.0
    far = RoundTrace.from_iterates([[0.0, 3.0], [0.0, -4.0]])
    assert fosp_fraction(far, saddle, 0.1) == 0.0

# ------------------------------------------------------------------
# Schedules
# ------------------------------------------------------------------

def inputs(**overrides):
    base = dict(epsilon=0.1, mu=0.1, n=4, d=10, sigma=1.0, L=4.0, phi=2.0, f_gap=1.5, rho=1.0,
                f_max=10.0, r=0.5)
    base.update(overrides)
    return ScheduleInputs(**base)


def test_first_order_p():
    assert param_schedule(FIRST, inputs()).p == 24
    lossless = param_schedule(FIRST, inputs(mu=1.0))
    assert lossless.p == 1
    assert lossless.p_clamped


def test_second_order_p_floor():
    assert p_lower_bound(0.1) == 91
    assert p_lower_bound(1.0) == 1
    schedule = param_schedule(SECOND, inputs())
    assert schedule.p_floor == 91
    assert schedule.p == 91
    assert schedule.script_i is not None


def test_first_order_formulas():
    s = param_schedule(FIRST, inputs())
    iota = math.log(100)
    chi_sq = math.log(10) + 0.25
    assert s.chi_sq == pytest.approx(chi_sq)
    assert s.iota == pytest.approx(iota)
    np_ = 4 * 24
    eta = min(0.1 * 0.1 / (4.0 * math.sqrt(0.1 * 2.0 + chi_sq * iota / np_)),
              np_ * 0.01 / (chi_sq * 4.0))
    assert s.eta == pytest.approx(eta)
    T = max(1.5 / (eta * 0.01), chi_sq * iota / (np_ * 0.01))
    assert abs(s.T - math.ceil(T)) <= 1


def test_second_order_radius():
    s = param_schedule(SECOND, inputs())
    assert s.r == pytest.approx(math.sqrt(math.log(100) * 10 * math.log(10)))
    assert s.chi_sq == pytest.approx(math.log(10) + s.r ** 2)


@pytest.mark.parametrize("order", [FIRST, SECOND])
def test_halving_epsilon_never_shortens_the_run(order):
    previous = 0
    for eps in (1.0, 0.5, 0.25, 0.125, 0.0625):
        T = param_schedule(order, inputs(epsilon=eps)).T
        assert T >= previous
        previous = T


def test_kappas_scale_the_schedule():
    plain = param_schedule(FIRST, inputs())
    scaled = param_schedule(FIRST, inputs(kappas=Kappas(T=2.0, eta=0.5, p=1.0, r=1.0)))
    assert scaled.eta == pytest.approx(0.5 * plain.eta)


@pytest.mark.parametrize("bad", [dict(epsilon=0.0), dict(mu=0.0), dict(mu=1.5), dict(L=0.0),
                                 dict(sigma=-1.0)])
def test_nonpositive_inputs_are_rejected(bad):
    with pytest.raises(ConfigurationError):
        param_schedule(FIRST, inputs(**bad))


def test_second_order_needs_curvature_and_noise():
    with pytest.raises(ConfigurationError):
        param_schedule(SECOND, inputs(rho=0.0))
    with pytest.raises(ConfigurationError):
        param_schedule(SECOND, inputs(sigma=0.0))


def test_unbounded_step_is_rejected():
    with pytest.raises(ConfigurationError):
        param_schedule(FIRST, inputs(sigma=0.0, r=0.0, phi=0.0))


def test_schedule_for_problem_estimates_phi():
    problem = make_problem(HETEROGENEOUS_QUADRATIC, n=4, d=10, heterogeneity=3.0, seed=1, sigma=0.5)
    noise = NoiseModel.from_problem(problem)
    spec = CompressorSpec.topk(1)
    s = schedule_for_problem(FIRST, problem, noise, spec, 0.1, seed=2)
    assert s.p == 24
    assert s.phi == pytest.approx(estimate_phi(problem, noise, np.zeros(10), 24, 0.0, seed=2))
    assert s.phi > 0
    assert s.L_tilde == problem.L_tilde
    assert math.isfinite(s.eta) and s.eta > 0

    second = schedule_for_problem(SECOND, make_problem(SADDLE_QUARTIC, n=2, d=4, sigma=0.5),
                                  NoiseModel(0.5), CompressorSpec.topk(2), 0.1)
    assert second.p >= second.p_floor
    assert second.r > 0
