"""Tests for the core and one-sided estimators and their risk bounds"""

import math

import numpy as np
import pytest

from sisrec.core.signal import ObservationWindow, SisSpec, TwoSidedSequence, add_noise, synthesize
from sisrec.core.spectral import dft
from sisrec.exceptions import ValidationError
from sisrec.services.estimator import (
    core_problem,
    core_risk_bound,
    estimate_core,
    estimate_onesided,
    full_risk_bound,
    onesided_problem,
    run_core,
    run_onesided,
    sample_extreme_point,
    timed_estimate,
)
from sisrec.harness.monte_carlo import run_monte_carlo
from sisrec.schemas import BenchConfig
from sisrec.services.filter_oracle import C_STAR, FilterBudget, hybrid_filter
from sisrec.services.multiscale import estimate_full
from sisrec.services.solver import SolverConfig, residual_objective


class TestCoreEstimator:
    """Two-sided estimate on [-n, n]"""

    def test_support_is_inner_window(self, noisy_observation, fast_solver):
        """Observations on [-2n, 2n] give an estimate on [-n, n]"""
        x_hat = estimate_core(noisy_observation, 2, fast_solver)
        assert x_hat.support == (-20, 20)

    def test_noise_free_signal_recovered(self, clean_observation, fast_solver):
        """With sigma = 0 the estimate matches the signal"""
        x_hat = estimate_core(clean_observation, 2, fast_solver)
        truth = clean_observation.y.restrict(-20, 20).values
        error = np.linalg.norm(x_hat.values - truth) / np.linalg.norm(truth)
        assert error < 0.05

    def test_odd_half_width_drops_outer_samples(self):
        """N = 2n + 1 uses n = N // 2"""
        y = ObservationWindow(TwoSidedSequence.zeros(-21, 21), 21)
        assert core_problem(y, 2).n == 10

    def test_short_window_rejected(self):
        """2n + 1 >= 9(s - 1) is required"""
        y = ObservationWindow(TwoSidedSequence.zeros(-4, 4), 4)
        assert core_problem(y, 1).n == 2
        with pytest.raises(ValidationError):
            core_problem(y, 2)
        with pytest.raises(ValidationError):
            core_problem(y, 0)

    def test_constraint_variants(self, clean_observation):
        """The l1 variant keeps a single cap; unknown names are rejected"""
        budget = core_problem(clean_observation, 1, "l1").budget
        assert budget == FilterBudget.l1_only(20, 1)
        with pytest.raises(ValidationError):
            core_problem(clean_observation, 1, "l2")  # type: ignore[arg-type]

    def test_result_summaries(self, noisy_observation, fast_solver):
        """run_core reports one fit and its objective"""
        result = run_core(noisy_observation, 2, fast_solver)
        assert result.mode == "core"
        assert len(result.fits) == 1
        assert result.objective == pytest.approx(result.fits[0].objective)
        assert result.converged == result.fits[0].converged


class TestOneSidedEstimator:
    """Causal and predictive estimates on the right half-window"""

    def test_support_and_filter_lead(self, noisy_observation, fast_solver):
        """N = 40, h = 3 gives n' = 19, output on [2, 40] and taps from h"""
        problem = onesided_problem(noisy_observation, 2, lead=3)
        assert problem.n == 19
        assert problem.scored_range == (2, 40)
        result = run_onesided(noisy_observation, 2, config=fast_solver, lead=3)
        assert result.x_hat.support == (2, 40)
        assert result.fits[0].phi.lo == 3
        assert result.mode == "causal"

    def test_filter_is_causal_without_lead(self, noisy_observation, fast_solver):
        """Taps live on [0, 2n']"""
        phi = run_onesided(noisy_observation, 1, config=fast_solver).fits[0].phi
        assert phi.within_causal(40)

    def test_c1_defaults_to_settings(self, clean_observation, monkeypatch):
        """The causal constant comes from SISREC_C1 when not given"""
        from sisrec.config.settings import reset_settings

        monkeypatch.setenv("SISREC_C1", "2.0")
        reset_settings()
        budget = onesided_problem(clean_observation, 1).budget
        assert budget == FilterBudget.causal(20, 1, 2.0)

    def test_invalid_arguments(self, clean_observation):
        """Negative leads and windows too short for the lead are rejected"""
        with pytest.raises(ValidationError):
            onesided_problem(clean_observation, 1, lead=-1)
        y = ObservationWindow(TwoSidedSequence.zeros(-1, 1), 1)
        with pytest.raises(ValidationError):
            onesided_problem(y, 1, lead=3)

    def test_noise_free_prediction(self, clean_observation, fast_solver):
        """Clean members of the subspace are predicted one step ahead"""
        x_hat = estimate_onesided(clean_observation, 2, config=fast_solver, lead=1)
        truth = clean_observation.y.restrict(*x_hat.support).values
        error = np.linalg.norm(x_hat.values - truth) / np.linalg.norm(truth)
        assert error < 0.1


class TestExtremePoints:
    """Vertices of the core feasible set"""

    def test_meets_l1_cap(self):
        """18s entries of modulus c / sqrt(2n+1) on the grid"""
        n, s = 20, 1
        phi = sample_extreme_point(s, n, seed=3)
        spectrum = dft(phi, n)
        magnitudes = np.abs(spectrum.values)
        assert np.count_nonzero(magnitudes > 1e-9) == 18 * s
        np.testing.assert_allclose(
            magnitudes[magnitudes > 1e-9], C_STAR / math.sqrt(2 * n + 1), rtol=1e-9
        )
        assert spectrum.norm(1) == pytest.approx(FilterBudget.two_sided(n, s).l1_cap)

    def test_seeded(self):
        """Equal seeds give equal vertices"""
        assert sample_extreme_point(1, 20, 5).allclose(sample_extreme_point(1, 20, 5))

    def test_too_many_entries_rejected(self):
        """18s may not exceed 2n + 1"""
        with pytest.raises(ValidationError):
            sample_extreme_point(3, 20, 0)


class TestRiskBounds:
    """Closed-form high-probability risk bounds"""

    def test_scale_with_noise_power(self):
        """Both bounds are proportional to sigma^2"""
        assert core_risk_bound(2, 100, 0.2, 0.1) == pytest.approx(
            4 * core_risk_bound(2, 100, 0.1, 0.1)
        )
        assert full_risk_bound(1, 81, 1.0, 0.05) == pytest.approx(
            100 * full_risk_bound(1, 81, 0.1, 0.05)
        )

    def test_grow_as_delta_shrinks(self):
        """Smaller failure probabilities give larger bounds"""
        assert core_risk_bound(1, 50, 1.0, 0.01) > core_risk_bound(1, 50, 1.0, 0.1)

    def test_zero_noise(self):
        """sigma = 0 gives a zero bound"""
        assert core_risk_bound(1, 50, 0.0, 0.1) == 0.0

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.5, 2.0])
    def test_delta_range(self, delta):
        """delta must lie strictly between 0 and 1"""
        with pytest.raises(ValidationError):
            core_risk_bound(1, 10, 1.0, delta)
        with pytest.raises(ValidationError):
            full_risk_bound(1, 10, 1.0, delta)


class TestTimedEstimate:
    """Mode dispatch"""

    @pytest.mark.parametrize("mode", ["core", "causal"])
    def test_modes(self, mode, noisy_observation, fast_solver):
        """Each mode name reaches its estimator"""
        result = timed_estimate(mode, noisy_observation, 2, fast_solver)
        assert result.mode == mode

    def test_unknown_mode(self, noisy_observation):
        """Unknown mode names are rejected"""
        with pytest.raises(ValidationError):
            timed_estimate("median", noisy_observation, 1)


class TestScaleEquivariance:
    """estimate(alpha y) = alpha estimate(y)"""

    @pytest.mark.parametrize("alpha", [4.0, -0.5, 0.125])
    def test_core(self, noisy_observation, fast_solver, alpha):
        """Power-of-two scalings commute with every floating point step"""
        scaled = ObservationWindow(noisy_observation.y.scaled(alpha), noisy_observation.N)
        x_hat = estimate_core(noisy_observation, 2, fast_solver)
        np.testing.assert_allclose(
            estimate_core(scaled, 2, fast_solver).values, alpha * x_hat.values, rtol=1e-10
        )

    def test_core_complex_phase(self, noisy_observation, fast_solver):
        """A complex scale rotates the estimate"""
        alpha = 2j
        scaled = ObservationWindow(noisy_observation.y.scaled(alpha), noisy_observation.N)
        x_hat = estimate_core(noisy_observation, 2, fast_solver)
        expected = alpha * x_hat.values
        actual = estimate_core(scaled, 2, fast_solver).values
        assert np.linalg.norm(actual - expected) <= 1e-6 * np.linalg.norm(expected)

    def test_full(self, noisy_observation, fast_solver):
        """The multiscale estimate scales with the data as well"""
        scaled = ObservationWindow(noisy_observation.y.scaled(-2.0), noisy_observation.N)
        x_hat = estimate_full(noisy_observation, 1, fast_solver)
        np.testing.assert_allclose(
            estimate_full(scaled, 1, fast_solver).values, -2.0 * x_hat.values, rtol=1e-10
        )


@pytest.mark.slow
class TestRiskAcceptance:
    """Monte Carlo risk against the closed-form bounds and the rate in n"""

    def test_quantile_below_bound(self, fast_solver):
        """The empirical (1 - delta)-quantile of the per-sample MSE stays under the bound"""
        config = BenchConfig(trials=12, n_list=[27], s_list=[1, 2], sigma=0.3, delta=0.1, seed=4)
        report = run_monte_carlo(config, fast_solver, threads=1)
        assert report.failures == 0
        for summary in report.summaries:
            assert summary.quantile is not None and summary.bound is not None
            assert summary.quantile <= summary.bound
            assert summary.headroom >= 1.0

    def test_risk_decreases_with_window(self):
        """Tripling n above the identity-feasibility threshold 246 s lowers the per-sample risk"""
        tone = SisSpec.from_roots([np.exp(0.3j)])
        solver = SolverConfig(max_iter=1000, tol=1e-9, lipschitz_iters=20)
        mse = {}
        for n in (729, 2187):
            assert FilterBudget.two_sided(n, 1).R1 < 2 * n + 1
            x = synthesize(tone, [1.0], -2 * n, 2 * n)
            errors = []
            for seed in range(3):
                y = add_noise(x, 2 * n, 1.0, seed=seed)
                x_hat = estimate_core(y, 1, solver)
                errors.append(np.mean(np.abs(x_hat.values - x.window(n)) ** 2))
            mse[n] = float(np.mean(errors))
        assert mse[729] / mse[2187] > 1.3

    def test_fit_dominates_oracle_when_caps_bind(self):
        """With the identity infeasible the fitted filter still beats the oracle hybrid filter"""
        tone = SisSpec.from_roots([np.exp(0.3j)])
        n, m = 297, 33
        x = synthesize(tone, [1.0], -2 * n, 2 * n)
        y = add_noise(x, 2 * n, 0.5, seed=11)
        problem = core_problem(y, 1)
        assert problem.budget.R1 < 2 * n + 1

        oracle = hybrid_filter(tone, m)
        result = run_core(y, 1, SolverConfig(max_iter=300), reference=oracle)
        fit = result.fits[0]
        assert fit.objective <= residual_objective(oracle, problem) * (1 + 1e-9)
        assert float(np.sum(np.abs(fit.spectrum.values))) <= problem.budget.l1_cap * (1 + 1e-6)
