"""Tests for the Monte Carlo harness"""

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from sisrec.exceptions import ValidationError
from sisrec.harness import monte_carlo
from sisrec.harness.monte_carlo import (
    CLUSTER_GAP,
    empirical_quantile,
    generate_random_sis,
    mix_seed,
    run_detection_trials,
    run_monte_carlo,
)
from sisrec.schemas import BenchConfig, RiskSummary
from sisrec.services.estimator import core_risk_bound, full_risk_bound


@pytest.fixture
def small_config() -> BenchConfig:
    """Three noise-free core trials at n = 10."""
    return BenchConfig(trials=3, n_list=[10], s_list=[1], sigma=0.0, seed=1)


class TestMixSeed:
    """Per-trial seed derivation"""

    def test_deterministic(self):
        """Equal keys give equal seeds"""
        assert mix_seed(7, 10, 2, 3) == mix_seed(7, 10, 2, 3)

    def test_keys_and_order_matter(self):
        """Changing or permuting keys changes the seed"""
        base = mix_seed(7, 10, 2, 3)
        assert mix_seed(7, 10, 2, 4) != base
        assert mix_seed(7, 2, 10, 3) != base
        assert mix_seed(8, 10, 2, 3) != base

    def test_fits_in_64_bits(self):
        """Seeds are unsigned 64-bit integers"""
        assert 0 <= mix_seed(2**70, -1) < 2**64


class TestGenerateRandomSis:
    """Random root multisets"""

    def test_unit_circle(self):
        """Roots have modulus one"""
        spec = generate_random_sis(4, "unit-circle", seed=1)
        assert spec.s == 4
        np.testing.assert_allclose(np.abs(spec.root_values), 1.0)

    def test_disk(self):
        """Roots lie in the closed unit disk"""
        spec = generate_random_sis(5, "disk", seed=2)
        assert np.all(np.abs(spec.root_values) <= 1.0)

    def test_clustered_pairs(self):
        """Consecutive roots come in pairs at a small arc distance"""
        roots = generate_random_sis(4, "clustered", seed=3).root_values
        for a, b in (roots[0:2], roots[2:4]):
            assert abs(np.angle(b / a)) == pytest.approx(CLUSTER_GAP)

    def test_dft_grid(self):
        """Roots are distinct nodes of T_n"""
        n = 6
        roots = np.array(generate_random_sis(5, "dft-grid", seed=4, n=n).root_values)
        np.testing.assert_allclose(roots ** (2 * n + 1), 1.0, atol=1e-9)
        assert len(set(np.round(np.angle(roots), 9))) == 5

    def test_multiplicities_sum_to_order(self):
        """Repeated roots still give order s"""
        spec = generate_random_sis(6, "unit-circle", seed=5, max_multiplicity=3)
        assert spec.s == 6
        assert all(1 <= m <= 3 for _, m in spec.roots)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"s": 0, "mode": "disk"},
            {"s": 1, "mode": "spiral"},
            {"s": 1, "mode": "dft-grid"},
            {"s": 4, "mode": "dft-grid", "n": 1},
        ],
    )
    def test_invalid_requests(self, kwargs):
        """Bad orders, unknown modes and grids that are too small"""
        with pytest.raises(ValidationError):
            generate_random_sis(seed=0, **kwargs)


class TestEmpiricalQuantile:
    """Order statistic of rank ceil(level T)"""

    def test_ranks(self):
        """level 0.9 of 1..10 is 9; level 1 is the maximum; tiny levels give the minimum"""
        values = [float(v) for v in range(10, 0, -1)]
        assert empirical_quantile(values, 0.9) == 9.0
        assert empirical_quantile(values, 1.0) == 10.0
        assert empirical_quantile(values, 0.01) == 1.0

    def test_empty(self):
        """No values give no quantile"""
        assert empirical_quantile([], 0.9) is None


class TestBenchConfig:
    """Experiment validation"""

    def test_full_mode_needs_plan(self):
        """Full-window runs need n >= 9s"""
        with pytest.raises(PydanticValidationError):
            BenchConfig(trials=1, n_list=[10], s_list=[2], estimator_mode="full")

    def test_core_mode_window(self):
        """Core runs need 2n + 1 >= 9(s - 1)"""
        with pytest.raises(PydanticValidationError):
            BenchConfig(trials=1, n_list=[2], s_list=[3])

    def test_dft_grid_room(self):
        """dft-grid needs s <= 2n + 1"""
        with pytest.raises(PydanticValidationError):
            BenchConfig(
                trials=1, n_list=[1], s_list=[4], root_mode="dft-grid", estimator_mode="causal"
            )

    def test_detection_uses_full_plan(self):
        """Detection runs are checked against the full-window plan"""
        with pytest.raises(PydanticValidationError):
            BenchConfig(trials=1, n_list=[10], s_list=[2], task="detection")

    def test_sizes_positive(self):
        """Zero sizes are rejected"""
        with pytest.raises(PydanticValidationError):
            BenchConfig(trials=1, n_list=[0], s_list=[1])


class TestRunMonteCarlo:
    """Risk experiments"""

    def test_noise_free_risk_is_small(self, small_config, fast_solver):
        """sigma = 0 gives essentially zero MSE"""
        report = run_monte_carlo(small_config, fast_solver, threads=1)
        assert len(report.records) == 3
        assert report.failures == 0
        assert all(r.mse is not None and r.mse < 1e-6 for r in report.records)

    def test_records_cover_every_task_in_order(self, fast_solver):
        """One record per (n, s, trial), sorted"""
        config = BenchConfig(trials=2, n_list=[6, 8], s_list=[1, 2], sigma=0.1, seed=3)
        report = run_monte_carlo(config, fast_solver, threads=1)
        keys = [(r.n, r.s, r.trial) for r in report.records]
        assert keys == sorted(keys)
        assert len(keys) == 8
        assert len(report.summaries) == 4

    def test_deterministic(self, fast_solver):
        """Equal seeds give equal records"""
        config = BenchConfig(trials=2, n_list=[8], s_list=[1], sigma=0.2, seed=9)
        first = run_monte_carlo(config, fast_solver, threads=1)
        second = run_monte_carlo(config, fast_solver, threads=1)
        assert [r.mse for r in first.records] == [r.mse for r in second.records]

    def test_summary_bound_is_per_sample(self, fast_solver):
        """The core bound is divided by the 2n + 1 scored samples"""
        config = BenchConfig(trials=2, n_list=[8], s_list=[1], sigma=0.2, delta=0.1)
        summary = run_monte_carlo(config, fast_solver, threads=1).summaries[0]
        assert summary.bound == pytest.approx(core_risk_bound(1, 8, 0.2, 0.1) / 17)
        assert summary.quantile is not None
        assert summary.headroom == pytest.approx(summary.bound / summary.quantile)

    def test_full_mode_bound_is_per_sample(self, fast_solver):
        """Full-window MSE and bound are both per sample of the 4n + 1 window"""
        config = BenchConfig(
            trials=1, n_list=[9], s_list=[1], sigma=0.2, delta=0.1, estimator_mode="full"
        )
        report = run_monte_carlo(config, fast_solver, threads=1)
        summary = report.summaries[0]
        assert summary.bound == pytest.approx(full_risk_bound(1, 9, 0.2, 0.1) / 37)
        assert "4n+1" in RiskSummary.model_fields["bound"].description
        assert report.records[0].mse is not None

    def test_causal_mode_has_no_bound(self, fast_solver):
        """One-sided runs report no closed-form bound"""
        config = BenchConfig(trials=1, n_list=[8], s_list=[1], estimator_mode="causal")
        summary = run_monte_carlo(config, fast_solver, threads=1).summaries[0]
        assert summary.bound is None
        assert summary.headroom is None

    def test_failures_are_recorded(self, small_config, monkeypatch):
        """Estimator errors become failed records, not exceptions"""

        def failing(*args, **kwargs):
            raise ValidationError("boom")

        monkeypatch.setattr(monte_carlo, "timed_estimate", failing)
        report = run_monte_carlo(small_config, threads=1)
        assert report.failures == 3
        assert all(r.mse is None and r.error == "boom" for r in report.records)
        assert report.summaries[0].quantile is None
        assert report.summaries[0].failures == 3

    def test_progress_callback(self, small_config, fast_solver):
        """Progress reaches (total, total)"""
        calls = []
        run_monte_carlo(
            small_config, fast_solver, threads=1, progress=lambda i, t: calls.append((i, t))
        )
        assert calls[-1] == (3, 3)
        assert len(calls) == 3

    @pytest.mark.integration
    @pytest.mark.slow
    def test_worker_count_does_not_change_results(self, fast_solver):
        """Process-parallel runs match serial runs exactly"""
        config = BenchConfig(trials=4, n_list=[8], s_list=[1], sigma=0.2, seed=11)
        serial = run_monte_carlo(config, fast_solver, threads=1)
        parallel = run_monte_carlo(config, fast_solver, threads=2)
        assert [r.mse for r in serial.records] == [r.mse for r in parallel.records]


class TestDetectionTrials:
    """Type-I and Type-II counts"""

    def test_well_separated_alternative(self, fast_solver):
        """Alternatives far beyond r0 are always detected; noise never is"""
        config = BenchConfig(
            trials=2, n_list=[9], s_list=[1], sigma=0.01, task="detection", alt_scale=10.0
        )
        report = run_detection_trials(config, fast_solver, threads=1)
        assert report.records == []
        (summary,) = report.detection
        assert summary.trials == 2
        assert summary.type_i == 0
        assert summary.type_ii == 0
        assert summary.type_i_rate == 0.0
        assert summary.threshold == pytest.approx(5 / 8 * summary.r0_squared)

    @pytest.mark.parametrize(
        "error",
        [np.linalg.LinAlgError("SVD did not converge"), FloatingPointError("overflow"), ValueError],
    )
    def test_numerical_failures_are_counted(self, fast_solver, monkeypatch, error):
        """A numerical error in one trial is counted and the batch still completes"""
        calls = []

        def flaky(y, *args, **kwargs):
            calls.append(len(calls))
            if len(calls) == 1:
                raise error
            return real_detect(y, *args, **kwargs)

        real_detect = monte_carlo.detect
        monkeypatch.setattr(monte_carlo, "detect", flaky)
        config = BenchConfig(
            trials=3, n_list=[9], s_list=[1], sigma=0.01, task="detection", alt_scale=10.0
        )
        report = run_detection_trials(config, fast_solver, threads=1)
        (summary,) = report.detection
        assert report.failures == 1
        assert summary.failures == 1
        assert summary.trials == 2
        assert summary.type_ii == 0
