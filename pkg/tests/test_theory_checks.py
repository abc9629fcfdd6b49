"""Tests for the numerical inequality checks"""

import numpy as np
import pytest

from sisrec.harness.theory_checks import (
    check_convolution_powers,
    check_dirichlet_orthogonality,
    check_hilbert_limit,
    check_holder,
    check_hybrid_filters,
    check_kernel_grid_sums,
    check_oversampling,
    check_parseval,
    check_projection,
    theory_checks,
)


@pytest.fixture
def check_rng() -> np.random.Generator:
    return np.random.default_rng(0)


class TestIndividualChecks:
    """Each check on a small instance set"""

    def test_parseval(self, check_rng):
        result = check_parseval(check_rng, (4, 16))
        assert result.passed
        assert result.name == "parseval"
        assert result.slack == pytest.approx(result.bound - result.measured)

    def test_dirichlet_orthogonality(self):
        result = check_dirichlet_orthogonality((3, 8))
        assert result.passed
        assert result.measured == 0

    def test_kernel_grid_sums(self, check_rng):
        result = check_kernel_grid_sums(check_rng, (4, 10), shifts=4)
        assert result.passed
        assert result.details["causal_fejer_gap"] < 1e-9

    def test_oversampling(self, check_rng):
        results = check_oversampling(check_rng, (4, 12))
        assert [r.name for r in results] == [
            "oversampling_l1",
            "oversampling_linf",
            "oversampling_linf_sparse",
        ]
        assert all(r.passed for r in results)

    def test_hybrid_filters(self, check_rng):
        """Certificates, reproduction and the interpolant sup-norm on random subspaces"""
        results = check_hybrid_filters(check_rng, (9,), specs=3)
        assert all(r.passed for r in results)
        assert [r.name for r in results] == [
            "hybrid_certificates",
            "hybrid_reproducing",
            "causal_hybrid_linf",
            "interpolant_sup",
        ]
        assert results[0].details["instances"] + results[0].details["skipped"] == 3

    def test_convolution_powers(self, check_rng):
        assert check_convolution_powers(check_rng).passed

    def test_hilbert_limit(self):
        """m ||psi||^2 is 1 for a constant and decreases toward 4 for a trend"""
        single, double = check_hilbert_limit((64, 256))
        assert single.passed
        assert double.passed
        assert double.details["decreasing"]

    def test_hilbert_limit_too_coarse(self):
        """Short filters are still far from the limit"""
        _, double = check_hilbert_limit((4, 8))
        assert not double.passed

    def test_projection_and_holder(self, check_rng):
        assert check_projection(check_rng, 50).passed
        assert check_holder(check_rng, 50).passed


class TestSuite:
    """The full check list"""

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", [0, 1, 3])
    def test_small_suite_passes(self, seed):
        """Every check passes on the small instance sizes, damped subspaces included"""
        results = theory_checks("small", seed=seed)
        failed = [r.name for r in results if not r.passed]
        assert failed == []
        assert len({r.name for r in results}) == len(results)

    @pytest.mark.slow
    def test_seeded(self):
        """Equal seeds give equal measurements"""
        first = [r.measured for r in theory_checks("small", seed=3)]
        second = [r.measured for r in theory_checks("small", seed=3)]
        assert first == second

    def test_hybrid_filters_on_damped_subspaces(self):
        """Reproduction is scored on disk and clustered draws as well as on the circle"""
        results = check_hybrid_filters(np.random.default_rng(1), (18,), specs=6)
        by_name = {r.name: r for r in results}
        assert by_name["hybrid_reproducing"].passed
        assert by_name["hybrid_reproducing"].measured < 1e-7
