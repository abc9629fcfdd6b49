"""
Data-driven filter estimators.

The core estimator fits a two-sided filter on [-n, n] to observations on
[-2n, 2n] and returns phi * y on the inner window. The one-sided estimator
fits a causal filter (optionally with a prediction lead) and scores it on
the right half of the window.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from sisrec.config.settings import get_settings
from sisrec.core.signal import ObservationWindow, TwoSidedSequence
from sisrec.core.spectral import SpectrumVec, idft
from sisrec.exceptions import ValidationError
from sisrec.observability.logging import get_logger
from sisrec.services.filter_oracle import C_STAR, FilterBudget
from sisrec.services.solver import FitProblem, FitResult, SolverConfig, apply_filter, fit_filter

logger = get_logger(__name__)

Constraint = Literal["both", "l1"]


@dataclass
class EstimateResult:
    """An estimate together with the filter fits that produced it."""

    x_hat: TwoSidedSequence
    fits: list[FitResult] = field(default_factory=list)
    mode: str = "core"

    @property
    def converged(self) -> bool:
        return all(fit.converged for fit in self.fits)

    @property
    def objective(self) -> float:
        return float(sum(fit.objective for fit in self.fits))


def _check_order(s: int) -> None:
    if s < 1:
        raise ValidationError(f"Subspace order s must be at least 1, got {s}")


def core_problem(y: ObservationWindow, s: int, constraint: Constraint = "both") -> FitProblem:
    """
    The core fit on y observed over [-2n, 2n].

    Raises:
        ValidationError: If s < 1, the window is too short for s, or the
            constraint name is unknown
    """
    _check_order(s)
    n = y.N // 2
    if 2 * n + 1 < 9 * (s - 1) or n < 1:
        raise ValidationError(
            f"Core window half-width n={n} is too small for order s={s}",
            {"n": n, "s": s, "required": "2n+1 >= 9(s-1)"},
        )
    if constraint == "both":
        budget = FilterBudget.two_sided(n, s)
    elif constraint == "l1":
        budget = FilterBudget.l1_only(n, s)
    else:
        raise ValidationError(f"Unknown constraint '{constraint}' (expected 'both' or 'l1')")
    return FitProblem(y=y, n=n, budget=budget)


def run_core(
    y: ObservationWindow,
    s: int,
    config: SolverConfig | None = None,
    constraint: Constraint = "both",
    reference: TwoSidedSequence | None = None,
) -> EstimateResult:
    """Core estimate x_hat = phi_hat * y on [-n, n], with its fit."""
    problem = core_problem(y, s, constraint)
    fit = fit_filter(problem, config, reference=reference)
    return EstimateResult(apply_filter(fit.phi, problem), [fit], mode="core")


def estimate_core(
    y: ObservationWindow,
    s: int,
    config: SolverConfig | None = None,
    constraint: Constraint = "both",
    reference: TwoSidedSequence | None = None,
) -> TwoSidedSequence:
    """
    Estimate the signal on [-n, n] from observations on [-2n, 2n].

    Args:
        y: Observations with half-width N = 2n (an odd N drops the outermost sample)
        s: Subspace order
        config: Solver settings
        constraint: "both" for the l1 and l_inf caps, "l1" for the l1 cap alone
        reference: Optional comparator filter in C_n

    Returns:
        The estimate supported on [-n, n]
    """
    return run_core(y, s, config, constraint, reference).x_hat


def onesided_problem(
    y: ObservationWindow, s: int, c1: float | None = None, lead: int = 0
) -> FitProblem:
    """
    The causal fit scored on [N - 2n', N] with filter taps on [h, h + 2n'].

    n' = floor((2N - h) / 4), the largest half-width whose convolution stays
    inside the observed window.

    Raises:
        ValidationError: If s < 1, the lead is negative, or n' < 1
    """
    _check_order(s)
    if lead < 0:
        raise ValidationError(f"Prediction lead must be nonnegative, got {lead}")
    c1 = get_settings().c1 if c1 is None else c1
    n = (2 * y.N - lead) // 4
    if n < 1:
        raise ValidationError(
            f"Window half-width {y.N} leaves no room for a lead-{lead} causal fit",
            {"N": y.N, "lead": lead},
        )
    budget = FilterBudget.causal(n, s, c1)
    return FitProblem(y=y, n=n, budget=budget, shift=y.N - n, causal=True, lead=lead)


def run_onesided(
    y: ObservationWindow,
    s: int,
    c1: float | None = None,
    config: SolverConfig | None = None,
    lead: int = 0,
    reference: TwoSidedSequence | None = None,
) -> EstimateResult:
    """One-sided estimate on the right half-window, with its fit."""
    problem = onesided_problem(y, s, c1, lead)
    fit = fit_filter(problem, config, reference=reference)
    return EstimateResult(apply_filter(fit.phi, problem), [fit], mode="causal")


def estimate_onesided(
    y: ObservationWindow,
    s: int,
    c1: float | None = None,
    config: SolverConfig | None = None,
    lead: int = 0,
) -> TwoSidedSequence:
    """
    Causal (or, with lead h > 0, h-step predictive) estimate on [N - 2n', N].

    Each output x_hat_t only uses observations y_tau with tau <= t - h. The
    guarantee assumes a quasi-stable ground truth, which cannot be checked
    from the data.
    """
    return run_onesided(y, s, c1, config, lead).x_hat


def sample_extreme_point(s: int, n: int, seed: int) -> TwoSidedSequence:
    """
    Random vertex of the core feasible set.

    The spectrum has 18s nonzero entries at distinct random grid indices,
    each with modulus c/sqrt(2n+1) and a uniform random phase, so the l1 cap
    is met with equality.

    Raises:
        ValidationError: If 18s > 2n+1
    """
    _check_order(s)
    size = 2 * n + 1
    if 18 * s > size:
        raise ValidationError(f"An extreme point needs 18s={18 * s} <= 2n+1={size}")
    rng = np.random.default_rng(seed)
    indices = rng.choice(size, 18 * s, replace=False)
    phases = np.exp(2j * np.pi * rng.random(18 * s))
    values = np.zeros(size, dtype=np.complex128)
    values[indices] = (C_STAR / math.sqrt(size)) * phases
    return idft(SpectrumVec(n, values))


def core_risk_bound(s: int, n: int, sigma: float, delta: float) -> float:
    """80 c^2 sigma^2 (3s log(2n+1) + 10s + log(1/delta)) log^2(9 e^4 s)."""
    _check_delta(delta)
    log_term = 3 * s * math.log(2 * n + 1) + 10 * s + math.log(1.0 / delta)
    return 80 * C_STAR**2 * sigma**2 * log_term * math.log(9 * math.e**4 * s) ** 2


def full_risk_bound(s: int, n: int, sigma: float, delta: float) -> float:
    """160 c^2 sigma^2 (4s log(2n+1) + 10s + log(1/delta)) log^2(9 e^4 s) log_3(n/s)."""
    _check_delta(delta)
    log_term = 4 * s * math.log(2 * n + 1) + 10 * s + math.log(1.0 / delta)
    scales = max(math.log(n / s, 3), 1.0)
    return 160 * C_STAR**2 * sigma**2 * log_term * math.log(9 * math.e**4 * s) ** 2 * scales


def _check_delta(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")


def timed_estimate(
    mode: str,
    y: ObservationWindow,
    s: int,
    config: SolverConfig | None = None,
    c1: float | None = None,
    lead: int = 0,
) -> EstimateResult:
    """Dispatch on the estimator mode name ("core", "full", "causal") and log timing."""
    from sisrec.services.multiscale import run_full

    start = time.perf_counter()
    logger.log_operation_start("estimate", mode=mode, s=s, N=y.N)
    if mode == "core":
        result = run_core(y, s, config)
    elif mode == "full":
        result = run_full(y, s, config)
    elif mode == "causal":
        result = run_onesided(y, s, c1, config, lead)
    else:
        raise ValidationError(f"Unknown estimator mode '{mode}'")
    logger.log_operation_complete(
        "estimate",
        duration=time.perf_counter() - start,
        mode=mode,
        fits=len(result.fits),
        converged=result.converged,
    )
    return result
