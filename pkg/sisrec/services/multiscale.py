"""
Multiscale full-window estimator.

Observations on [-2n, 2n] are denoised by the core estimator on [-n, n]
and by side filters of shrinking half-width n_k = n 3^{-k} centered at
+-h_k, h_k = 2n - 2n_k, each scored on its own interval. Indices beyond
2n - 9s are returned as observed. When n / (9s) is not a power of 3 the
window is covered by up to three overlapping triadic runs whose estimates
are averaged on the overlaps.
"""

import math
import time
from collections.abc import Iterator
from dataclasses import dataclass

import numpy as np

from sisrec.core.signal import ObservationWindow, TwoSidedSequence
from sisrec.exceptions import ValidationError
from sisrec.observability.logging import get_logger
from sisrec.services.estimator import EstimateResult, run_core
from sisrec.services.filter_oracle import FilterBudget
from sisrec.services.solver import FitProblem, FitResult, SolverConfig, apply_filter, fit_filter

logger = get_logger(__name__)


def _power_of_three(value: int) -> bool:
    if value < 1:
        return False
    while value % 3 == 0:
        value //= 3
    return value == 1


def _ceil_power_of_three(value: int) -> int:
    p = 1
    while p < value:
        p *= 3
    return p


def _floor_power_of_three(value: int) -> int:
    p = 1
    while p * 3 <= value:
        p *= 3
    return p


@dataclass(frozen=True)
class SideInterval:
    """Side fit k on one side: filter half-width n_k, scored window centered at sign * h_k."""

    k: int
    sign: int
    n_k: int
    h_k: int

    @property
    def assigned(self) -> tuple[int, int]:
        """Indices whose estimate this fit supplies."""
        if self.sign > 0:
            return self.h_k - self.n_k + 1, self.h_k + self.n_k
        return -self.h_k - self.n_k, -self.h_k + self.n_k - 1

    @property
    def shift(self) -> int:
        return self.sign * self.h_k


@dataclass(frozen=True)
class MultiscalePlan:
    """
    Geometry of the full-window estimator for half-width 2n and order s.

    A triadic plan (n = 9s 3^K) carries its side intervals; otherwise
    ``centers`` lists the distinct centers of the covering runs and
    ``sub_plan`` the triadic plan each of them follows.
    """

    n: int
    s: int
    K: int
    intervals: tuple[SideInterval, ...]
    triadic: bool
    centers: tuple[int, ...] = ()
    sub_plan: "MultiscalePlan | None" = None

    @property
    def passthrough(self) -> int:
        """Indices with |t| above this value are returned as observed."""
        return 2 * self.n - 9 * self.s

    def partition(self) -> Iterator[tuple[str, int, int]]:
        """
        Labelled index ranges of a triadic plan, in increasing order.

        Together they partition [-2n, 2n].
        """
        if not self.triadic:
            raise ValidationError("Only triadic plans partition the window")
        if self.passthrough < 2 * self.n:
            yield "observed", -2 * self.n, -self.passthrough - 1
        for side in sorted(
            (iv for iv in self.intervals if iv.sign < 0), key=lambda iv: iv.k, reverse=True
        ):
            yield f"side-{side.k}", *side.assigned
        yield "core", -self.n, self.n
        for side in sorted((iv for iv in self.intervals if iv.sign > 0), key=lambda iv: iv.k):
            yield f"side+{side.k}", *side.assigned
        if self.passthrough < 2 * self.n:
            yield "observed", self.passthrough + 1, 2 * self.n


def build_plan(n: int, s: int) -> MultiscalePlan:
    """
    Plan the full-window estimator for observations on [-2n, 2n].

    Raises:
        ValidationError: If s < 1 or the window is too short (n < 9s, or
            after rounding to powers of 3, n0 < 9 s0)
    """
    if s < 1:
        raise ValidationError(f"Subspace order s must be at least 1, got {s}")
    if n < 9 * s:
        raise ValidationError(f"Full-window estimation needs n >= 9s, got n={n}, s={s}")

    if n % (9 * s) == 0 and _power_of_three(n // (9 * s)):
        K = round(math.log(n // (9 * s), 3))
        intervals: list[SideInterval] = []
        for k in range(1, K + 1):
            n_k = n // 3**k
            h_k = 2 * n - 2 * n_k
            intervals.append(SideInterval(k, +1, n_k, h_k))
            intervals.append(SideInterval(k, -1, n_k, h_k))
        return MultiscalePlan(n=n, s=s, K=K, intervals=tuple(intervals), triadic=True)

    s0 = _ceil_power_of_three(s)
    n0 = _floor_power_of_three(n)
    if n0 < 9 * s0:
        raise ValidationError(
            f"After rounding to powers of 3 the window is too short: n0={n0} < 9 s0={9 * s0}",
            {"n": n, "s": s, "n0": n0, "s0": s0},
        )
    sub_plan = build_plan(n0, s0)
    centers = tuple(sorted({-2 * n + 2 * n0, 0, 2 * n - 2 * n0}))
    return MultiscalePlan(
        n=n, s=s, K=sub_plan.K, intervals=(), triadic=False, centers=centers, sub_plan=sub_plan
    )


def _run_triadic(
    y: ObservationWindow, plan: MultiscalePlan, config: SolverConfig | None
) -> EstimateResult:
    n = plan.n
    core = run_core(y, plan.s, config)
    values = y.y.restrict(-2 * n, 2 * n).values.copy()
    values[n : 3 * n + 1] = core.x_hat.restrict(-n, n).values
    fits = list(core.fits)

    for side in plan.intervals:
        problem = FitProblem(
            y=y, n=side.n_k, budget=FilterBudget.two_sided(side.n_k, plan.s), shift=side.shift
        )
        fit = fit_filter(problem, config)
        lo, hi = side.assigned
        estimate = apply_filter(fit.phi, problem).restrict(lo, hi)
        values[lo + 2 * n : hi + 2 * n + 1] = estimate.values
        fits.append(fit)
        logger.debug(
            "Side fit complete", k=side.k, sign=side.sign, n_k=side.n_k, objective=fit.objective
        )
    return EstimateResult(TwoSidedSequence(-2 * n, values), fits, mode="full")


def run_full(y: ObservationWindow, s: int, config: SolverConfig | None = None) -> EstimateResult:
    """Full-window estimate on [-2n, 2n] with every fit that produced it."""
    if y.N % 2:
        raise ValidationError(f"Full-window estimation needs an even half-width, got N={y.N}")
    start = time.perf_counter()
    plan = build_plan(y.N // 2, s)
    logger.log_operation_start("estimate_full", n=plan.n, s=s, K=plan.K, triadic=plan.triadic)

    if plan.triadic:
        result = _run_triadic(y, plan, config)
    else:
        assert plan.sub_plan is not None
        n0 = plan.sub_plan.n
        size = 2 * y.N + 1
        total = np.zeros(size, dtype=np.complex128)
        counts = np.zeros(size)
        fits: list[FitResult] = []
        for center in plan.centers:
            sub = _run_triadic(y.recentered(center, 2 * n0), plan.sub_plan, config)
            lo = center - 2 * n0 + y.N
            total[lo : lo + 4 * n0 + 1] += sub.x_hat.values
            counts[lo : lo + 4 * n0 + 1] += 1
            fits.extend(sub.fits)
        result = EstimateResult(TwoSidedSequence(-y.N, total / counts), fits, mode="full")

    logger.log_operation_complete(
        "estimate_full",
        duration=time.perf_counter() - start,
        fits=len(result.fits),
        converged=result.converged,
    )
    return result


def estimate_full(
    y: ObservationWindow, s: int, config: SolverConfig | None = None
) -> TwoSidedSequence:
    """
    Estimate the signal on the whole window [-2n, 2n].

    Args:
        y: Observations with even half-width N = 2n
        s: Subspace order
        config: Solver settings shared by every fit

    Returns:
        The estimate supported on [-2n, 2n]

    Raises:
        ValidationError: If N is odd or n is too small for s
    """
    return run_full(y, s, config).x_hat
