"""
Monte Carlo risk and detection experiments.

Every trial derives its random streams from a 64-bit mix of
(seed, n, s, trial), so results do not depend on execution order or on
the number of worker processes.
"""

import math
import time
from collections.abc import Callable
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any

import numpy as np

from sisrec.config.settings import get_settings
from sisrec.core.signal import (
    ObservationWindow,
    SisSpec,
    TwoSidedSequence,
    add_noise,
    random_member,
)
from sisrec.exceptions import SisrecError, ValidationError
from sisrec.observability.logging import get_logger
from sisrec.schemas import BenchConfig, DetectionSummary, RiskReport, RiskSummary, TrialRecord
from sisrec.services.detection import (
    REJECTION_LEVEL,
    DetectionSetup,
    alternative_signal,
    detect,
)
from sisrec.services.estimator import core_risk_bound, full_risk_bound, timed_estimate
from sisrec.services.solver import SolverConfig

logger = get_logger(__name__)

# numerical failures inside one trial that must not abort a batch
NUMERICAL_ERRORS = (ArithmeticError, np.linalg.LinAlgError, ValueError)

ProgressCallback = Callable[[int, int], None]

_MASK64 = (1 << 64) - 1
CLUSTER_GAP = 1e-3


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, *keys: int) -> int:
    """Fold integer keys into a seed with splitmix64; the result is a 64-bit integer."""
    h = _splitmix64(seed & _MASK64)
    for key in keys:
        h = _splitmix64(h ^ (key & _MASK64))
    return h


def _multiplicities(s: int, max_multiplicity: int, rng: np.random.Generator) -> list[int]:
    parts: list[int] = []
    remaining = s
    while remaining > 0:
        m = int(rng.integers(1, min(max_multiplicity, remaining) + 1))
        parts.append(m)
        remaining -= m
    return parts


def generate_random_sis(
    s: int,
    mode: str,
    seed: int,
    n: int | None = None,
    max_multiplicity: int = 1,
) -> SisSpec:
    """
    Draw a random subspace of order s.

    Modes:
        unit-circle: roots with i.i.d. uniform phases on the unit circle
        disk: roots uniform in the closed unit disk
        clustered: pairs of unit-circle roots at arc distance 1e-3
        dft-grid: distinct nodes of the grid T_n (requires n)

    Raises:
        ValidationError: If s < 1, the mode is unknown, or dft-grid lacks room
    """
    if s < 1:
        raise ValidationError(f"Subspace order s must be at least 1, got {s}")
    rng = np.random.default_rng(seed)
    parts = _multiplicities(s, max_multiplicity, rng)
    k = len(parts)

    if mode == "unit-circle":
        roots = np.exp(2j * np.pi * rng.random(k))
    elif mode == "disk":
        radius = np.sqrt(rng.random(k))
        roots = radius * np.exp(2j * np.pi * rng.random(k))
    elif mode == "clustered":
        centers = 2 * np.pi * rng.random((k + 1) // 2)
        angles = np.column_stack([centers, centers + CLUSTER_GAP]).reshape(-1)[:k]
        roots = np.exp(1j * angles)
    elif mode == "dft-grid":
        if n is None:
            raise ValidationError("dft-grid mode needs the grid half-width n")
        if k > 2 * n + 1:
            raise ValidationError(f"T_{n} has only {2 * n + 1} nodes, {k} requested")
        idx = rng.choice(2 * n + 1, k, replace=False)
        roots = np.exp(2j * np.pi * idx / (2 * n + 1))
    else:
        raise ValidationError(f"Unknown root mode '{mode}'")

    return SisSpec(tuple((complex(w), m) for w, m in zip(roots, parts)))


def empirical_quantile(values: list[float], level: float) -> float | None:
    """Order statistic of rank ceil(level * T) (1-indexed); None for no values."""
    if not values:
        return None
    ordered = sorted(values)
    rank = min(max(math.ceil(level * len(ordered) - 1e-12), 1), len(ordered))
    return ordered[rank - 1]


def _trial_signal(
    config: BenchConfig, n: int, s: int, trial: int
) -> tuple[SisSpec, TwoSidedSequence, ObservationWindow]:
    base = mix_seed(config.seed, n, s, trial)
    spec = generate_random_sis(
        s, config.root_mode, mix_seed(base, 0), n=n, max_multiplicity=config.max_multiplicity
    )
    x = random_member(spec, -2 * n, 2 * n, np.random.default_rng(mix_seed(base, 1)))
    if config.normalize:
        norm = float(np.linalg.norm(x.values))
        if norm > 0:
            x = x.scaled(1.0 / norm)
    y = add_noise(x, 2 * n, config.sigma, mix_seed(base, 2))
    return spec, x, y


def run_trial(
    config: BenchConfig, n: int, s: int, trial: int, solver: SolverConfig | None = None
) -> TrialRecord:
    """One risk trial; failures are recorded on the returned record."""
    record = TrialRecord(trial=trial, n=n, s=s, sigma=config.sigma, mode=config.root_mode)
    try:
        _, x, y = _trial_signal(config, n, s, trial)
        result = timed_estimate(config.estimator_mode, y, s, config=solver)
    except SisrecError as e:
        logger.log_error("risk_trial", e, trial=trial, n=n, s=s)
        record.error = e.message
        return record
    except NUMERICAL_ERRORS as e:
        logger.log_error("risk_trial", e, trial=trial, n=n, s=s)
        record.error = str(e)
        return record

    x_hat = result.x_hat
    err = x_hat.values - x.restrict(x_hat.lo, x_hat.hi).values
    record.mse = float(np.mean(np.abs(err) ** 2))
    record.converged = result.converged
    return record


def _risk_bound(config: BenchConfig, n: int, s: int) -> float | None:
    """Theoretical bound expressed per sample of the scored window."""
    if config.estimator_mode == "core":
        return core_risk_bound(s, n, config.sigma, config.delta) / (2 * n + 1)
    if config.estimator_mode == "full":
        return full_risk_bound(s, n, config.sigma, config.delta) / (4 * n + 1)
    return None


def _summarize(config: BenchConfig, n: int, s: int, records: list[TrialRecord]) -> RiskSummary:
    mses = [r.mse for r in records if r.mse is not None]
    quantile = empirical_quantile(mses, 1.0 - config.delta)
    bound = _risk_bound(config, n, s)
    headroom = bound / quantile if bound is not None and quantile else None
    return RiskSummary(
        n=n,
        s=s,
        trials=len(records),
        failures=len(records) - len(mses),
        quantile=quantile,
        median=float(np.median(mses)) if mses else None,
        mean=float(np.mean(mses)) if mses else None,
        bound=bound,
        headroom=headroom,
    )


def _execute(
    worker: Callable[..., Any],
    tasks: list[tuple[int, int, int]],
    config: BenchConfig,
    solver: SolverConfig | None,
    threads: int,
    progress: ProgressCallback | None,
) -> dict[tuple[int, int, int], Any]:
    """Run worker(config, n, s, trial, solver) for every task; results keyed by task."""
    results: dict[tuple[int, int, int], Any] = {}
    total = len(tasks)
    if threads <= 1 or total <= 1:
        for i, task in enumerate(tasks, start=1):
            results[task] = worker(config, *task, solver)
            if progress is not None:
                progress(i, total)
        return results

    with ProcessPoolExecutor(max_workers=threads) as executor:
        futures = {executor.submit(worker, config, *task, solver): task for task in tasks}
        for done, future in enumerate(as_completed(futures), start=1):
            results[futures[future]] = future.result()
            if progress is not None:
                progress(done, total)
    return results


def _tasks(config: BenchConfig) -> list[tuple[int, int, int]]:
    return [(n, s, t) for n in config.n_list for s in config.s_list for t in range(config.trials)]


def run_monte_carlo(
    config: BenchConfig,
    solver: SolverConfig | None = None,
    threads: int | None = None,
    progress: ProgressCallback | None = None,
) -> RiskReport:
    """
    Empirical risk of the configured estimator over random signals.

    Each trial draws a subspace and a signal in it (normalized to unit
    windowed norm unless disabled), adds noise, estimates, and records the
    mean squared error over the estimate's window. Per (n, s) the report
    carries the empirical (1 - delta)-quantile and the theoretical bound.

    Args:
        config: Experiment description
        solver: Solver settings for every fit
        threads: Worker processes (``Settings.threads`` by default)
        progress: Called with (completed, total) after each trial

    Returns:
        RiskReport with records sorted by (n, s, trial)
    """
    threads = threads or get_settings().threads
    start = time.perf_counter()
    tasks = _tasks(config)
    logger.log_operation_start(
        "monte_carlo", trials=len(tasks), threads=threads, estimator=config.estimator_mode
    )
    results = _execute(run_trial, tasks, config, solver, threads, progress)
    records: list[TrialRecord] = [results[task] for task in tasks]

    summaries = []
    for n in config.n_list:
        for s in config.s_list:
            group = [r for r in records if r.n == n and r.s == s]
            summaries.append(_summarize(config, n, s, group))
    failures = sum(1 for r in records if r.mse is None)
    elapsed = time.perf_counter() - start
    logger.log_operation_complete("monte_carlo", duration=elapsed, failures=failures)
    for summary in summaries:
        if summary.bound is not None and summary.quantile is not None:
            logger.log_certificate(
                "risk_quantile", summary.quantile, summary.bound, n=summary.n, s=summary.s
            )
    return RiskReport(
        config=config,
        records=records,
        summaries=summaries,
        failures=failures,
        wall_clock_seconds=elapsed,
    )


def run_detection_trial(
    config: BenchConfig, n: int, s: int, trial: int, solver: SolverConfig | None = None
) -> tuple[bool, bool] | None:
    """
    One null and one alternative draw; returns (rejected under H0, rejected under H1).

    None marks a failed trial.
    """
    base = mix_seed(config.seed, n, s, trial)
    setup = DetectionSetup(n, s, config.sigma, config.delta)
    r0 = math.sqrt(setup.r0_squared) * config.alt_scale
    try:
        spec = generate_random_sis(
            s, config.root_mode, mix_seed(base, 0), n=n, max_multiplicity=config.max_multiplicity
        )
        silence = TwoSidedSequence.zeros(-2 * n, 2 * n)
        null = add_noise(silence, 2 * n, config.sigma, mix_seed(base, 2))
        x = alternative_signal(spec, n, r0, mix_seed(base, 1))
        alt = add_noise(x, 2 * n, config.sigma, mix_seed(base, 3))
        h0 = detect(null, s, config.sigma, config.delta, solver)
        h1 = detect(alt, s, config.sigma, config.delta, solver)
    except (SisrecError, *NUMERICAL_ERRORS) as e:
        logger.log_error("detection_trial", e, trial=trial, n=n, s=s)
        return None
    return h0.reject, h1.reject


def run_detection_trials(
    config: BenchConfig,
    solver: SolverConfig | None = None,
    threads: int | None = None,
    progress: ProgressCallback | None = None,
) -> RiskReport:
    """
    Type-I and Type-II error counts of the detection test.

    Under the alternative the signal has windowed norm ``alt_scale * r0``.
    """
    threads = threads or get_settings().threads
    start = time.perf_counter()
    tasks = _tasks(config)
    logger.log_operation_start("detection_trials", trials=len(tasks), threads=threads)
    results = _execute(run_detection_trial, tasks, config, solver, threads, progress)

    summaries = []
    total_failures = 0
    for n in config.n_list:
        for s in config.s_list:
            outcomes = [results[(n, s, t)] for t in range(config.trials)]
            done = [o for o in outcomes if o is not None]
            failures = len(outcomes) - len(done)
            total_failures += failures
            setup = DetectionSetup(n, s, config.sigma, config.delta)
            summaries.append(
                DetectionSummary(
                    n=n,
                    s=s,
                    trials=len(done),
                    r0_squared=setup.r0_squared,
                    threshold=REJECTION_LEVEL * setup.r0_squared,
                    type_i=sum(1 for h0, _ in done if h0),
                    type_ii=sum(1 for _, h1 in done if not h1),
                    failures=failures,
                )
            )
    elapsed = time.perf_counter() - start
    logger.log_operation_complete("detection_trials", duration=elapsed, failures=total_failures)
    return RiskReport(
        config=config, detection=summaries, failures=total_failures, wall_clock_seconds=elapsed
    )
