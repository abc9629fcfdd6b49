"""
Numerical inequality checks.

Each check evaluates one inequality on concrete instances and reports the
worst measured value against its bound. Failures are report entries, never
exceptions.
"""

import math
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Literal

import numpy as np

from sisrec.core.signal import SisSpec, TwoSidedSequence, complex_normal
from sisrec.core.spectral import (
    dft,
    dirichlet,
    dirichlet_grid_bound,
    fejer,
    fejer_causal,
    fejer_grid_bound,
    grid_nodes,
    kernel_grid_sum,
    oversampling_l1_bound,
    oversampling_linf_bound,
    oversampling_linf_ratio,
    sparse_oversampling_bound,
    sparse_oversampling_ratio,
)
from sisrec.exceptions import ConditioningError
from sisrec.harness.monte_carlo import generate_random_sis
from sisrec.observability.logging import get_logger
from sisrec.schemas import CheckResult
from sisrec.services.filter_oracle import (
    INTERPOLANT_SUP_BOUND,
    build_hybrid_filter,
    build_hybrid_filter_causal,
    convolution_power_bound,
    holder_chain,
    min_norm_causal_filter,
    projector_row_filter,
    verify_reproducing,
)
from sisrec.services.projection import project_l1_linf

logger = get_logger(__name__)

Sizes = Literal["small", "default"]


@dataclass(frozen=True)
class CheckSizes:
    """Instance sizes for one pass of the suite."""

    grid: tuple[int, ...]
    shifts: int
    ms: tuple[int, ...]
    specs: int
    hilbert: tuple[int, ...]


_SIZES = {
    "small": CheckSizes(grid=(8, 32), shifts=8, ms=(9,), specs=12, hilbert=(64, 256)),
    "default": CheckSizes(
        grid=(8, 32, 128), shifts=32, ms=(9, 18, 36), specs=200, hilbert=(64, 256, 1024)
    ),
}


def _result(name: str, measured: float, bound: float, **details: object) -> CheckResult:
    return CheckResult(
        name=name,
        passed=bool(measured <= bound),
        measured=float(measured),
        bound=float(bound),
        slack=float(bound - measured),
        details=dict(details),
    )


def check_parseval(rng: np.random.Generator, grid: Sequence[int]) -> CheckResult:
    """The unitary DFT preserves the 2-norm."""
    worst = 0.0
    for n in grid:
        u = TwoSidedSequence.from_window(complex_normal(rng, 2 * n + 1), n)
        norm = float(np.linalg.norm(u.values))
        worst = max(worst, abs(dft(u, n).norm(2) - norm) / norm)
    return _result("parseval", worst, 1e-10)


def check_dirichlet_orthogonality(grid: Sequence[int]) -> CheckResult:
    """sum_k chi_k^t vanishes on T_n for t = 1..2n."""
    violations = 0
    max_dev = 0.0
    for n in grid:
        nodes = grid_nodes(n)
        t = np.arange(1, 2 * n + 1)
        sums = np.abs((nodes[None, :] ** t[:, None]).sum(axis=1)) / (2 * n + 1)
        max_dev = max(max_dev, float(sums.max()))
        violations += int(np.sum(sums > 1e-9))
    return _result("dirichlet_orthogonality", violations, 0, max_deviation=max_dev)


def check_kernel_grid_sums(
    rng: np.random.Generator, grid: Sequence[int], shifts: int
) -> CheckResult:
    """Grid averages of |Dir_n|, |Fej_n| and |Fej+_{2n}| against their closed-form bounds."""
    worst = 0.0
    causal_gap = 0.0
    for n in grid:
        for N in grid:
            for a in np.exp(2j * np.pi * rng.random(shifts)):
                dir_sum = kernel_grid_sum(dirichlet(n), N, a)
                fej_sum = kernel_grid_sum(fejer(n), N, a)
                causal_sum = kernel_grid_sum(fejer_causal(n), N, a)
                worst = max(
                    worst,
                    dir_sum / dirichlet_grid_bound(n, N),
                    fej_sum / fejer_grid_bound(n, N),
                )
                causal_gap = max(causal_gap, abs(causal_sum - fej_sum) / fej_sum)
    return _result("kernel_grid_sums", worst, 1.0, causal_fejer_gap=causal_gap)


def check_oversampling(rng: np.random.Generator, grid: Sequence[int]) -> list[CheckResult]:
    """l1, l_inf and sparse l_inf oversampling ratios for N >= n."""
    l1_worst = linf_worst = sparse_worst = 0.0
    for n in grid:
        for N in (N for N in grid if N >= n):
            scale = (2 * N + 1) / math.sqrt((2 * N + 1) * (2 * n + 1))
            coarse = grid_nodes(n)
            l1 = max(kernel_grid_sum(dirichlet(n), N, a) for a in coarse) * scale
            l1_worst = max(l1_worst, l1 / oversampling_l1_bound(n, N))

            linf = max(oversampling_linf_ratio(n, N, k) for k in range(2 * N + 1))
            linf_worst = max(linf_worst, linf / oversampling_linf_bound(n, N))

            size = int(rng.integers(1, 2 * n + 2))
            J = rng.choice(2 * n + 1, size, replace=False)
            sparse = max(sparse_oversampling_ratio(n, N, J, k) for k in range(2 * N + 1))
            sparse_worst = max(sparse_worst, sparse / sparse_oversampling_bound(n, N, size))
    return [
        _result("oversampling_l1", l1_worst, 1.0),
        _result("oversampling_linf", linf_worst, 1.0),
        _result("oversampling_linf_sparse", sparse_worst, 1.0),
    ]


def check_hybrid_filters(
    rng: np.random.Generator, ms: Sequence[int], specs: int
) -> list[CheckResult]:
    """
    Norm certificates, reproduction and interpolant sup-norm of random hybrid filters.

    Every drawn subspace is quasi-stable, so each instance also builds the
    one-sided hybrid and scores its l_inf certificate.
    """
    modes = ["unit-circle", "disk", "clustered"]
    cert_worst = repro_worst = sup_worst = causal_worst = 0.0
    checked = skipped = 0
    for i in range(specs):
        s = int(rng.integers(1, 7))
        m = ms[i % len(ms)]
        spec = generate_random_sis(s, modes[i % len(modes)], int(rng.integers(2**31)))
        try:
            result = build_hybrid_filter(spec, m)
        except ConditioningError:
            skipped += 1
            continue
        cert = result.certificate
        budget = cert.budget
        cert_worst = max(
            cert_worst, cert.linf / budget.Rinf, cert.l2 / budget.R2, cert.l1 / budget.R1
        )
        repro_worst = max(repro_worst, verify_reproducing(result.phi, spec, trials=2, seed=i))
        sup_worst = max(sup_worst, result.interpolant_sup)
        try:
            causal = build_hybrid_filter_causal(spec, m)
        except ConditioningError:
            skipped += 1
            continue
        causal_worst = max(causal_worst, causal.certificate.linf / causal.certificate.budget.Rinf)
        sup_worst = max(sup_worst, causal.interpolant_sup)
        checked += 1
    return [
        _result("hybrid_certificates", cert_worst, 1.0, instances=checked, skipped=skipped),
        _result("hybrid_reproducing", repro_worst, 1e-7, instances=checked),
        _result("causal_hybrid_linf", causal_worst, 1.0, instances=checked),
        _result("interpolant_sup", sup_worst, INTERPOLANT_SUP_BOUND, instances=checked),
    ]


def check_convolution_powers(rng: np.random.Generator) -> CheckResult:
    """Certified l1 spectrum bounds of phi^k, 2 <= k <= 4, on projector-row filters."""
    worst = 0.0
    for s, m in ((1, 4), (2, 6), (3, 9)):
        spec = generate_random_sis(s, "unit-circle", int(rng.integers(2**31)))
        phi = projector_row_filter(spec, m)
        for k in range(2, 5):
            measured, bound = convolution_power_bound(phi, k, m)
            worst = max(worst, measured / bound)
    return _result("convolution_powers", worst, 1.0)


def _scaled_energy(spec: SisSpec, m: int) -> float:
    psi = min_norm_causal_filter(spec, m, strict=True)
    return m * float(np.sum(np.abs(psi.values) ** 2))


def check_hilbert_limit(ms: Sequence[int]) -> list[CheckResult]:
    """m ||psi||^2 of the minimal-norm strictly causal filter: 1 for s = 1, -> 4 for s = 2."""
    single = SisSpec.from_roots([1.0])
    double = SisSpec.from_roots([(1.0, 2)])
    s1 = [_scaled_energy(single, m) for m in ms]
    s2 = [_scaled_energy(double, m) for m in ms]
    decreasing = all(a >= b for a, b in zip(s2, s2[1:]))
    return [
        _result("hilbert_limit_s1", max(abs(v - 1.0) for v in s1), 1e-9, values=s1),
        _result(
            "hilbert_limit_s2",
            abs(s2[-1] - 4.0) / 4.0 if decreasing else math.inf,
            0.05,
            values=s2,
            decreasing=decreasing,
        ),
    ]


def check_projection(rng: np.random.Generator, instances: int) -> CheckResult:
    """Projecting onto the l1 and l_inf balls twice changes nothing."""
    worst = 0.0
    for _ in range(instances):
        dim = int(rng.integers(1, 9))
        w = complex_normal(rng, dim) * 3.0
        r1 = float(rng.uniform(0.1, 4.0))
        rinf = float(rng.uniform(0.05, r1))
        once = project_l1_linf(w, r1, rinf)
        twice = project_l1_linf(once, r1, rinf)
        worst = max(worst, float(np.max(np.abs(twice - once))))
    return _result("projection_idempotency", worst, 1e-12)


def check_holder(rng: np.random.Generator, instances: int) -> CheckResult:
    """||a||_p^p <= ||a||_1 ||a||_inf^{p-1}."""
    worst = 0.0
    for _ in range(instances):
        a = complex_normal(rng, int(rng.integers(1, 64)))
        p = float(rng.uniform(1.0, 4.0))
        lhs, rhs = holder_chain(a, p)
        worst = max(worst, lhs / rhs)
    return _result("holder_chain", worst, 1.0 + 1e-12)


def theory_checks(sizes: Sizes = "default", seed: int = 0) -> list[CheckResult]:
    """
    Run every inequality check.

    Args:
        sizes: "small" for a quick pass, "default" for the full instance sets
        seed: Seed for the random instances

    Returns:
        One CheckResult per check, in a fixed order
    """
    cfg = _SIZES[sizes]
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    logger.log_operation_start("theory_checks", sizes=sizes)

    steps: list[Callable[[], CheckResult | list[CheckResult]]] = [
        lambda: check_parseval(rng, cfg.grid),
        lambda: check_dirichlet_orthogonality(cfg.grid),
        lambda: check_kernel_grid_sums(rng, cfg.grid, cfg.shifts),
        lambda: check_oversampling(rng, cfg.grid),
        lambda: check_hybrid_filters(rng, cfg.ms, cfg.specs),
        lambda: check_convolution_powers(rng),
        lambda: check_hilbert_limit(cfg.hilbert),
        lambda: check_projection(rng, 1000),
        lambda: check_holder(rng, 200),
    ]
    results: list[CheckResult] = []
    for step in steps:
        outcome = step()
        results.extend(outcome if isinstance(outcome, list) else [outcome])

    for r in results:
        logger.log_certificate(r.name, r.measured, r.bound)
    logger.log_operation_complete(
        "theory_checks",
        duration=time.perf_counter() - start,
        passed=sum(r.passed for r in results),
        total=len(results),
    )
    return results
