"""
Reproducing filters for shift-invariant subspaces.

A filter phi reproduces the subspace X when phi * x = x for every x in X.
This module builds the projector-row filter, its convolution powers, the
hybrid filter phi^X = phi^2 + rho (phi^2 - phi^4) whose spectrum equals 1
on the approximate support of phi, the minimal-norm one-sided filter and
its causal hybrid, together with the norm certificates they satisfy.
"""

import math
import time
from dataclasses import dataclass
from typing import Literal

import numpy as np
import scipy.linalg

from sisrec.config.settings import get_settings
from sisrec.core.signal import (
    ComplexArray,
    SisSpec,
    TwoSidedSequence,
    basis_matrix,
    random_member,
)
from sisrec.core.spectral import (
    KernelSeq,
    convolve,
    dft,
    dft_onesided,
    eval_grid,
    evaluate,
    fejer,
    fejer_causal,
    fine_grid_sup,
    grid_nodes,
)
from sisrec.exceptions import (
    CertificateError,
    ConditioningError,
    ValidationError,
    WindowError,
)
from sisrec.observability.logging import get_logger

logger = get_logger(__name__)

C_STAR = 2.16 * math.pi**2 + 6.0
INTERPOLANT_SUP_BOUND = 1.08 * math.pi**2 + 2.0
GRAM_COND_LIMIT = 1e4

InterpolantWeights = Literal["gram", "explicit"]


@dataclass(frozen=True)
class FilterBudget:
    """Caps on ||F_n phi||_p * sqrt(2n+1) for p = 1, 2, inf."""

    n: int
    R1: float
    R2: float
    Rinf: float
    c_star: float = C_STAR

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValidationError(f"Filter half-width must be nonnegative, got {self.n}")
        if not (self.R1 >= self.R2 >= self.Rinf >= 0):
            raise ValidationError(
                "Budget caps must satisfy R1 >= R2 >= Rinf >= 0",
                {"R1": self.R1, "R2": self.R2, "Rinf": self.Rinf},
            )

    @classmethod
    def two_sided(cls, n: int, s: int) -> "FilterBudget":
        """Budget (18 c s, 3 c sqrt(2s), c) met by the two-sided hybrid filter."""
        return cls(n, 18 * C_STAR * s, 3 * C_STAR * math.sqrt(2 * s), C_STAR)

    @classmethod
    def causal(cls, n: int, s: int, c1: float) -> "FilterBudget":
        """Budget (c1 c s^2 log(en), c sqrt(c1 s^2 log(en)), c) for one-sided filters."""
        q = c1 * s**2 * math.log(math.e * max(n, 1))
        r1 = C_STAR * q
        rinf = min(C_STAR, r1)
        r2 = min(max(C_STAR * math.sqrt(q), rinf), r1)
        return cls(n, r1, r2, rinf)

    @classmethod
    def l1_only(cls, n: int, s: int) -> "FilterBudget":
        """Budget carrying only the l1 cap 18 c s."""
        r1 = 18 * C_STAR * s
        return cls(n, r1, r1, r1)

    @property
    def scale(self) -> float:
        return 1.0 / math.sqrt(2 * self.n + 1)

    @property
    def l1_cap(self) -> float:
        """Cap on the unscaled spectrum l1 norm."""
        return self.R1 * self.scale

    @property
    def linf_cap(self) -> float:
        """Cap on the unscaled spectrum l_inf norm."""
        return self.Rinf * self.scale

    def is_degenerate(self) -> bool:
        """Caps below machine precision leave only the zero filter."""
        eps = float(np.finfo(np.float64).eps)
        return self.l1_cap < eps or self.linf_cap < eps


@dataclass(frozen=True)
class SupportSet:
    """Grid indices k of T_n where |phi(chi_{k,n})| >= 1."""

    n: int
    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def nodes(self) -> ComplexArray:
        return grid_nodes(self.n)[list(self.indices)]


@dataclass(frozen=True)
class FilterCertificate:
    """Measured spectrum norms of a filter, each times sqrt(2n+1), against a budget."""

    n: int
    l1: float
    l2: float
    linf: float
    budget: FilterBudget

    @property
    def l1_ok(self) -> bool:
        return self.l1 <= self.budget.R1 * (1 + 1e-9)

    @property
    def l2_ok(self) -> bool:
        return self.l2 <= self.budget.R2 * (1 + 1e-9)

    @property
    def linf_ok(self) -> bool:
        return self.linf <= self.budget.Rinf * (1 + 1e-9)

    @property
    def passed(self) -> bool:
        return self.l1_ok and self.l2_ok and self.linf_ok

    def as_dict(self) -> dict[str, float | bool]:
        return {
            "n": self.n,
            "l1": self.l1,
            "l2": self.l2,
            "linf": self.linf,
            "R1": self.budget.R1,
            "R2": self.budget.R2,
            "Rinf": self.budget.Rinf,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class HybridFilterResult:
    """A hybrid filter together with the pieces it was assembled from."""

    phi: TwoSidedSequence
    base: TwoSidedSequence
    support: SupportSet
    interpolant: TwoSidedSequence
    interpolation_error: float
    interpolant_sup: float
    interpolant_weights: InterpolantWeights
    certificate: FilterCertificate
    m: int
    causal: bool


def certify(phi: TwoSidedSequence, budget: FilterBudget, causal: bool = False) -> FilterCertificate:
    """
    Measure ||F_n phi||_p * sqrt(2n+1) for p = 1, 2, inf.

    The causal variant uses the one-sided transform F+_{2n} and expects phi
    in C+_{2n}.

    Raises:
        WindowError: If phi lies outside the transform's support class
    """
    n = budget.n
    if causal:
        if not phi.within_causal(2 * n):
            raise WindowError("Causal filter must lie in C+_{2n}", (0, 2 * n), phi.support)
        spectrum = dft_onesided(phi, n)
    else:
        if not phi.within(n):
            raise WindowError("Filter must lie in C_n", (-n, n), phi.support)
        spectrum = dft(phi, n)
    root = math.sqrt(2 * n + 1)
    return FilterCertificate(
        n=n,
        l1=spectrum.norm(1) * root,
        l2=spectrum.norm(2) * root,
        linf=spectrum.norm(np.inf) * root,
        budget=budget,
    )


def _anchored_basis(spec: SisSpec, m: int) -> ComplexArray:
    """Slice of the subspace basis on {0..m}, anchored and column-normalized."""
    origins = [0 if abs(w) <= 1.0 else m for w, _ in spec.roots]
    basis = basis_matrix(spec, np.arange(m + 1), origins, scale=float(max(m, 1)))
    norms = np.linalg.norm(basis, axis=0)
    norms[norms == 0] = 1.0
    return basis / norms


def _offending_roots(spec: SisSpec, vh: ComplexArray, rank: int) -> list[complex]:
    """Roots whose basis columns carry the numerically null directions."""
    labels = spec.basis_labels()
    null = np.abs(vh[rank:, :]).max(axis=0)
    flagged = {labels[j][0] for j in np.flatnonzero(null > 0.1 * null.max())}
    return [w for w in spec.root_values if w in flagged] or spec.root_values


def projector_row_filter(spec: SisSpec, m: int, rank_tol: float | None = None) -> TwoSidedSequence:
    """
    Minimal-norm row of the orthogonal projector onto the subspace slice on {0..m}.

    The returned filter lies in C_m, reproduces the subspace and has
    ||phi||_2^2 <= 2s/(2m+1).

    Args:
        spec: Subspace description
        m: Filter half-width, at least s - 1
        rank_tol: Relative singular value tolerance (``Settings.rank_tol`` by default)

    Returns:
        The projector-row filter

    Raises:
        ValidationError: If m < s - 1
        ConditioningError: If the slice basis is numerically rank deficient
    """
    if m < max(spec.s - 1, 0):
        raise ValidationError(f"Half-width m={m} must be at least s-1={spec.s - 1}")
    tol = rank_tol if rank_tol is not None else get_settings().rank_tol

    basis = _anchored_basis(spec, m)
    u, sv, vh = scipy.linalg.svd(basis, full_matrices=False)
    rank = int(np.sum(sv > tol * sv[0]))
    if rank < spec.s:
        roots = _offending_roots(spec, vh, rank)
        logger.warning("Slice basis is rank deficient", m=m, rank=rank, s=spec.s)
        raise ConditioningError(roots, rank, spec.s)

    q = u[:, : spec.s]
    row_norms = np.sum(np.abs(q) ** 2, axis=1)
    # smallest index among rows within 1e-12 of the minimum
    t0 = int(np.flatnonzero(row_norms <= row_norms.min() + 1e-12)[0])
    projector_row = q[t0, :] @ q.conj().T

    # x_{t0} = sum_tau P[t0, tau] x_tau, so phi_{t0 - tau} = P[t0, tau]
    return TwoSidedSequence(t0 - m, projector_row[::-1])


def autoconvolve_power(phi: TwoSidedSequence, k: int) -> TwoSidedSequence:
    """k-fold convolution power phi * ... * phi."""
    if k < 1:
        raise ValidationError(f"Convolution power must be >= 1, got {k}")
    result = phi
    for _ in range(k - 1):
        result = convolve(result, phi)
    return result


def convolution_power_constant(k: int) -> float:
    """c_1 = 1, c_{2j} = 2 c_j^2, c_{2j+1} = 3 sqrt(2j+1) c_j^2."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k == 1:
        return 1.0
    half = k // 2
    c = convolution_power_constant(half)
    if k % 2 == 0:
        return 2.0 * c**2
    return 3.0 * math.sqrt(k) * c**2


def convolution_power_bound(phi: TwoSidedSequence, k: int, m: int) -> tuple[float, float]:
    """
    Measured and certified l1 spectrum norm of phi^k for phi in C_m, k >= 2.

    Returns:
        (||F_{km}[phi^k]||_1 sqrt(2km+1), c_k (sqrt(2m+1) ||phi||_2)^k)

    Raises:
        ValidationError: If k < 2
        WindowError: If phi is not in C_m
    """
    if k < 2:
        raise ValidationError(f"The certified bound needs k >= 2, got {k}")
    if not phi.within(m):
        raise WindowError("Filter must lie in C_m", (-m, m), phi.support)
    power = autoconvolve_power(phi, k)
    n = k * m
    measured = dft(power, n).norm(1) * math.sqrt(2 * n + 1)
    radius = math.sqrt(2 * m + 1) * float(np.linalg.norm(phi.values))
    return measured, convolution_power_constant(k) * radius**k


def holder_chain(values: ComplexArray, p: float) -> tuple[float, float]:
    """(||a||_p^p, ||a||_1 ||a||_inf^{p-1}); the first never exceeds the second."""
    mags = np.abs(values)
    lhs = float(np.sum(mags**p))
    rhs = float(np.sum(mags) * (mags.max() if mags.size else 0.0) ** (p - 1))
    return lhs, rhs


def approx_support(phi: TwoSidedSequence, n: int) -> SupportSet:
    """Grid indices of T_n where |phi| >= 1 (boundary values included)."""
    values = eval_grid(phi, n)
    return SupportSet(n, tuple(int(k) for k in np.flatnonzero(np.abs(values) >= 1.0)))


@dataclass(frozen=True)
class Interpolant:
    """Shifted-kernel interpolant with its residual on the support and sup-norm on the circle."""

    rho: TwoSidedSequence
    residual: float
    sup: float
    weights: InterpolantWeights


def _shifted_kernels(
    normalized: KernelSeq, nodes: ComplexArray, weights: ComplexArray
) -> TwoSidedSequence:
    taus = np.arange(normalized.lo, normalized.hi + 1)
    # K(z/w) has coefficients K_tau w^tau
    shifts = np.exp(1j * np.outer(taus, np.angle(nodes)))
    return TwoSidedSequence(normalized.lo, normalized.values * (shifts @ weights))


def _interpolant_candidates(
    phi: TwoSidedSequence, support: SupportSet, kernel: KernelSeq, n: int
) -> list[Interpolant]:
    """
    Shifted-kernel combinations rho(z) = sum_w a_w K(z/w) approximating phi^{-2} on the support.

    K is the kernel normalized to K(1) = 1. The explicit weights
    a_w = phi(w)^{-2} keep sup |rho| below INTERPOLANT_SUP_BOUND. Neighbouring
    shifted kernels overlap on the grid, so these weights interpolate only up
    to the overlap; the Gram system K(w_i/w_j) a_j = phi(w_i)^{-2} interpolates
    exactly. The Gram solution is listed first whenever it is well conditioned
    and stays within the same sup bound; the explicit weights always follow.
    """
    if len(support) == 0:
        return [Interpolant(TwoSidedSequence.zeros(kernel.lo, kernel.hi), 0.0, 0.0, "explicit")]

    nodes = support.nodes
    phi_sq = evaluate(phi, nodes) ** 2
    targets = 1.0 / phi_sq
    normalized = kernel.scaled(1.0 / float(np.sum(kernel.values).real))

    def _finish(weights: ComplexArray, kind: InterpolantWeights) -> Interpolant:
        rho = _shifted_kernels(normalized, nodes, weights)
        residual = float(np.max(np.abs(evaluate(rho, nodes) * phi_sq - 1.0)))
        return Interpolant(rho, residual, fine_grid_sup(rho, factor=16, n=n), kind)

    candidates: list[Interpolant] = []
    gram = evaluate(normalized, nodes[:, None] / nodes[None, :])
    cond = float(np.linalg.cond(gram))
    if cond <= GRAM_COND_LIMIT:
        weights, *_ = scipy.linalg.lstsq(gram, targets)
        solved = _finish(weights, "gram")
        if solved.sup <= INTERPOLANT_SUP_BOUND:
            candidates.append(solved)
        else:
            logger.debug("Gram interpolant exceeds sup bound", sup=solved.sup, cond=cond)
    candidates.append(_finish(targets, "explicit"))
    return candidates


def fejer_interpolant(phi: TwoSidedSequence, m: int, n: int | None = None) -> TwoSidedSequence:
    """
    Fejer-kernel interpolant of phi^{-2} on the approximate support S_n(phi).

    Args:
        phi: Filter in C_m
        m: Half-width of phi
        n: Grid half-width, 9m by default

    Returns:
        rho in C_{5m} with sup |rho| <= INTERPOLANT_SUP_BOUND; rho phi^2 = 1 on
        S_n(phi) whenever the support nodes are far enough apart for an exact
        solve (zero when S_n(phi) is empty)
    """
    if not phi.within(m):
        raise WindowError("Filter must lie in C_m", (-m, m), phi.support)
    grid = 9 * m if n is None else n
    result = _interpolant_candidates(phi, approx_support(phi, grid), fejer(5 * m), grid)[0]
    logger.debug(
        "Fejer interpolant", m=m, weights=result.weights, residual=result.residual, sup=result.sup
    )
    return result.rho


def _require(certificate: FilterCertificate, names: tuple[str, ...]) -> None:
    budget = certificate.budget
    caps = {"l1": budget.R1, "l2": budget.R2, "linf": budget.Rinf}
    for name in names:
        if not getattr(certificate, f"{name}_ok"):
            raise CertificateError(name, getattr(certificate, name), caps[name])


def _assemble(base: TwoSidedSequence, rho: TwoSidedSequence) -> TwoSidedSequence:
    """phi^2 + rho * (phi^2 - phi^4) in coefficient space."""
    phi2 = convolve(base, base)
    phi4 = convolve(phi2, phi2)
    return phi2 + convolve(rho, phi2 - phi4)


def _assemble_certified(
    base: TwoSidedSequence, candidates: list[Interpolant], budget: FilterBudget, causal: bool
) -> tuple[TwoSidedSequence, Interpolant, FilterCertificate]:
    """Hybrid from the first candidate meeting the l_inf cap, else from the smallest l_inf."""
    lo, hi = (0, 2 * budget.n) if causal else (-budget.n, budget.n)
    best: tuple[TwoSidedSequence, Interpolant, FilterCertificate] | None = None
    for interp in candidates:
        phi = _assemble(base, interp.rho).restrict(lo, hi)
        certificate = certify(phi, budget, causal=causal)
        if certificate.linf_ok:
            return phi, interp, certificate
        if best is None or certificate.linf < best[2].linf:
            best = (phi, interp, certificate)
    assert best is not None
    return best


def build_hybrid_filter(spec: SisSpec, m: int) -> HybridFilterResult:
    """
    Two-sided hybrid filter in C_{9m} with its construction diagnostics.

    A certificate failure is logged and reported in the result; use
    hybrid_filter to have it raised instead.

    Raises:
        ValidationError: If m < s - 1
        ConditioningError: Propagated from the projector-row filter
    """
    start = time.perf_counter()
    logger.log_operation_start("hybrid_filter", s=spec.s, m=m)
    n = 9 * m

    base = projector_row_filter(spec, m)
    support = approx_support(base, n)
    candidates = _interpolant_candidates(base, support, fejer(5 * m), n)
    budget = FilterBudget.two_sided(n, spec.s)
    phi, interp, certificate = _assemble_certified(base, candidates, budget, causal=False)

    logger.log_certificate("hybrid_linf", certificate.linf, budget.Rinf, m=m)
    logger.log_certificate("hybrid_l2", certificate.l2, budget.R2, m=m)
    logger.log_certificate("hybrid_l1", certificate.l1, budget.R1, m=m)
    logger.log_certificate("interpolant_sup", interp.sup, INTERPOLANT_SUP_BOUND, m=m)
    logger.log_operation_complete(
        "hybrid_filter",
        duration=time.perf_counter() - start,
        support_size=len(support),
        interpolation_error=interp.residual,
        weights=interp.weights,
    )
    return HybridFilterResult(
        phi=phi,
        base=base,
        support=support,
        interpolant=interp.rho,
        interpolation_error=interp.residual,
        interpolant_sup=interp.sup,
        interpolant_weights=interp.weights,
        certificate=certificate,
        m=m,
        causal=False,
    )


def hybrid_filter(spec: SisSpec, m: int) -> TwoSidedSequence:
    """
    Two-sided hybrid filter phi^X in C_{9m}.

    Raises:
        CertificateError: If any of the three norm certificates fails
    """
    result = build_hybrid_filter(spec, m)
    _require(result.certificate, ("linf", "l2", "l1"))
    return result.phi


def min_norm_causal_filter(
    spec: SisSpec, m: int, strict: bool = False, rank_tol: float | None = None
) -> TwoSidedSequence:
    """
    Minimal 2-norm one-sided filter reproducing a quasi-stable subspace.

    The filter has taps on {0..m} ({1..m} when strict) and is the least-norm
    solution of sum_tau psi_tau b(t0 - tau) = b(t0) over a basis b of the
    subspace, with t0 = m.

    Raises:
        ValidationError: If m < s or a root lies outside the closed unit disk
        ConditioningError: If the constraint rows are numerically dependent
    """
    if m < spec.s:
        raise ValidationError(f"Causal filter length m={m} must be at least s={spec.s}")
    if not spec.is_quasi_stable():
        raise ValidationError(
            "One-sided reproducing filters need all roots in the closed unit disk",
            {"roots": [[w.real, w.imag] for w in spec.root_values]},
        )
    tol = rank_tol if rank_tol is not None else get_settings().rank_tol

    basis = basis_matrix(spec, np.arange(m + 1), 0, scale=float(m))
    taps = np.arange(1 if strict else 0, m + 1)
    system = basis[m - taps, :].T
    rhs = basis[m, :].copy()

    # equilibrate rows; both sides scale together
    scales = np.maximum(np.abs(system).max(axis=1), np.abs(rhs))
    scales[scales == 0] = 1.0
    system = system / scales[:, None]
    rhs = rhs / scales

    sv = scipy.linalg.svdvals(system)
    rank = int(np.sum(sv > tol * sv[0]))
    if rank < spec.s:
        raise ConditioningError(spec.root_values, rank, spec.s)

    psi, *_ = scipy.linalg.lstsq(system, rhs, cond=tol)
    return TwoSidedSequence(int(taps[0]), psi)


def build_hybrid_filter_causal(
    spec: SisSpec, m: int, c1: float | None = None
) -> HybridFilterResult:
    """
    One-sided hybrid filter in C+_{18m} with its construction diagnostics.

    The base is the minimal-norm causal filter on {0..2m}; the interpolant
    uses the causal Fejer kernel on [0, 10m]. As for the two-sided builder,
    a failed l_inf certificate is reported rather than raised.
    """
    start = time.perf_counter()
    c1 = get_settings().c1 if c1 is None else c1
    logger.log_operation_start("hybrid_filter_causal", s=spec.s, m=m, c1=c1)
    n = 9 * m

    base = min_norm_causal_filter(spec, 2 * m)
    support = approx_support(base, n)
    candidates = _interpolant_candidates(base, support, fejer_causal(5 * m), n)
    budget = FilterBudget.causal(n, spec.s, c1)
    phi, interp, certificate = _assemble_certified(base, candidates, budget, causal=True)

    logger.log_certificate("causal_linf", certificate.linf, budget.Rinf, m=m)
    logger.info(
        "Causal l1 norm reported against c1-scaled cap",
        l1=certificate.l1,
        cap=budget.R1,
        c1=c1,
    )
    logger.log_operation_complete(
        "hybrid_filter_causal",
        duration=time.perf_counter() - start,
        support_size=len(support),
        interpolation_error=interp.residual,
        weights=interp.weights,
    )
    return HybridFilterResult(
        phi=phi,
        base=base,
        support=support,
        interpolant=interp.rho,
        interpolation_error=interp.residual,
        interpolant_sup=interp.sup,
        interpolant_weights=interp.weights,
        certificate=certificate,
        m=m,
        causal=True,
    )


def hybrid_filter_causal(spec: SisSpec, m: int, c1: float | None = None) -> TwoSidedSequence:
    """
    One-sided hybrid filter phi+^X in C+_{18m}.

    Raises:
        CertificateError: If the l_inf certificate fails
    """
    result = build_hybrid_filter_causal(spec, m, c1)
    _require(result.certificate, ("linf",))
    return result.phi




def verify_reproducing(
    phi: TwoSidedSequence,
    spec: SisSpec,
    trials: int = 8,
    window: int | None = None,
    seed: int = 0,
) -> float:
    """
    Worst componentwise error of phi * x = x over random x in X on [-W, W].

    Each sample is scored as |(phi * x)_t - x_t| / ((|phi| * |x|)_t + |x_t|),
    the backward error of the identity at t. The ratio does not depend on how
    fast x grows or decays across the window, so damped modes are measured as
    reliably as modes on the unit circle. It is 0 for the identity filter and
    1 for the zero filter. Samples whose denominator has underflowed are
    skipped.

    Args:
        phi: Candidate filter
        spec: Subspace description
        trials: Number of random subspace elements
        window: Half-width W of the scored window (defaults to the filter reach)
        seed: Seed for the random elements

    Returns:
        Maximum componentwise error over the trials
    """
    reach = max(abs(phi.lo), abs(phi.hi), 1)
    w = window if window is not None else reach
    floor = float(np.finfo(np.float64).tiny / np.finfo(np.float64).eps)
    magnitude = TwoSidedSequence(phi.lo, np.abs(phi.values))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        x = random_member(spec, -w - phi.hi, w - phi.lo, rng)
        xw = x.window(w)
        err = np.abs(convolve(phi, x, method="direct").window(w) - xw)
        scale = convolve(magnitude, TwoSidedSequence(x.lo, np.abs(x.values)), method="direct")
        denom = scale.window(w).real + np.abs(xw)
        scored = denom > floor
        if np.any(scored):
            worst = max(worst, float(np.max(err[scored] / denom[scored])))
    return worst
