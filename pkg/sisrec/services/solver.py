"""
Constrained least-squares filter fit.

The fit minimizes ||phi * y - y||^2 over a scored window subject to caps on
the l1 and l_inf norms of the filter spectrum. The optimization variable is
the spectrum itself, so the constraint set is a product of phase-free
magnitude constraints with an exact projection, and the DFT being unitary
the gradient and Lipschitz constant carry over unchanged.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.linalg
import scipy.signal
from numpy.typing import NDArray
from pydantic import BaseModel, Field

from sisrec.config.settings import Settings, get_settings
from sisrec.core.signal import ComplexArray, ObservationWindow, TwoSidedSequence
from sisrec.core.spectral import SpectrumVec
from sisrec.exceptions import ValidationError, WindowError
from sisrec.observability.logging import get_logger
from sisrec.services.filter_oracle import FilterBudget
from sisrec.services.projection import project_l1_linf

logger = get_logger(__name__)

# dense least-squares warm start is skipped above this filter length
_WARM_START_MAX_LENGTH = 2049
_LIPSCHITZ_SAFETY = 1.05


class SolverConfig(BaseModel):
    """Accelerated projected-gradient settings."""

    max_iter: int = Field(default=2000, ge=1, description="Iteration cap")
    tol: float = Field(default=1e-8, gt=0.0, description="Relative objective decrease to stop")
    restart: bool = Field(default=True, description="Adaptive restart on objective increase")
    lipschitz_iters: int = Field(default=30, ge=1, description="Power iterations for L")
    warm_start: bool = Field(
        default=True, description="Try the projected least-norm solution as a starting point"
    )
    patience: int = Field(
        default=5, ge=1, description="Consecutive small decreases required to stop"
    )

    @classmethod
    def from_settings(cls, settings: Settings | None = None, **overrides: object) -> "SolverConfig":
        """Build a config from ``Settings`` defaults, with keyword overrides."""
        settings = settings or get_settings()
        values: dict[str, object] = {
            "max_iter": settings.max_iter,
            "tol": settings.solver_tol,
            "restart": settings.restart,
            "lipschitz_iters": settings.lipschitz_iters,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(values)


@dataclass(frozen=True)
class FitProblem:
    """
    Filter fit on one scored window.

    The filter has 2n+1 taps starting at ``filter_lo`` (-n for two-sided
    fits, 0 for causal fits, the lead h for predictors). The residual is
    scored on [shift - n, shift + n], i.e. ||Delta^{-shift}[phi * y - y]||_{n,2}.
    """

    y: ObservationWindow
    n: int
    budget: FilterBudget
    shift: int = 0
    causal: bool = False
    lead: int = 0

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValidationError(f"Filter half-width must be nonnegative, got {self.n}")
        if self.budget.n != self.n:
            raise ValidationError("Budget half-width must match the filter half-width")
        if self.lead < 0:
            raise ValidationError(f"Prediction lead must be nonnegative, got {self.lead}")
        if self.lead and not self.causal:
            raise ValidationError("A prediction lead requires a causal fit")
        lo, hi = self.data_range
        N = self.y.N
        if lo < -N or hi > N or self.shift - self.n < -N or self.shift + self.n > N:
            raise WindowError(
                "Fit window draws on observations outside the observed window",
                (lo, hi),
                (-N, N),
            )

    @property
    def filter_lo(self) -> int:
        return self.lead if self.causal else -self.n

    @property
    def filter_range(self) -> tuple[int, int]:
        return self.filter_lo, self.filter_lo + 2 * self.n

    @property
    def scored_range(self) -> tuple[int, int]:
        return self.shift - self.n, self.shift + self.n

    @property
    def data_range(self) -> tuple[int, int]:
        """Observation indices the convolution on the scored window draws on."""
        lo, hi = self.filter_range
        return self.shift - self.n - hi, self.shift + self.n - lo


@dataclass
class FitResult:
    """Outcome of ``fit_filter``."""

    phi: TwoSidedSequence
    spectrum: SpectrumVec
    objective: float
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = True
    lipschitz: float = 0.0
    start: str = "zero"


class _ConvolutionOperator:
    """phi -> (phi * y) on the scored window, and its adjoint, both FFT-applied."""

    def __init__(self, problem: FitProblem):
        lo, hi = problem.data_range
        self.segment = problem.y.y.restrict(lo, hi).values
        self.reversed_conj = np.conj(self.segment[::-1])
        slo, shi = problem.scored_range
        self.target = problem.y.y.restrict(slo, shi).values
        self.size = 2 * problem.n + 1

    def forward(self, v: ComplexArray) -> ComplexArray:
        return np.asarray(scipy.signal.fftconvolve(v, self.segment, mode="valid"))

    def adjoint(self, r: ComplexArray) -> ComplexArray:
        return np.asarray(scipy.signal.fftconvolve(self.reversed_conj, r, mode="valid"))

    def residual(self, v: ComplexArray) -> ComplexArray:
        return self.forward(v) - self.target

    def dense(self) -> ComplexArray:
        """Explicit matrix A with A[i, j] = segment[i + 2n - j]."""
        n2 = self.size - 1
        return np.asarray(
            scipy.linalg.toeplitz(self.segment[n2:], self.segment[n2::-1]), dtype=np.complex128
        )


def _to_spectrum(v: ComplexArray) -> ComplexArray:
    return np.asarray(scipy.fft.fft(scipy.fft.ifftshift(v), norm="ortho"))


def _to_taps(w: ComplexArray) -> ComplexArray:
    return np.asarray(scipy.fft.fftshift(scipy.fft.ifft(w, norm="ortho")))


def _taps_of(phi: TwoSidedSequence, problem: FitProblem) -> ComplexArray:
    lo, hi = problem.filter_range
    trimmed = phi.trim()
    if np.any(trimmed.values != 0) and (trimmed.lo < lo or trimmed.hi > hi):
        raise WindowError(
            "Filter support violates the problem's support class", (lo, hi), trimmed.support
        )
    return phi.restrict(lo, hi).values


def residual_objective(phi: TwoSidedSequence, problem: FitProblem) -> float:
    """
    Squared residual ||Delta^{-shift}[phi * y - y]||^2 over the scored window.

    Raises:
        WindowError: If phi has taps outside the problem's filter support
    """
    op = _ConvolutionOperator(problem)
    r = op.residual(_taps_of(phi, problem))
    return float(np.vdot(r, r).real)


def estimate_lipschitz(problem: FitProblem, iters: int, seed: int = 0) -> float:
    """2 * ||A||^2 for the convolution operator A, by power iteration on A^H A."""
    op = _ConvolutionOperator(problem)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.size) + 1j * rng.standard_normal(op.size)
    x /= np.linalg.norm(x)
    eig = 0.0
    for _ in range(iters):
        y = op.adjoint(op.forward(x))
        eig = float(np.linalg.norm(y))
        if eig == 0.0:
            return 0.0
        x = y / eig
    return 2.0 * eig


def _project(w: ComplexArray, budget: FilterBudget) -> NDArray[np.complex128]:
    return project_l1_linf(w, budget.l1_cap, budget.linf_cap)


def _zero_result(problem: FitProblem, objective: float) -> FitResult:
    lo, _ = problem.filter_range
    n = problem.n
    return FitResult(
        phi=TwoSidedSequence(lo, np.zeros(2 * n + 1)),
        spectrum=SpectrumVec(n, np.zeros(2 * n + 1)),
        objective=objective,
        trace=[objective],
        iterations=0,
        converged=True,
        start="zero",
    )


def fit_filter(
    problem: FitProblem,
    config: SolverConfig | None = None,
    reference: TwoSidedSequence | None = None,
) -> FitResult:
    """
    Approximately minimize the residual objective over the budget's feasible set.

    Accelerated projected gradient in the spectral domain with step 1/(1.05 L)
    and adaptive restart. The start point is the best of the zero filter, the
    projected least-norm solution (small problems) and the projected
    reference filter when one is supplied, and the best feasible iterate is
    returned, so the result never does worse than any of them.

    Args:
        problem: The fit to solve
        config: Solver settings (``SolverConfig.from_settings()`` by default)
        reference: Optional comparator filter, e.g. an oracle hybrid filter

    Returns:
        FitResult; ``converged`` is False when max_iter was exhausted
    """
    config = config or SolverConfig.from_settings()
    op = _ConvolutionOperator(problem)
    budget = problem.budget
    started = time.perf_counter()

    def objective(w: ComplexArray) -> float:
        r = op.residual(_to_taps(w))
        return float(np.vdot(r, r).real)

    def gradient(w: ComplexArray) -> ComplexArray:
        return 2.0 * _to_spectrum(op.adjoint(op.residual(_to_taps(w))))

    zero_objective = float(np.vdot(op.target, op.target).real)
    if budget.is_degenerate() or zero_objective == 0.0:
        return _zero_result(problem, zero_objective)

    logger.log_operation_start(
        "fit_filter", n=problem.n, shift=problem.shift, causal=problem.causal, lead=problem.lead
    )

    # Candidate starting points
    candidates: list[tuple[str, ComplexArray]] = [
        ("zero", np.zeros(op.size, dtype=np.complex128))
    ]
    if config.warm_start and op.size <= _WARM_START_MAX_LENGTH:
        taps, *_ = scipy.linalg.lstsq(op.dense(), op.target)
        candidates.append(("least_norm", _project(_to_spectrum(taps), budget)))
    if reference is not None:
        reference_spectrum = _to_spectrum(_taps_of(reference, problem))
        candidates.append(("reference", _project(reference_spectrum, budget)))
    scored = [(objective(w), name, w) for name, w in candidates]
    best_f, start_name, x = min(scored, key=lambda item: item[0])
    best_x = x

    lipschitz = estimate_lipschitz(problem, config.lipschitz_iters)
    if lipschitz == 0.0:
        return _zero_result(problem, zero_objective)
    logger.debug("Lipschitz estimate", lipschitz=lipschitz, n=problem.n)
    step = 1.0 / (_LIPSCHITZ_SAFETY * lipschitz)

    f_x = best_f
    z = x.copy()
    t = 1.0
    trace = [best_f]
    converged = False
    small_steps = 0
    iterations = 0
    restarted = False
    floor = 1e-24 * zero_objective

    for iterations in range(1, config.max_iter + 1):
        x_new = _project(z - step * gradient(z), budget)
        f_new = objective(x_new)

        if config.restart and f_new > f_x:
            if restarted:
                # a plain step from x went uphill: the Lipschitz estimate was low
                step *= 0.5
            if f_new - f_x <= config.tol * max(f_x, floor):
                small_steps += 1
            # momentum reset; the next step is a plain projected gradient step from x
            z = x.copy()
            t = 1.0
            restarted = True
            trace.append(best_f)
            if small_steps >= config.patience:
                converged = True
                break
            continue
        restarted = False

        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = x_new + ((t - 1.0) / t_new) * (x_new - x)
        decrease = f_x - f_new
        x, f_x, t = x_new, f_new, t_new

        if f_x < best_f:
            best_f, best_x = f_x, x
        trace.append(best_f)

        if best_f <= floor:
            converged = True
            break
        if abs(decrease) <= config.tol * max(f_x, floor):
            small_steps += 1
            if small_steps >= config.patience:
                converged = True
                break
        else:
            small_steps = 0

    spectrum = SpectrumVec(problem.n, best_x)
    phi = TwoSidedSequence(problem.filter_lo, _to_taps(best_x))
    logger.log_operation_complete(
        "fit_filter",
        duration=time.perf_counter() - started,
        iterations=iterations,
        objective=best_f,
        converged=converged,
        start=start_name,
    )
    if not converged:
        logger.warning("Solver stopped at max_iter", max_iter=config.max_iter, objective=best_f)
    return FitResult(
        phi=phi,
        spectrum=spectrum,
        objective=best_f,
        trace=trace,
        iterations=iterations,
        converged=converged,
        lipschitz=lipschitz,
        start=start_name,
    )


def apply_filter(phi: TwoSidedSequence, problem: FitProblem) -> TwoSidedSequence:
    """(phi * y) on the scored window of the problem."""
    op = _ConvolutionOperator(problem)
    lo, _ = problem.scored_range
    return TwoSidedSequence(lo, op.forward(_taps_of(phi, problem)))
