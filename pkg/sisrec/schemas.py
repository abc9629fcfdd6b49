"""Pydantic schemas for JSON payloads, experiment configs and reports"""

from typing import TYPE_CHECKING, Any, Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from sisrec.core.signal import ObservationWindow, SisSpec, TwoSidedSequence
from sisrec.core.spectral import SpectrumVec

if TYPE_CHECKING:
    from sisrec.services.solver import FitResult

RootMode = Literal["unit-circle", "disk", "clustered", "dft-grid"]
EstimatorMode = Literal["core", "full", "causal"]


class SignalPayload(BaseModel):
    """A sequence on [-n, n] (or a spectrum on T_n) as separate real and imaginary parts"""

    n: int = Field(..., ge=0, description="Half-width; arrays hold 2n+1 entries for t = -n..n")
    sigma: float = Field(0.0, ge=0.0, description="Noise level of an observation")
    re: list[float] = Field(..., description="Real parts")
    im: list[float] = Field(..., description="Imaginary parts")
    domain: Literal["time", "spectrum"] = Field("time", description="Time samples or DFT bins")
    clean: "SignalPayload | None" = Field(None, description="Noise-free signal, when known")

    model_config = {
        "json_schema_extra": {
            "examples": [{"n": 1, "sigma": 0.1, "re": [1.0, 0.9, 1.1], "im": [0.0, 0.1, -0.1]}]
        }
    }

    @model_validator(mode="after")
    def validate_lengths(self) -> "SignalPayload":
        """Both arrays must hold exactly 2n+1 values"""
        expected = 2 * self.n + 1
        if len(self.re) != expected or len(self.im) != expected:
            raise ValueError(
                f"re and im must each hold 2n+1 = {expected} values "
                f"(got {len(self.re)} and {len(self.im)})"
            )
        return self

    @classmethod
    def from_sequence(
        cls, x: TwoSidedSequence, n: int, sigma: float = 0.0, clean: TwoSidedSequence | None = None
    ) -> "SignalPayload":
        values = x.window(n)
        return cls(
            n=n,
            sigma=sigma,
            re=values.real.tolist(),
            im=values.imag.tolist(),
            clean=cls.from_sequence(clean, n) if clean is not None else None,
        )

    @classmethod
    def from_spectrum(cls, spectrum: SpectrumVec) -> "SignalPayload":
        return cls(
            n=spectrum.n,
            re=spectrum.values.real.tolist(),
            im=spectrum.values.imag.tolist(),
            domain="spectrum",
        )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.re, dtype=np.float64) + 1j * np.asarray(self.im, dtype=np.float64)

    def to_sequence(self) -> TwoSidedSequence:
        if self.domain != "time":
            raise ValueError("A spectrum payload has no time-domain sequence")
        return TwoSidedSequence(-self.n, self.as_array())

    def to_observation(self) -> ObservationWindow:
        return ObservationWindow(self.to_sequence(), self.n, self.sigma)


SignalPayload.model_rebuild()


class RootPayload(BaseModel):
    """One characteristic root with its multiplicity"""

    re: float
    im: float = 0.0
    mult: int = Field(1, ge=1, description="Multiplicity")


class CoefficientPayload(BaseModel):
    """Basis coefficients of a subspace member, in basis order"""

    re: list[float] = Field(..., min_length=1)
    im: list[float] = Field(..., min_length=1)

    @model_validator(mode="after")
    def validate_lengths(self) -> "CoefficientPayload":
        """Real and imaginary parts must have equal length"""
        if len(self.re) != len(self.im):
            raise ValueError("re and im must be of equal length")
        return self

    def as_array(self) -> np.ndarray:
        return np.asarray(self.re, dtype=np.float64) + 1j * np.asarray(self.im, dtype=np.float64)


class SisSpecPayload(BaseModel):
    """Root multiset of a shift-invariant subspace"""

    roots: list[RootPayload] = Field(..., min_length=1)

    model_config = {
        "json_schema_extra": {
            "examples": [{"roots": [{"re": 1.0, "im": 0.0, "mult": 1}, {"re": 0.0, "im": 1.0}]}]
        }
    }

    @classmethod
    def from_spec(cls, spec: SisSpec) -> "SisSpecPayload":
        return cls.model_validate(spec.to_dict())

    def to_spec(self) -> SisSpec:
        return SisSpec(tuple((complex(r.re, r.im), r.mult) for r in self.roots))


class FilterPayload(BaseModel):
    """Filter coefficients on [lo, lo + len - 1] with their norm certificates"""

    lo: int
    re: list[float]
    im: list[float]
    m: int = Field(..., ge=0)
    causal: bool = False
    certificates: dict[str, float | bool] = Field(default_factory=dict)
    support_size: int = 0
    interpolation_error: float = 0.0
    interpolant_sup: float = 0.0
    interpolant_weights: Literal["gram", "explicit"] = "explicit"

    @model_validator(mode="after")
    def validate_lengths(self) -> "FilterPayload":
        """Real and imaginary parts must have equal, nonzero length"""
        if not self.re or len(self.re) != len(self.im):
            raise ValueError("re and im must be nonempty and of equal length")
        return self

    def to_sequence(self) -> TwoSidedSequence:
        values = np.asarray(self.re) + 1j * np.asarray(self.im)
        return TwoSidedSequence(self.lo, values)


class BenchConfig(BaseModel):
    """Monte Carlo experiment description"""

    trials: int = Field(..., ge=1, description="Trials per (n, s) pair")
    n_list: list[int] = Field(
        ..., min_length=1, description="Window half-widths n (data on [-2n, 2n])"
    )
    s_list: list[int] = Field(..., min_length=1, description="Subspace orders")
    sigma: float = Field(0.1, ge=0.0)
    delta: float = Field(0.1, gt=0.0, lt=1.0)
    root_mode: RootMode = "unit-circle"
    seed: int = Field(0, ge=0)
    estimator_mode: EstimatorMode = "core"
    out_path: str | None = None
    normalize: bool = Field(True, description="Scale each signal to unit windowed norm")
    max_multiplicity: int = Field(1, ge=1, description="Largest root multiplicity drawn")
    task: Literal["risk", "detection"] = "risk"
    alt_scale: float = Field(1.0, ge=0.0, description="Alternative norm in units of r0")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "trials": 200,
                    "n_list": [81],
                    "s_list": [2],
                    "sigma": 0.1,
                    "delta": 0.1,
                    "root_mode": "dft-grid",
                    "seed": 7,
                    "estimator_mode": "core",
                    "out_path": "risk.csv",
                }
            ]
        }
    }

    @field_validator("n_list", "s_list")
    @classmethod
    def validate_positive(cls, v: list[int]) -> list[int]:
        """Sizes must be positive"""
        if any(item < 1 for item in v):
            raise ValueError("Sizes must be positive integers")
        return v

    @model_validator(mode="after")
    def validate_sizes(self) -> "BenchConfig":
        """Every (n, s) pair must satisfy the chosen estimator's window requirement"""
        from sisrec.exceptions import SisrecError
        from sisrec.services.multiscale import build_plan

        full = self.estimator_mode == "full" or self.task == "detection"
        for n in self.n_list:
            for s in self.s_list:
                if self.root_mode == "dft-grid" and s > 2 * n + 1:
                    raise ValueError(f"dft-grid mode needs s <= 2n+1, got n={n}, s={s}")
                if full:
                    try:
                        build_plan(n, s)
                    except SisrecError as e:
                        raise ValueError(f"(n={n}, s={s}): {e}") from e
                elif self.estimator_mode == "core" and 2 * n + 1 < 9 * (s - 1):
                    raise ValueError(f"(n={n}, s={s}): core fit needs 2n+1 >= 9(s-1)")
        return self


class TrialRecord(BaseModel):
    """
    Outcome of one Monte Carlo trial.

    ``mse`` is a per-sample mean over the estimator's output window: 2n+1
    samples for core, 4n+1 for full and the predicted samples for causal.
    Multiply by that count to compare with a bound stated for the squared
    error summed over the window.
    """

    trial: int
    n: int
    s: int
    sigma: float
    mode: str
    mse: float | None = Field(
        None, description="Mean |x_hat - x|^2 per output sample; None when the trial failed"
    )
    converged: bool = False
    error: str | None = None


class RiskSummary(BaseModel):
    """Aggregated risk for one (n, s) pair"""

    n: int
    s: int
    trials: int
    failures: int = 0
    quantile: float | None = Field(
        None, description="Empirical (1 - delta)-quantile of the per-sample MSE"
    )
    median: float | None = None
    mean: float | None = None
    bound: float | None = Field(
        None,
        description=(
            "Theoretical risk bound divided by the scored sample count "
            "(2n+1 for core, 4n+1 for full); None for causal runs"
        ),
    )
    headroom: float | None = Field(None, description="bound / quantile")


class DetectionSummary(BaseModel):
    """Error counts of the detection test for one (n, s) pair"""

    n: int
    s: int
    trials: int
    r0_squared: float
    threshold: float
    type_i: int
    type_ii: int
    failures: int = 0

    @property
    def type_i_rate(self) -> float:
        return self.type_i / self.trials if self.trials else 0.0

    @property
    def type_ii_rate(self) -> float:
        return self.type_ii / self.trials if self.trials else 0.0


class RiskReport(BaseModel):
    """
    Result of a Monte Carlo run.

    Every risk figure in ``records`` and ``summaries`` is per output sample,
    with bounds rescaled the same way, so exported quantiles compare directly
    with the exported bounds.
    """

    config: BenchConfig
    records: list[TrialRecord] = Field(default_factory=list)
    summaries: list[RiskSummary] = Field(default_factory=list)
    detection: list[DetectionSummary] = Field(default_factory=list)
    failures: int = 0
    wall_clock_seconds: float = 0.0


class CheckResult(BaseModel):
    """One numerical inequality check"""

    name: str
    passed: bool
    measured: float
    bound: float
    slack: float = Field(..., description="bound - measured; negative when the check fails")
    details: dict[str, Any] = Field(default_factory=dict)


class DetectionResult(BaseModel):
    """Outcome of the detection test on one observation"""

    statistic: float
    threshold: float
    r0_squared: float
    reject: bool
    objective: float | None = None


class EstimatePayload(BaseModel):
    """Denoised samples on [lo, lo + len - 1] with the fit that produced them"""

    mode: EstimatorMode
    lo: int
    re: list[float]
    im: list[float]
    filter_spectrum: SignalPayload = Field(..., description="DFT of the first fitted filter")
    trace_length: int = Field(..., ge=0, description="Objective values recorded by the solver")
    converged: bool
    objective: float
    fits: int = Field(1, ge=1, description="Number of filter fits combined")
    risk_bound: float | None = Field(None, description="Theoretical (1 - delta) risk bound")

    @classmethod
    def from_result(
        cls,
        x_hat: TwoSidedSequence,
        fits: "list[FitResult]",
        mode: str,
        bound: float | None,
    ) -> "EstimatePayload":
        first = fits[0]
        return cls(
            mode=mode,  # type: ignore[arg-type]
            lo=x_hat.lo,
            re=x_hat.values.real.tolist(),
            im=x_hat.values.imag.tolist(),
            filter_spectrum=SignalPayload.from_spectrum(first.spectrum),
            trace_length=sum(len(fit.trace) for fit in fits),
            converged=all(fit.converged for fit in fits),
            objective=float(sum(fit.objective for fit in fits)),
            fits=len(fits),
            risk_bound=bound,
        )

    def to_sequence(self) -> TwoSidedSequence:
        values = np.asarray(self.re) + 1j * np.asarray(self.im)
        return TwoSidedSequence(self.lo, values)
