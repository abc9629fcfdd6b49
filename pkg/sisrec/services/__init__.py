"""Filter construction, fitting, estimation and detection"""

from sisrec.services.detection import DetectionSetup, detect, detection_threshold
from sisrec.services.estimator import (
    EstimateResult,
    estimate_core,
    estimate_onesided,
    sample_extreme_point,
)
from sisrec.services.filter_oracle import (
    C_STAR,
    FilterBudget,
    certify,
    hybrid_filter,
    hybrid_filter_causal,
    projector_row_filter,
)
from sisrec.services.multiscale import MultiscalePlan, build_plan, estimate_full
from sisrec.services.projection import project_l1_linf
from sisrec.services.solver import FitProblem, FitResult, SolverConfig, fit_filter

__all__ = [
    "C_STAR",
    "DetectionSetup",
    "EstimateResult",
    "FilterBudget",
    "FitProblem",
    "FitResult",
    "MultiscalePlan",
    "SolverConfig",
    "build_plan",
    "certify",
    "detect",
    "detection_threshold",
    "estimate_core",
    "estimate_full",
    "estimate_onesided",
    "fit_filter",
    "hybrid_filter",
    "hybrid_filter_causal",
    "project_l1_linf",
    "projector_row_filter",
    "sample_extreme_point",
]
