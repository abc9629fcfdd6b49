"""Monte Carlo experiments, inequality checks and report export"""

from sisrec.harness.export import export_csv, export_json, load_report
from sisrec.harness.monte_carlo import (
    generate_random_sis,
    mix_seed,
    run_detection_trials,
    run_monte_carlo,
)
from sisrec.harness.theory_checks import theory_checks

__all__ = [
    "export_csv",
    "export_json",
    "generate_random_sis",
    "load_report",
    "mix_seed",
    "run_detection_trials",
    "run_monte_carlo",
    "theory_checks",
]
