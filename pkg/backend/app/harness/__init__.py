"""
Sweep harness: gamma calibration, parallel sweeps, figure extracts and
group statistics.
"""

from .figures import FIGURES, figure_data
from .runner import calibrate_gamma_max, run_sweep
from .schema import ClaimCheck, GroupComparison, SweepConfig
from .stats import compare_groups, directional_report

__all__ = [
    "FIGURES",
    "ClaimCheck",
    "GroupComparison",
    "SweepConfig",
    "calibrate_gamma_max",
    "compare_groups",
    "directional_report",
    "figure_data",
    "run_sweep",
]
