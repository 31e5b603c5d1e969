"""ε-sweeps over the three regimes, rate fits, the subcritical witness and reports."""

from .pullback import PullbackComparison, compare_pullback, run_pullback_check, solve_pullback
from .report import COLUMNS, emit_measures, emit_report, load_sidecar, measure_rows
from .subcritical import SubcriticalWitness, build_witness, check_subcritical_bound, subcritical_bound
from .sweep import RateFit, SweepConfig, SweepResult, SweepRow, default_output, fit_rate, run_sweep

__all__ = [
    "COLUMNS",
    "PullbackComparison",
    "RateFit",
    "SubcriticalWitness",
    "SweepConfig",
    "SweepResult",
    "SweepRow",
    "build_witness",
    "check_subcritical_bound",
    "compare_pullback",
    "default_output",
    "emit_measures",
    "emit_report",
    "fit_rate",
    "load_sidecar",
    "measure_rows",
    "run_pullback_check",
    "run_sweep",
    "solve_pullback",
    "subcritical_bound",
]
