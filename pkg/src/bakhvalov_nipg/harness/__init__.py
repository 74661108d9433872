"""Convergence studies, table output and the command line interface."""

from .study import (
    Cell,
    ConvergenceTable,
    SweepConfig,
    compute_rate,
    emit_table,
    format_sci3,
    preset,
    run_study,
)

__all__ = [
    "Cell",
    "ConvergenceTable",
    "SweepConfig",
    "compute_rate",
    "emit_table",
    "format_sci3",
    "preset",
    "run_study",
]
