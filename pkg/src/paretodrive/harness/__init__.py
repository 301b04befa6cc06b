"""Evaluation, reporting, and run-configuration harness."""

from .baseline import (
    BaselineResult,
    analytic_cost_per_meter,
    analytic_optimum,
    golden_section_minimize,
)
from .evaluate import ParetoRecord, aggregate_record, dominance_filter, pareto_eval
from .hypervolume import hypervolume
from .report import (
    read_pareto_csv,
    render_baseline_figure,
    render_pareto_figure,
    render_training_figure,
    write_baseline_csv,
    write_pareto_csv,
)
from .runconfig import RunConfig, run_config_from_ini
from .selftest import run_selftest

__all__ = [
    "BaselineResult",
    "ParetoRecord",
    "RunConfig",
    "aggregate_record",
    "analytic_cost_per_meter",
    "analytic_optimum",
    "dominance_filter",
    "golden_section_minimize",
    "hypervolume",
    "pareto_eval",
    "read_pareto_csv",
    "render_baseline_figure",
    "render_pareto_figure",
    "render_training_figure",
    "run_config_from_ini",
    "run_selftest",
    "write_baseline_csv",
    "write_pareto_csv",
]
