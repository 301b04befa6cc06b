"""Linear-support outer loop: corner weights, coverage set, GPI, runner."""

from .ccs import CcsState, PolicySnapshot, remove_dominated
from .corners import corner_weights
from .gpi import PolicyBank, best_action, estimate_gpi_value, gpi_action
from .runner import (
    GpilsConfig,
    RankedCandidate,
    RunResult,
    SupportExhausted,
    rank_candidates,
    run_gpils,
    select_weight,
)
from .store import RunState, load_run_state, read_csv, save_run_state, write_csv

__all__ = [
    "CcsState", "PolicySnapshot", "remove_dominated", "corner_weights",
    "PolicyBank", "best_action", "estimate_gpi_value", "gpi_action",
    "GpilsConfig", "RankedCandidate", "RunResult", "SupportExhausted",
    "rank_candidates", "run_gpils", "select_weight",
    "RunState", "load_run_state", "save_run_state", "read_csv", "write_csv",
]
