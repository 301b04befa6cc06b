"""Artifact emission: delimited tables and the figures rendered beside them."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from ..gpils.store import read_csv, write_csv
from .baseline import BaselineResult
from .evaluate import ParetoRecord


def pareto_rows(records) -> list[dict]:
    rows = []
    for r in records:
        row: dict = {}
        for i, x in enumerate(r.weight):
            row[f"w{i}"] = float(x)
        row.update(policy_id=r.policy_id, success_rate=r.success_rate,
                   failure_rate=r.failure_rate, max_step_rate=r.max_step_rate,
                   avg_speed=r.avg_speed, driver_cost=r.driver_cost,
                   energy_cost=r.energy_cost, distance=r.distance,
                   tcop=r.tcop, tcop_per_m=r.tcop_per_m)
        rows.append(row)
    return rows


def write_pareto_csv(path, records) -> None:
    write_csv(path, pareto_rows(records))


def read_pareto_csv(path) -> list[ParetoRecord]:
    records = []
    for row in read_csv(path):
        weight = tuple(row[k] for k in sorted(row) if k.startswith("w")
                       and k[1:].isdigit())
        records.append(ParetoRecord(
            weight=weight, policy_id=int(row["policy_id"]),
            success_rate=float(row["success_rate"]),
            failure_rate=float(row["failure_rate"]),
            max_step_rate=float(row["max_step_rate"]),
            avg_speed=float(row["avg_speed"]),
            driver_cost=float(row["driver_cost"]),
            energy_cost=float(row["energy_cost"]),
            distance=float(row["distance"]),
            tcop=float(row["tcop"]), tcop_per_m=float(row["tcop_per_m"])))
    return records


def write_baseline_csv(path, result: BaselineResult) -> None:
    rows = [{"speed": float(v), "cost_per_meter": float(c),
             "total_cost": float(c * result.road_length)}
            for v, c in zip(result.speeds, result.costs_per_meter)]
    write_csv(path, rows)


def render_pareto_figure(path, records) -> None:
    """Driver vs. energy cost scatter, colored by success rate."""
    fig, ax = plt.subplots(figsize=(7, 5))
    if records:
        sc = ax.scatter([r.driver_cost for r in records],
                        [r.energy_cost for r in records],
                        c=[r.success_rate for r in records],
                        cmap="viridis", vmin=0.0, vmax=100.0, s=36,
                        edgecolors="black", linewidths=0.4)
        fig.colorbar(sc, ax=ax, label="success rate (%)")
    ax.set_xlabel("driver cost (euros)")
    ax.set_ylabel("energy cost (euros)")
    ax.set_title("Operating-cost trade-off across preference weights")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path))
    plt.close(fig)


def render_baseline_figure(path, result: BaselineResult) -> None:
    """Constant-speed cost curve with the analytic optimum marked."""
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(result.speeds, result.costs_per_meter, label="cost per meter")
    ax.axvline(result.optimal_speed, color="tab:red", linestyle="--",
               label=f"optimum {result.optimal_speed:.2f} m/s")
    ax.scatter([result.optimal_speed], [result.cost_per_meter],
               color="tab:red", zorder=3)
    ax.set_xlabel("constant speed (m/s)")
    ax.set_ylabel("cost (euros/m)")
    ax.set_title(f"Constant-speed baseline: "
                 f"{result.minimal_cost:.2f} euros over {result.road_length:.0f} m")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path))
    plt.close(fig)


def render_training_figure(path, log_rows) -> None:
    """Hypervolume and success-rate progress over training iterations."""
    fig, ax = plt.subplots(figsize=(7, 5))
    iters = [row["iteration"] for row in log_rows]
    ax.plot(iters, [row["hypervolume"] for row in log_rows],
            marker="o", label="hypervolume")
    ax2 = ax.twinx()
    ax2.plot(iters, [100.0 * row["success_rate"] for row in log_rows],
             marker="s", color="tab:orange", label="success rate")
    ax2.set_ylabel("training success rate (%)")
    ax2.set_ylim(-5, 105)
    ax.set_xlabel("iteration")
    ax.set_ylabel("coverage-set hypervolume")
    ax.set_title("Coverage-set training progress")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(path))
    plt.close(fig)
