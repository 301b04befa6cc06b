"""Pareto-front evaluation sweep over a trained coverage set.

For every weight of a uniform simplex lattice, the snapshot whose stored
value vector scalarizes best is rolled out greedily for a handful of
seeded episodes, and the realized (undiscounted) euros are aggregated
into one record. The final output keeps only records not dominated in
(success rate, driver cost, energy cost).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gpils.ccs import CcsState
from ..moppo.policy import action_distribution, greedy_action
from ..seeding import pareto_episode_seed
from ..simplex import lattice_for_count

DEFAULT_WEIGHT_COUNT = 500
DEFAULT_EPISODES = 5


@dataclass(frozen=True)
class ParetoRecord:
    weight: tuple
    policy_id: int
    success_rate: float     # percent of episodes that reached the target
    failure_rate: float     # percent that ended in a collision
    max_step_rate: float    # percent cut off at the step limit
    avg_speed: float        # m/s, distance over time
    driver_cost: float      # euros per episode (mean)
    energy_cost: float      # euros per episode (mean)
    distance: float         # meters per episode (mean)
    tcop: float             # total cost of operation, euros
    tcop_per_m: float       # euros per meter


def run_episode(env, choose_action, seed: int) -> dict:
    """One greedy episode; undiscounted accounting for the report tables."""
    obs = env.reset(seed)
    driver = energy = distance = time = 0.0
    while True:
        result = env.step(choose_action(obs.features, obs.mask))
        driver -= float(result.reward[1])
        energy -= float(result.reward[2])
        distance += result.info["distance"]
        time += result.info["dt"]
        obs = result.obs
        if result.terminated or result.truncated:
            return {
                "success": bool(result.info["reached_target"]),
                "collision": bool(result.info["collision"]),
                "truncated": bool(result.truncated and not result.terminated),
                "driver_cost": driver,
                "energy_cost": energy,
                "distance": distance,
                "time": time,
            }


def aggregate_record(weight, policy_id, outcomes) -> ParetoRecord:
    n = len(outcomes)
    success = sum(o["success"] for o in outcomes)
    failure = sum(o["collision"] for o in outcomes)
    truncated = sum(o["truncated"] for o in outcomes)
    driver = sum(o["driver_cost"] for o in outcomes) / n
    energy = sum(o["energy_cost"] for o in outcomes) / n
    distance = sum(o["distance"] for o in outcomes) / n
    total_time = sum(o["time"] for o in outcomes)
    tcop = driver + energy
    return ParetoRecord(
        weight=tuple(float(x) for x in weight),
        policy_id=int(policy_id),
        success_rate=100.0 * success / n,
        failure_rate=100.0 * failure / n,
        max_step_rate=100.0 * truncated / n,
        avg_speed=sum(o["distance"] for o in outcomes) / total_time,
        driver_cost=driver,
        energy_cost=energy,
        distance=distance,
        tcop=tcop,
        tcop_per_m=tcop / distance if distance > 0 else float("inf"))


def _dominates(a: ParetoRecord, b: ParetoRecord) -> bool:
    """a dominates b: no worse on success/driver/energy, better somewhere."""
    no_worse = (a.success_rate >= b.success_rate
                and a.driver_cost <= b.driver_cost
                and a.energy_cost <= b.energy_cost)
    strictly = (a.success_rate > b.success_rate
                or a.driver_cost < b.driver_cost
                or a.energy_cost < b.energy_cost)
    return no_worse and strictly


def dominance_filter(records) -> list[ParetoRecord]:
    """Nondominated records only, first-seen kept among exact stat ties."""
    kept: list[ParetoRecord] = []
    seen: set[tuple] = set()
    for r in records:
        key = (r.success_rate, r.driver_cost, r.energy_cost)
        if key in seen:
            continue
        if any(_dominates(q, r) for q in records):
            continue
        seen.add(key)
        kept.append(r)
    return kept


def pareto_eval(state: CcsState, env, weight_count: int = DEFAULT_WEIGHT_COUNT,
                episodes: int = DEFAULT_EPISODES, master_seed: int = 0,
                progress=None) -> list[ParetoRecord]:
    """Sweep a simplex lattice of at least ``weight_count`` weights."""
    if len(state) == 0:
        raise ValueError("cannot evaluate an empty coverage set")
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    lattice = lattice_for_count(state.spec.weight_dim, weight_count)
    values = state.values
    records = []
    for wi, w in enumerate(lattice):
        idx = int(np.argmax(values @ w))
        snap = state.snapshots[idx]

        def choose(features, mask, _p=snap.params, _w=snap.weight):
            probs, _ = action_distribution(_p, state.spec, features, _w, mask)
            return greedy_action(probs)

        outcomes = [run_episode(env, choose, pareto_episode_seed(master_seed, wi, e))
                    for e in range(episodes)]
        records.append(aggregate_record(w, snap.policy_id, outcomes))
        if progress and (wi + 1) % 50 == 0:
            progress(f"evaluated {wi + 1}/{len(lattice)} weights")
    return dominance_filter(records)
