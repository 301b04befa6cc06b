"""Outer training loop: linear-support weight selection over MOPPO.

One conditioned network is trained continuously; each iteration picks
the corner weight with the largest estimated headroom (optimistic GPI
value minus the best value the current set already guarantees there),
trains on it with a mixed pool of support weights, then registers the
fresh network's value vector at every pool weight and prunes entries
that no simplex weight still prefers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..moppo.policy import evaluate_policy
from ..moppo.update import MoppoConfig, train_iteration
from ..nn.adam import AdamState
from ..nn.network import NetworkSpec, init_params
from ..seeding import gpi_rollout_seed, register_episode_seed
from ..simplex import basis_weight, lexicographic_key, unique_weights
from .ccs import CcsState, remove_dominated
from .corners import corner_weights
from .gpi import PolicyBank, estimate_gpi_value
from .store import RunState, load_run_state, save_run_state


class SupportExhausted(Exception):
    """Every corner weight of the current value set has been visited."""


@dataclass(frozen=True)
class GpilsConfig:
    iterations: int = 100
    top_k: int = 4
    eval_episodes: int = 5
    gpi_rollouts: int = 5
    dedup_tol: float = 1e-6
    # reference point for the (driver, energy) hypervolume audit column
    hv_reference: tuple[float, float] = (-2.0, -2.0)

    def __post_init__(self):
        for name in ("iterations", "top_k", "eval_episodes", "gpi_rollouts"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0 < self.dedup_tol < 1:
            raise ValueError("dedup_tol must be in (0, 1)")


@dataclass(frozen=True)
class RankedCandidate:
    weight: np.ndarray
    improvement: float
    gpi_value: float


@dataclass
class RunResult:
    state: CcsState
    log_rows: list[dict]
    params: dict[str, np.ndarray]
    adam: AdamState
    exhausted: bool = False


def rank_candidates(candidates, values, value_fn) -> list[RankedCandidate]:
    """Order unvisited corner weights by estimated improvement.

    ``value_fn(index, w)`` supplies the optimistic value estimate; the
    improvement is measured against the best scalarized value the
    registered set already attains at w. Ties break lexicographically on
    the weight so the selection is reproducible.
    """
    cands = sorted(candidates, key=lexicographic_key)
    if not cands:
        raise SupportExhausted("no unvisited corner weights remain")
    values = np.asarray(values, dtype=np.float64)
    ranked = []
    for ci, w in enumerate(cands):
        vhat = float(value_fn(ci, w))
        best = float(np.max(values @ w))
        ranked.append(RankedCandidate(w, vhat - best, vhat))
    ranked.sort(key=lambda r: (-r.improvement, lexicographic_key(r.weight)))
    return ranked


def select_weight(candidates, values, value_fn) -> RankedCandidate:
    return rank_candidates(candidates, values, value_fn)[0]


def _hv_projection(values: np.ndarray) -> list[tuple[float, float]]:
    """Project value vectors onto the (driver, energy) objectives."""
    if values.shape[1] >= 3:
        return [(float(v[1]), float(v[2])) for v in values]
    return [(float(v[0]), float(v[-1])) for v in values]


def _log_row(iteration, w, selected, value, stats, support, state, hv) -> dict:
    row = {"iteration": iteration}
    for i, x in enumerate(w):
        row[f"w{i}"] = float(x)
    row["improvement"] = float(selected.improvement)
    row["gpi_value"] = float(selected.gpi_value)
    for i, x in enumerate(value):
        row[f"value{i}"] = float(x)
    losses = stats["losses"]
    row.update(loss_total=float(losses["total"]), loss_clip=float(losses["l_clip"]),
               loss_vf=float(losses["l_vf"]), entropy=float(losses["entropy"]),
               episodes=int(stats["episodes"]),
               success_rate=float(stats["success_rate"]),
               support_size=len(support), ccs_size=len(state),
               hypervolume=float(hv))
    return row


def run_gpils(env, spec: NetworkSpec, moppo: MoppoConfig, gpils: GpilsConfig,
              master_seed: int, out_dir=None, resume: bool = False,
              progress=None) -> RunResult:
    """Train a coverage set; checkpoint after every iteration when
    ``out_dir`` is given, and continue a stored run when ``resume``."""
    # imported here, not at module level: the harness package imports this
    # module for GpilsConfig, so a top-level import would be circular
    from ..harness.hypervolume import hypervolume

    if resume:
        if out_dir is None:
            raise ValueError("resume requires out_dir")
        run = load_run_state(out_dir)
        if run.spec != spec:
            raise ValueError("resume with a different network spec")
        if run.master_seed != master_seed:
            raise ValueError(
                f"run was seeded with {run.master_seed}, asked to resume with {master_seed}")
        params, adam, state, log_rows = run.params, run.adam, run.ccs, run.log_rows
    else:
        params = init_params(spec)
        adam = AdamState.for_params(params, lr=moppo.lr)
        state = CcsState(spec=spec)
        log_rows = []

    d = spec.weight_dim
    exhausted = False
    for iteration in range(state.iteration, gpils.iterations):
        bootstrap = len(state) == 0
        if bootstrap:
            # bootstrap: the first objective's extreme point
            w = basis_weight(0, d)
            selected = RankedCandidate(w, 0.0, 0.0)
            support = [w]
        else:
            corners = corner_weights(state.values, gpils.dedup_tol)
            candidates = [c for c in corners if state.find(c, gpils.dedup_tol) < 0]
            bank = PolicyBank.from_snapshots(spec, state.snapshots)

            def value_fn(ci, cand, _it=iteration, _bank=bank):
                seeds = [gpi_rollout_seed(master_seed, _it, ci, r)
                         for r in range(gpils.gpi_rollouts)]
                return estimate_gpi_value(env, _bank, cand, seeds, moppo.gamma)

            try:
                ranked = rank_candidates(candidates, state.values, value_fn)
            except SupportExhausted:
                exhausted = True
                if progress:
                    progress(f"iteration {iteration}: all corner weights visited; stopping")
                break
            selected = ranked[0]
            w = selected.weight
            topk = [r.weight for r in ranked[:gpils.top_k]]
            support = unique_weights(state.weights + topk + [w], gpils.dedup_tol)

        params, value, stats = train_iteration(
            env, params, adam, spec, w, support, moppo, master_seed, iteration)

        if bootstrap:
            selected = RankedCandidate(w, 0.0, float(w @ value))
        for mi, wp in enumerate(support):
            seeds = [register_episode_seed(master_seed, iteration, mi, e)
                     for e in range(gpils.eval_episodes)]
            v = evaluate_policy(env, params, spec, wp, seeds, moppo.gamma)
            state.register(wp, v, params, seeds, iteration)
        state = remove_dominated(state)
        state.iteration = iteration + 1

        hv = hypervolume(_hv_projection(state.values), gpils.hv_reference)
        log_rows.append(_log_row(iteration, w, selected, value, stats,
                                 support, state, hv))
        if out_dir is not None:
            save_run_state(out_dir, RunState(spec, params, adam, state,
                                             log_rows, master_seed))
        if progress:
            progress(f"iteration {iteration}: w={np.round(w, 4)} "
                     f"success={stats['success_rate']:.2f} "
                     f"|support|={len(support)} |ccs|={len(state)} hv={hv:.6f}")
    return RunResult(state, log_rows, params, adam, exhausted)
