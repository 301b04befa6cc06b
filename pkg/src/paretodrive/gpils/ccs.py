"""Convex-coverage-set state: registered weights, value vectors, snapshots."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..nn.network import NetworkSpec
from ..simplex import simplex_grid, validate_weight, weights_close

# dominance pruning is checked on this simplex grid (0.01 step for d = 3)
PRUNE_GRID_RESOLUTION = 100
# scalarized-value slack under which a vector still counts as a tied maximizer
PRUNE_TIE_TOL = 1e-12


@dataclass(frozen=True)
class PolicySnapshot:
    """Frozen parameters registered for one support weight.

    ``value`` is the Monte-Carlo discounted return vector of the greedy
    policy conditioned on ``weight``, measured over ``eval_seeds``.
    """

    policy_id: int
    weight: np.ndarray
    value: np.ndarray
    params: dict[str, np.ndarray]
    eval_seeds: tuple[int, ...]
    iteration: int

    def scalarized(self) -> float:
        return float(self.weight @ self.value)


@dataclass
class CcsState:
    """Weight support and value set, kept one-to-one.

    Each visited weight owns exactly one snapshot; re-registering a weight
    keeps whichever snapshot scalarizes better at that weight, so the
    recorded value at a support weight never regresses.
    """

    spec: NetworkSpec
    snapshots: list[PolicySnapshot] = field(default_factory=list)
    iteration: int = 0
    next_policy_id: int = 0

    @property
    def weights(self) -> list[np.ndarray]:
        return [s.weight for s in self.snapshots]

    @property
    def values(self) -> np.ndarray:
        if not self.snapshots:
            return np.zeros((0, self.spec.weight_dim))
        return np.stack([s.value for s in self.snapshots])

    def __len__(self) -> int:
        return len(self.snapshots)

    def find(self, weight, tol: float = 1e-6) -> int:
        for i, snap in enumerate(self.snapshots):
            if weights_close(snap.weight, weight, tol):
                return i
        return -1

    def register(self, weight, value, params, eval_seeds, iteration) -> bool:
        """Insert or keep-if-better at ``weight``; returns True if the
        snapshot set changed."""
        weight = validate_weight(weight, self.spec.weight_dim)
        value = np.asarray(value, dtype=np.float64)
        snap = PolicySnapshot(
            policy_id=self.next_policy_id, weight=weight, value=value,
            params={k: v.copy() for k, v in params.items()},
            eval_seeds=tuple(int(s) for s in eval_seeds), iteration=iteration)
        idx = self.find(weight)
        if idx < 0:
            self.snapshots.append(snap)
            self.next_policy_id += 1
            return True
        if float(weight @ value) > self.snapshots[idx].scalarized():
            self.snapshots[idx] = snap
            self.next_policy_id += 1
            return True
        return False

    def max_scalarized(self, w) -> float:
        if not self.snapshots:
            raise ValueError("empty coverage set")
        return float(np.max(self.values @ np.asarray(w, dtype=np.float64)))


def grid_max_scalarized(values: np.ndarray, resolution: int = PRUNE_GRID_RESOLUTION):
    """max_v w.v for every w on the dense simplex grid; (grid, maxima)."""
    values = np.asarray(values, dtype=np.float64)
    grid = simplex_grid(values.shape[1], resolution)
    return grid, (grid @ values.T).max(axis=1)


def remove_dominated(state: CcsState,
                     resolution: int = PRUNE_GRID_RESOLUTION) -> CcsState:
    """Drop every entry that is nowhere a (tied) maximizer of w.v on the
    dense simplex grid. The surviving set attains the same grid maxima,
    so pruning never changes what the coverage set can promise."""
    if len(state) <= 1:
        return replace(state, snapshots=list(state.snapshots))
    grid = simplex_grid(state.spec.weight_dim, resolution)
    scores = grid @ state.values.T            # (grid points, entries)
    best = scores.max(axis=1, keepdims=True)
    useful = (scores >= best - PRUNE_TIE_TOL).any(axis=0)
    kept = [s for s, u in zip(state.snapshots, useful) if u]
    return replace(state, snapshots=kept)
