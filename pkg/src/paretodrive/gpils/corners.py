"""Corner weights of the scalarized-value upper surface.

For a set of value vectors V, the map w -> max_v w.v is piecewise linear
on the weight simplex. Its "corners" — the weights where the identity of
the maximizer can change — are the vertices of that piecewise-linear
surface. Each vertex satisfies d-1 active constraints chosen from

  * ties between two value vectors:  (v_i - v_j) . w = 0
  * simplex facets:                  w_k = 0

together with the normalization sum(w) = 1. We enumerate every
(d-1)-subset of those constraints, solve the resulting d x d system, and
keep solutions that are feasible and actually lie on the upper surface
(all vectors involved in the tie constraints attain the maximum there).
Pure-facet combinations yield the simplex extreme points, which are
always included. Weight prioritization only ever needs these points: the
best improvement of a piecewise-linear lower bound is attained at a
vertex.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from ..simplex import WeightError, clip_to_simplex, unique_weights

# how close a tied vector must be to the running maximum (relative) for
# the candidate vertex to count as lying on the upper surface
_SURFACE_RTOL = 1e-9


def _dedup_rows(v: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Drop duplicate value vectors; ties between identical vectors are
    degenerate (singular systems / whole tie-planes, not corners)."""
    keep: list[int] = []
    for i in range(v.shape[0]):
        if not any(np.all(np.abs(v[i] - v[j]) <= tol) for j in keep):
            keep.append(i)
    return v[keep]


def corner_weights(value_set, dedup_tol: float = 1e-6) -> list[np.ndarray]:
    """All weights where the argmax over ``value_set`` of w.v changes,
    plus the simplex extreme points, deduplicated within ``dedup_tol``."""
    v = np.asarray(value_set, dtype=np.float64)
    if v.ndim != 2 or v.shape[0] == 0:
        raise ValueError(f"value_set must be a non-empty (n, d) array, got {v.shape}")
    v = _dedup_rows(v)
    n, d = v.shape

    # constraint rows: (coefficients, indices of the tied vectors or None)
    constraints: list[tuple[np.ndarray, tuple[int, int] | None]] = []
    for i, j in combinations(range(n), 2):
        constraints.append((v[i] - v[j], (i, j)))
    for k in range(d):
        row = np.zeros(d)
        row[k] = 1.0
        constraints.append((row, None))

    found: list[np.ndarray] = []
    scale = max(1.0, float(np.max(np.abs(v))))
    for combo in combinations(constraints, d - 1):
        a = np.vstack([np.ones(d)] + [row for row, _ in combo])
        b = np.zeros(d)
        b[0] = 1.0
        try:
            w = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(w)):
            continue
        try:
            w = clip_to_simplex(w)
        except WeightError:
            continue
        scores = v @ w
        top = float(scores.max())
        tied = {i for _, pair in combo if pair for i in pair}
        if all(scores[i] >= top - _SURFACE_RTOL * scale for i in tied):
            found.append(w)
    return unique_weights(found, dedup_tol)
