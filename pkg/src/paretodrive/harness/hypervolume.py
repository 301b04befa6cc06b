"""Exact planar hypervolume (maximization orientation)."""

from __future__ import annotations

import warnings

import numpy as np


def hypervolume(points, ref) -> float:
    """Area jointly dominated by ``points`` above the reference point.

    Costs enter negated (bigger is better on both axes). Points that do
    not dominate ``ref`` component-wise contribute nothing and are
    dropped with a warning. Exact for the planar case via a single
    sorted sweep; used as the progress audit for coverage-set training.
    """
    ref = np.asarray(ref, dtype=np.float64)
    if ref.shape != (2,):
        raise ValueError(f"reference point must be 2-d, got shape {ref.shape}")
    kept = []
    for p in points:
        p = np.asarray(p, dtype=np.float64)
        if p.shape != (2,):
            raise ValueError(f"points must be 2-d, got shape {p.shape}")
        if np.all(p >= ref):
            kept.append(p)
        else:
            warnings.warn(f"point {p} does not dominate reference {ref}; excluded",
                          stacklevel=2)
    if not kept:
        return 0.0
    area = 0.0
    frontier_y = ref[1]
    for x, y in sorted(kept, key=lambda p: (-p[0], -p[1])):
        if y > frontier_y:
            area += (x - ref[0]) * (y - frontier_y)
            frontier_y = y
    return float(area)
