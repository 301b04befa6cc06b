"""Weight vectors on the probability simplex and simplex grids."""

from __future__ import annotations

import numpy as np

SIMPLEX_ATOL = 1e-9


class WeightError(ValueError):
    """Raised when a vector is not a valid simplex weight."""


def validate_weight(w, dim: int | None = None) -> np.ndarray:
    """Check that ``w`` lies on the unit simplex and return it as float64."""
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1:
        raise WeightError(f"weight must be a 1-d vector, got shape {w.shape}")
    if dim is not None and w.shape[0] != dim:
        raise WeightError(f"weight must have {dim} components, got {w.shape[0]}")
    if np.any(w < -SIMPLEX_ATOL):
        raise WeightError(f"weight has negative component: {w}")
    s = float(w.sum())
    if abs(s - 1.0) > SIMPLEX_ATOL:
        raise WeightError(f"weight components sum to {s}, expected 1")
    return w


def clip_to_simplex(w, atol: float = 1e-9) -> np.ndarray:
    """Zero out tiny negative components and renormalize to sum 1.

    Components below ``-atol`` are an error; values in ``[-atol, 0)`` are
    numerical noise from linear solves and get clipped.
    """
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < -atol):
        raise WeightError(f"component below -{atol}: {w}")
    w = np.maximum(w, 0.0)
    s = w.sum()
    if s <= 0.0:
        raise WeightError("cannot normalize all-zero weight")
    return w / s


def basis_weight(i: int, dim: int) -> np.ndarray:
    w = np.zeros(dim, dtype=np.float64)
    w[i] = 1.0
    return w


def weights_close(a, b, tol: float = 1e-6) -> bool:
    """Component-wise closeness used for weight dedup."""
    return bool(np.all(np.abs(np.asarray(a) - np.asarray(b)) <= tol))


def unique_weights(weights, tol: float = 1e-6) -> list[np.ndarray]:
    """Deduplicate weights within component-wise ``tol``, keeping first seen."""
    out: list[np.ndarray] = []
    for w in weights:
        w = np.asarray(w, dtype=np.float64)
        if not any(weights_close(w, u, tol) for u in out):
            out.append(w)
    return out


def contains_weight(weights, w, tol: float = 1e-6) -> bool:
    return any(weights_close(w, u, tol) for u in weights)


def lexicographic_key(w) -> tuple:
    return tuple(round(float(x), 12) for x in np.asarray(w))


def simplex_grid(dim: int, resolution: int) -> np.ndarray:
    """All lattice weights (i_1,...,i_dim)/resolution with sum(i) = resolution.

    ``resolution`` is the number of subdivisions per axis: resolution 100
    gives the 0.01-step grid (5151 points for dim 3).
    """
    if dim < 1 or resolution < 1:
        raise ValueError("dim and resolution must be >= 1")
    return _integer_compositions(resolution, dim).astype(np.float64) / resolution


def _integer_compositions(total: int, parts: int) -> np.ndarray:
    if parts == 1:
        return np.array([[total]], dtype=np.int64)
    if parts == 2:
        first = np.arange(total + 1, dtype=np.int64)
        return np.stack([first, total - first], axis=1)
    blocks = []
    for i in range(total + 1):
        rest = _integer_compositions(total - i, parts - 1)
        head = np.full((rest.shape[0], 1), i, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    return np.vstack(blocks)


def lattice_for_count(dim: int, min_count: int) -> np.ndarray:
    """Smallest uniform simplex lattice with at least ``min_count`` points."""
    resolution = 1
    while True:
        n = _lattice_size(dim, resolution)
        if n >= min_count:
            return simplex_grid(dim, resolution)
        resolution += 1


def _lattice_size(dim: int, resolution: int) -> int:
    # C(resolution + dim - 1, dim - 1)
    from math import comb

    return comb(resolution + dim - 1, dim - 1)
