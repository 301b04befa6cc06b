import numpy as np
import pytest

from paretodrive import simplex
from paretodrive.simplex import (
    WeightError,
    basis_weight,
    clip_to_simplex,
    lattice_for_count,
    simplex_grid,
    unique_weights,
    validate_weight,
    weights_close,
)


def test_validate_accepts_basis_and_interior():
    validate_weight([1.0, 0.0, 0.0])
    validate_weight([0.2, 0.3, 0.5], dim=3)


def test_validate_rejects_bad_inputs():
    with pytest.raises(WeightError):
        validate_weight([0.5, 0.6])  # sum != 1
    with pytest.raises(WeightError):
        validate_weight([1.2, -0.2, 0.0])  # negative
    with pytest.raises(WeightError):
        validate_weight([[0.5, 0.5]])  # not 1-d
    with pytest.raises(WeightError):
        validate_weight([0.5, 0.5], dim=3)


def test_clip_to_simplex_handles_solver_noise():
    w = clip_to_simplex([0.4, 0.6, -1e-12])
    assert w[2] == 0.0
    assert abs(w.sum() - 1.0) < 1e-15
    with pytest.raises(WeightError):
        clip_to_simplex([0.6, 0.5, -0.1])


def test_basis_weight():
    assert np.array_equal(basis_weight(0, 3), [1.0, 0.0, 0.0])
    assert np.array_equal(basis_weight(2, 3), [0.0, 0.0, 1.0])


def test_unique_weights_dedup_within_tolerance():
    ws = [
        np.array([0.5, 0.5, 0.0]),
        np.array([0.5 + 1e-8, 0.5 - 1e-8, 0.0]),
        np.array([0.4, 0.6, 0.0]),
    ]
    uniq = unique_weights(ws, tol=1e-6)
    assert len(uniq) == 2
    assert weights_close(uniq[0], ws[0])


def test_simplex_grid_counts_and_membership():
    g2 = simplex_grid(2, 10)
    assert g2.shape == (11, 2)
    g3 = simplex_grid(3, 100)
    # C(102, 2) points on the 0.01-step grid used for dominance pruning
    assert g3.shape == (5151, 3)
    assert np.allclose(g3.sum(axis=1), 1.0)
    assert g3.min() >= 0.0
    # each point unique
    assert len(np.unique(np.round(g3, 9), axis=0)) == 5151


def test_lattice_for_count_picks_smallest_covering_resolution():
    lat = lattice_for_count(3, 500)
    # resolution 30 gives 496 points, 31 gives 528
    assert lat.shape == (528, 3)
    assert simplex._lattice_size(3, 30) == 496
    assert simplex._lattice_size(3, 31) == 528
