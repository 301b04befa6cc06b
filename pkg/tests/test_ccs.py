"""Coverage-set bookkeeping: registration, pruning, persistence."""

import numpy as np
import pytest

from paretodrive.gpils import CcsState, load_run_state, remove_dominated, save_run_state
from paretodrive.gpils.ccs import grid_max_scalarized
from paretodrive.gpils.store import RunState, read_csv, write_csv
from paretodrive.nn.adam import AdamState
from paretodrive.nn.network import NetworkSpec, init_params

SPEC2 = NetworkSpec(obs_dim=4, weight_dim=2, num_actions=3,
                    obs_layers=(8,), weight_layers=(8,), init_seed=3)
SPEC3 = NetworkSpec(obs_dim=4, weight_dim=3, num_actions=3,
                    obs_layers=(8,), weight_layers=(8,), init_seed=3)


def make_state(spec, entries):
    state = CcsState(spec=spec)
    params = init_params(spec)
    for i, (w, v) in enumerate(entries):
        state.register(w, v, params, eval_seeds=[2 * i + 1], iteration=0)
    return state


def test_register_and_keep_if_better():
    state = make_state(SPEC2, [([1.0, 0.0], [1.0, -1.0])])
    assert len(state) == 1
    # worse value at the same weight is ignored
    changed = state.register([1.0, 0.0], [0.5, 0.0], state.snapshots[0].params,
                             [9], iteration=1)
    assert not changed
    assert state.snapshots[0].value[0] == 1.0
    # better scalarized value replaces the entry, id moves on
    changed = state.register([1.0, 0.0], [2.0, -5.0], state.snapshots[0].params,
                             [9], iteration=1)
    assert changed
    assert state.snapshots[0].value[0] == 2.0
    # ids are sequential over accepted snapshots; the ignored one burns none
    assert state.snapshots[0].policy_id == 1
    assert len(state) == 1  # still one entry per weight


def test_weights_and_values_stay_paired():
    state = make_state(SPEC2, [([1.0, 0.0], [1.0, 0.0]), ([0.0, 1.0], [0.0, 1.0])])
    assert len(state.weights) == state.values.shape[0] == 2
    assert state.find([0.0, 1.0]) == 1
    assert state.find([0.5, 0.5]) == -1


def test_prune_drops_pareto_dominated():
    state = make_state(SPEC2, [([1.0, 0.0], [2.0, 2.0]), ([0.0, 1.0], [1.0, 1.0])])
    pruned = remove_dominated(state)
    assert len(pruned) == 1
    assert np.allclose(pruned.values[0], [2.0, 2.0])


def test_prune_keeps_both_extremes():
    state = make_state(SPEC2, [([1.0, 0.0], [1.0, 0.0]), ([0.0, 1.0], [0.0, 1.0])])
    assert len(remove_dominated(state)) == 2


def test_prune_drops_convex_dominated_interior_point():
    # (0.4, 0.4) is below the segment between the two extremes everywhere
    state = make_state(SPEC2, [([1.0, 0.0], [1.0, 0.0]),
                               ([0.0, 1.0], [0.0, 1.0]),
                               ([0.5, 0.5], [0.4, 0.4])])
    pruned = remove_dominated(state)
    assert len(pruned) == 2
    assert all(float(max(s.value)) == 1.0 for s in pruned.snapshots)


def test_prune_keeps_exact_ties():
    state = make_state(SPEC2, [([1.0, 0.0], [1.0, 0.0]), ([0.0, 1.0], [1.0, 0.0])])
    # identical values: both are tied maximizers wherever one is
    assert len(remove_dominated(state)) == 2


def test_prune_preserves_grid_maxima():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        vals = rng.normal(size=(n, 3))
        state = make_state(SPEC3, [(w, v) for w, v in zip(
            [np.eye(3)[i % 3] for i in range(n)], vals)])
        # distinct weights are required for registration; synthesize them
        state = CcsState(spec=SPEC3)
        params = init_params(SPEC3)
        for i, v in enumerate(vals):
            w = np.zeros(3)
            w[0] = (i + 1) / (n + 1)
            w[1] = 1.0 - w[0]
            state.register(w, v, params, [1], 0)
        _, before = grid_max_scalarized(state.values)
        pruned = remove_dominated(state)
        _, after = grid_max_scalarized(pruned.values)
        assert len(pruned) <= len(state)
        assert np.max(np.abs(before - after)) <= 1e-12


def test_run_state_roundtrip(tmp_path):
    state = make_state(SPEC3, [([1.0, 0.0, 0.0], [1.0, -0.25, -0.125]),
                               ([0.0, 1.0, 0.0], [0.0, -0.03125, -0.5])])
    state.iteration = 4
    params = init_params(SPEC3)
    adam = AdamState.for_params(params, lr=1e-3)
    adam.step = 7
    rows = [{"iteration": 0, "loss_total": 0.125, "note": "x"},
            {"iteration": 1, "loss_total": -2.5, "note": "y"}]
    run = RunState(SPEC3, params, adam, state, rows, master_seed=99)
    save_run_state(tmp_path, run)

    loaded = load_run_state(tmp_path)
    assert loaded.master_seed == 99
    assert loaded.ccs.iteration == 4
    assert loaded.ccs.next_policy_id == state.next_policy_id
    assert loaded.adam.step == 7
    assert loaded.log_rows == rows
    for k in params:
        assert np.array_equal(loaded.params[k], params[k])
    assert len(loaded.ccs) == 2
    for got, want in zip(loaded.ccs.snapshots, state.snapshots):
        assert got.policy_id == want.policy_id
        assert np.array_equal(got.weight, want.weight)
        assert np.array_equal(got.value, want.value)
        assert got.eval_seeds == want.eval_seeds
        for k in want.params:
            assert np.array_equal(got.params[k], want.params[k])
    # snapshot blobs are shared: identical params, one file
    blobs = list((tmp_path / "snapshots").glob("*.ckpt"))
    assert len(blobs) == 1
    assert (tmp_path / "ccs.csv").exists()
    assert (tmp_path / "training_log.csv").exists()


def test_load_missing_state_raises(tmp_path):
    from paretodrive.nn.checkpoint import CheckpointError
    with pytest.raises(CheckpointError, match="no run state"):
        load_run_state(tmp_path)


def test_csv_roundtrip_exact(tmp_path):
    rows = [{"a": 1, "b": 0.1 + 0.2, "c": "x;y", "d": -1.25e-9},
            {"a": -3, "b": float(np.float64(1) / 3), "c": "", "d": 2.0}]
    path = tmp_path / "t.csv"
    write_csv(path, rows)
    assert read_csv(path) == rows
