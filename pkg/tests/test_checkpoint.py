import numpy as np
import pytest

from paretodrive.nn import checkpoint as ck
from paretodrive.nn.adam import AdamState
from paretodrive.nn.network import NetworkSpec, init_params

SPEC = NetworkSpec(obs_dim=5, weight_dim=3, num_actions=8,
                   obs_layers=(8, 4), weight_layers=(4, 4),
                   dtype="float32", init_seed=42)


def test_roundtrip_params_bit_exact(tmp_path):
    params = init_params(SPEC)
    path = tmp_path / "net.ckpt"
    ck.save_checkpoint(path, SPEC, params, meta={"iteration": 3})
    loaded = ck.load_checkpoint(path)
    assert loaded.spec == SPEC
    assert loaded.meta == {"iteration": 3}
    assert loaded.adam is None
    assert loaded.params.keys() == params.keys()
    for k in params:
        assert loaded.params[k].dtype == params[k].dtype
        assert np.array_equal(loaded.params[k], params[k])


def test_roundtrip_with_adam_state(tmp_path):
    params = init_params(SPEC)
    adam = AdamState.for_params(params, lr=1e-3)
    adam.step = 17
    adam.m["actor.w"] += 0.5
    path = tmp_path / "net.ckpt"
    ck.save_checkpoint(path, SPEC, params, adam=adam)
    loaded = ck.load_checkpoint(path)
    assert loaded.adam.step == 17
    assert loaded.adam.lr == 1e-3
    for k in adam.m:
        assert np.array_equal(loaded.adam.m[k], adam.m[k])
        assert np.array_equal(loaded.adam.v[k], adam.v[k])


def test_float64_arrays_roundtrip(tmp_path):
    spec64 = NetworkSpec(obs_dim=3, weight_dim=2, num_actions=4,
                         obs_layers=(4,), weight_layers=(4,),
                         dtype="float64", init_seed=1)
    params = init_params(spec64)
    path = tmp_path / "net64.ckpt"
    ck.save_checkpoint(path, spec64, params)
    loaded = ck.load_checkpoint(path)
    assert loaded.params["actor.w"].dtype == np.float64
    assert np.array_equal(loaded.params["actor.w"], params["actor.w"])


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(ck.CheckpointError, match="magic"):
        ck.load_checkpoint(path)


def test_wrong_version_rejected(tmp_path):
    params = init_params(SPEC)
    path = tmp_path / "net.ckpt"
    ck.save_checkpoint(path, SPEC, params)
    raw = bytearray(path.read_bytes())
    raw[8] = 99  # little-endian version field follows the 8-byte magic
    path.write_bytes(bytes(raw))
    with pytest.raises(ck.CheckpointError, match="version"):
        ck.load_checkpoint(path)


def test_corrupted_spec_detected_by_hash(tmp_path):
    params = init_params(SPEC)
    path = tmp_path / "net.ckpt"
    ck.save_checkpoint(path, SPEC, params)
    raw = bytearray(path.read_bytes())
    # flip one byte inside the spec JSON (starts after magic+version+length)
    raw[20] ^= 0x01
    path.write_bytes(bytes(raw))
    with pytest.raises(ck.CheckpointError):
        ck.load_checkpoint(path)


def test_truncated_file_rejected(tmp_path):
    params = init_params(SPEC)
    path = tmp_path / "net.ckpt"
    ck.save_checkpoint(path, SPEC, params)
    raw = path.read_bytes()
    path.write_bytes(raw[: len(raw) // 2])
    with pytest.raises(ck.CheckpointError, match="truncated"):
        ck.load_checkpoint(path)


def test_params_digest_tracks_content_not_order():
    a = {"x": np.arange(4, dtype=np.float32), "y": np.ones(2, dtype=np.float32)}
    b = {"y": np.ones(2, dtype=np.float32), "x": np.arange(4, dtype=np.float32)}
    assert ck.params_digest(a) == ck.params_digest(b)
    b["x"] = b["x"] + 1
    assert ck.params_digest(a) != ck.params_digest(b)
