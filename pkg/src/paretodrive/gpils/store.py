"""On-disk run state: resumable training checkpoints plus report CSVs.

A run directory holds

  state.ckpt          live network + Adam state + coverage-set manifest
                      (single file, written atomically: the commit point)
  snapshots/<digest>.ckpt
                      content-addressed parameter blobs referenced by the
                      manifest; append-only, shared by entries that were
                      registered from the same training iteration
  ccs.csv             tabular view of the current coverage set
  training_log.csv    one row per completed iteration, rewritten in full
                      each commit so interrupted runs leave no stale tail

Resuming needs only ``state.ckpt``: every random stream is re-derived
from the master seed and the iteration index stored in its metadata.
Replaced or pruned snapshots may leave unreferenced blobs behind; they
are harmless and keep earlier states reconstructible.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..nn.adam import AdamState
from ..nn.checkpoint import CheckpointError, load_checkpoint, params_digest, save_checkpoint
from ..nn.network import NetworkSpec
from .ccs import CcsState, PolicySnapshot

STATE_FILE = "state.ckpt"
SNAPSHOT_DIR = "snapshots"
CCS_FILE = "ccs.csv"
LOG_FILE = "training_log.csv"


@dataclass
class RunState:
    spec: NetworkSpec
    params: dict[str, np.ndarray]
    adam: AdamState
    ccs: CcsState
    log_rows: list[dict]
    master_seed: int


def _atomic_replace(tmp: Path, final: Path) -> None:
    os.replace(tmp, final)


def _snapshot_path(run_dir: Path, digest: str) -> Path:
    return run_dir / SNAPSHOT_DIR / f"{digest}.ckpt"


def write_csv(path, rows: list[dict]) -> None:
    """Write dict rows with repr-formatted floats (exact round-trip)."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", newline="") as f:
        if rows:
            writer = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            for row in rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v
                                 for k, v in row.items()})
    _atomic_replace(tmp, path)


def read_csv(path) -> list[dict]:
    """Inverse of write_csv: cells parsed back to int/float where they parse."""
    with open(path, newline="") as f:
        rows = []
        for raw in csv.DictReader(f):
            row = {}
            for k, v in raw.items():
                for cast in (int, float):
                    try:
                        row[k] = cast(v)
                        break
                    except ValueError:
                        continue
                else:
                    row[k] = v
            rows.append(row)
        return rows


def _ccs_rows(state: CcsState) -> list[dict]:
    d = state.spec.weight_dim
    rows = []
    for snap in state.snapshots:
        row: dict = {}
        for i in range(d):
            row[f"w{i}"] = float(snap.weight[i])
        for i in range(d):
            row[f"v{i}"] = float(snap.value[i])
        row["policy_id"] = snap.policy_id
        row["iteration"] = snap.iteration
        row["digest"] = params_digest(snap.params)
        row["eval_seeds"] = ";".join(str(s) for s in snap.eval_seeds)
        rows.append(row)
    return rows


def save_run_state(run_dir, run: RunState) -> None:
    run_dir = Path(run_dir)
    (run_dir / SNAPSHOT_DIR).mkdir(parents=True, exist_ok=True)

    entries = []
    for snap in run.ccs.snapshots:
        digest = params_digest(snap.params)
        blob = _snapshot_path(run_dir, digest)
        if not blob.exists():
            tmp = blob.with_name(blob.name + ".tmp")
            save_checkpoint(tmp, run.spec, snap.params, meta={"digest": digest})
            _atomic_replace(tmp, blob)
        entries.append({
            "policy_id": snap.policy_id,
            "weight": [float(x) for x in snap.weight],
            "value": [float(x) for x in snap.value],
            "eval_seeds": list(snap.eval_seeds),
            "iteration": snap.iteration,
            "digest": digest,
        })

    meta = {
        "kind": "gpi-ls run state",
        "master_seed": run.master_seed,
        "iteration": run.ccs.iteration,
        "next_policy_id": run.ccs.next_policy_id,
        "entries": entries,
        "log_rows": run.log_rows,
    }
    tmp = run_dir / (STATE_FILE + ".tmp")
    save_checkpoint(tmp, run.spec, run.params, adam=run.adam, meta=meta)
    _atomic_replace(tmp, run_dir / STATE_FILE)  # commit point

    write_csv(run_dir / CCS_FILE, _ccs_rows(run.ccs))
    write_csv(run_dir / LOG_FILE, run.log_rows)


def load_run_state(run_dir) -> RunState:
    run_dir = Path(run_dir)
    state_path = run_dir / STATE_FILE
    if not state_path.exists():
        raise CheckpointError(f"no run state at {state_path}")
    ckpt = load_checkpoint(state_path)
    meta = ckpt.meta
    if meta.get("kind") != "gpi-ls run state":
        raise CheckpointError(f"{state_path} is not a run-state checkpoint")

    snapshots = []
    for e in meta["entries"]:
        blob = _snapshot_path(run_dir, e["digest"])
        if not blob.exists():
            raise CheckpointError(f"missing snapshot blob {blob}")
        params = load_checkpoint(blob).params
        if params_digest(params) != e["digest"]:
            raise CheckpointError(f"snapshot blob {blob} fails its digest")
        snapshots.append(PolicySnapshot(
            policy_id=int(e["policy_id"]),
            weight=np.asarray(e["weight"], dtype=np.float64),
            value=np.asarray(e["value"], dtype=np.float64),
            params=params,
            eval_seeds=tuple(int(s) for s in e["eval_seeds"]),
            iteration=int(e["iteration"])))

    ccs = CcsState(spec=ckpt.spec, snapshots=snapshots,
                   iteration=int(meta["iteration"]),
                   next_policy_id=int(meta["next_policy_id"]))
    # JSON round-trips ints/floats; log rows come back as written
    log_rows = [dict(r) for r in meta["log_rows"]]
    return RunState(spec=ckpt.spec, params=ckpt.params, adam=ckpt.adam,
                    ccs=ccs, log_rows=log_rows,
                    master_seed=int(meta["master_seed"]))
