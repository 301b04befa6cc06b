"""Weight-conditioned actor/critic network.

Two MLP encoders — one over the observation, one over the preference
weight — produce equal-width features that are combined element-wise; an
actor head maps the combined feature to per-objective action logits
(|actions| x d) and a critic head to a d-vector of value estimates.
Parameters live in a flat name->ndarray dict so the optimizer and the
checkpoint format stay trivial.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from . import tape
from .tape import MASK_FILL, Var


class SpecError(ValueError):
    """Inconsistent network specification."""


@dataclass(frozen=True)
class NetworkSpec:
    obs_dim: int
    weight_dim: int
    num_actions: int
    obs_layers: tuple[int, ...] = (256, 256)
    weight_layers: tuple[int, ...] = (256, 256)
    activation: str = "tanh"
    dtype: str = "float32"
    init_seed: int = 0

    def __post_init__(self):
        if self.obs_dim <= 0 or self.weight_dim <= 0 or self.num_actions <= 0:
            raise SpecError("dimensions must be positive")
        if not self.obs_layers or not self.weight_layers:
            raise SpecError("encoders need at least one layer")
        if self.obs_layers[-1] != self.weight_layers[-1]:
            raise SpecError(
                "element-wise combination needs equal encoder output widths: "
                f"{self.obs_layers[-1]} != {self.weight_layers[-1]}"
            )
        if self.activation != "tanh":
            raise SpecError(f"unsupported activation {self.activation!r}")
        if self.dtype not in ("float32", "float64"):
            raise SpecError(f"unsupported dtype {self.dtype!r}")

    @property
    def feature_dim(self) -> int:
        return self.obs_layers[-1]

    def to_json(self) -> str:
        d = {
            "obs_dim": self.obs_dim,
            "weight_dim": self.weight_dim,
            "num_actions": self.num_actions,
            "obs_layers": list(self.obs_layers),
            "weight_layers": list(self.weight_layers),
            "activation": self.activation,
            "dtype": self.dtype,
            "init_seed": self.init_seed,
        }
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "NetworkSpec":
        d = json.loads(text)
        d["obs_layers"] = tuple(d["obs_layers"])
        d["weight_layers"] = tuple(d["weight_layers"])
        return cls(**d)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def _orthogonal(rng: np.random.Generator, rows: int, cols: int, gain: float) -> np.ndarray:
    a = rng.standard_normal((rows, cols))
    if rows < cols:
        a = a.T
    q, r = np.linalg.qr(a)
    q *= np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return np.ascontiguousarray(gain * q[:rows, :cols])


def _layer_names(prefix: str, sizes: tuple[int, ...]):
    return [(f"{prefix}.{i}.w", f"{prefix}.{i}.b") for i in range(len(sizes))]


def init_params(spec: NetworkSpec) -> dict[str, np.ndarray]:
    """Orthogonal init; small gain (0.01) on the actor head keeps the
    initial policy near-uniform, standard for clipped policy gradients."""
    rng = np.random.default_rng(spec.init_seed)
    dt = np.dtype(spec.dtype)
    params: dict[str, np.ndarray] = {}

    def stack(prefix, in_dim, sizes):
        for (wn, bn), out_dim in zip(_layer_names(prefix, sizes), sizes):
            params[wn] = _orthogonal(rng, in_dim, out_dim, np.sqrt(2.0)).astype(dt)
            params[bn] = np.zeros(out_dim, dtype=dt)
            in_dim = out_dim

    stack("obs", spec.obs_dim, spec.obs_layers)
    stack("wenc", spec.weight_dim, spec.weight_layers)
    f = spec.feature_dim
    params["actor.w"] = _orthogonal(rng, f, spec.num_actions * spec.weight_dim, 0.01).astype(dt)
    params["actor.b"] = np.zeros(spec.num_actions * spec.weight_dim, dtype=dt)
    params["critic.w"] = _orthogonal(rng, f, spec.weight_dim, 1.0).astype(dt)
    params["critic.b"] = np.zeros(spec.weight_dim, dtype=dt)
    return params


def zero_params(spec: NetworkSpec) -> dict[str, np.ndarray]:
    p = init_params(spec)
    return {k: np.zeros_like(v) for k, v in p.items()}


def param_names(spec: NetworkSpec) -> list[str]:
    names = []
    for prefix, sizes in (("obs", spec.obs_layers), ("wenc", spec.weight_layers)):
        for wn, bn in _layer_names(prefix, sizes):
            names.extend((wn, bn))
    names.extend(("actor.w", "actor.b", "critic.w", "critic.b"))
    return names


def _encode(x, prefix, sizes, params):
    h = x
    for wn, bn in _layer_names(prefix, sizes):
        h = np.tanh(h @ params[wn] + params[bn])
    return h


def forward(params: dict[str, np.ndarray], spec: NetworkSpec,
            obs: np.ndarray, w: np.ndarray):
    """Plain-numpy forward pass (no tape) for rollouts and evaluation.

    Accepts a single sample (1-D obs/w) or a batch (2-D); returns
    (logits (..., A, d), values (..., d)) matching the input rank.
    """
    obs = np.asarray(obs, dtype=spec.dtype)
    w = np.asarray(w, dtype=spec.dtype)
    if obs.shape[-1] != spec.obs_dim:
        raise SpecError(f"obs has {obs.shape[-1]} features, spec wants {spec.obs_dim}")
    if w.shape[-1] != spec.weight_dim:
        raise SpecError(f"weight has {w.shape[-1]} components, spec wants {spec.weight_dim}")
    single = obs.ndim == 1
    if single:
        obs = obs[None, :]
        w = w[None, :]
    feat = _encode(obs, "obs", spec.obs_layers, params) * \
        _encode(w, "wenc", spec.weight_layers, params)
    z = (feat @ params["actor.w"] + params["actor.b"]).reshape(
        -1, spec.num_actions, spec.weight_dim)
    v = feat @ params["critic.w"] + params["critic.b"]
    if single:
        return z[0], v[0]
    return z, v


def forward_tape(param_vars: dict[str, Var], spec: NetworkSpec,
                 obs: np.ndarray, w: np.ndarray):
    """Tape forward over a batch; returns (logits Var (B,A,d), values Var (B,d))."""
    obs = np.asarray(obs, dtype=spec.dtype)
    w = np.asarray(w, dtype=spec.dtype)

    def encode(x, prefix, sizes):
        h = tape.leaf(x)
        for wn, bn in _layer_names(prefix, sizes):
            h = tape.tanh(tape.linear(h, param_vars[wn], param_vars[bn]))
        return h

    feat = tape.mul(encode(obs, "obs", spec.obs_layers),
                    encode(w, "wenc", spec.weight_layers))
    z = tape.reshape(
        tape.linear(feat, param_vars["actor.w"], param_vars["actor.b"]),
        (obs.shape[0], spec.num_actions, spec.weight_dim))
    v = tape.linear(feat, param_vars["critic.w"], param_vars["critic.b"])
    return z, v


def as_vars(params: dict[str, np.ndarray]) -> dict[str, Var]:
    return {k: Var(v) for k, v in params.items()}


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Probabilities over actions with infeasible entries forced to zero.

    ``mask`` is 1/True for feasible actions. Invalid logits are replaced
    by a large negative fill before the (max-shifted) softmax, then the
    result is renormalized over the feasible set so masked entries are
    exactly zero rather than merely tiny.
    """
    logits = np.asarray(logits, dtype=np.float64)
    valid = np.asarray(mask, dtype=bool)
    if not valid.any(axis=-1).all():
        raise tape.InvalidMaskError("mask leaves no feasible action")
    z = np.where(valid, logits, MASK_FILL)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.where(valid, np.exp(z), 0.0)
    return e / e.sum(axis=-1, keepdims=True)
