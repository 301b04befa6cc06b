"""Generalized policy improvement over a bank of policy snapshots.

Acting under a query weight w, we evaluate every registered snapshot
(each conditioned on the weight it was registered with), scalarize each
snapshot's per-objective action logits by w, and take the action whose
best-over-policies scalarized logit is largest. Rolling this rule out
and averaging the discounted scalarized return gives the optimistic
value estimate used to prioritize which corner weight to train next.
"""

from __future__ import annotations

import numpy as np

from ..nn.network import NetworkSpec, SpecError, _layer_names
from ..nn.tape import InvalidMaskError
from ..simplex import validate_weight


class PolicyBank:
    """Stacked parameters of all snapshots for batched per-state forwards.

    The weight-encoder features depend only on each snapshot's own
    conditioning weight, so they are computed once at construction; per
    state only the observation encoders and the actor heads run.
    """

    def __init__(self, spec: NetworkSpec, entries):
        """``entries``: iterable of (params dict, conditioning weight)."""
        entries = list(entries)
        if not entries:
            raise ValueError("policy bank needs at least one snapshot")
        self.spec = spec
        self.size = len(entries)
        self._stacks = {
            name: np.stack([params[name] for params, _ in entries])
            for name in entries[0][0]
        }
        cond = np.stack([
            validate_weight(w, spec.weight_dim) for _, w in entries
        ]).astype(spec.dtype)
        h = cond
        for wn, bn in _layer_names("wenc", spec.weight_layers):
            h = np.tanh(np.einsum("pi,pij->pj", h, self._stacks[wn]) + self._stacks[bn])
        self._weight_feats = h

    @classmethod
    def from_snapshots(cls, spec: NetworkSpec, snapshots) -> "PolicyBank":
        return cls(spec, [(s.params, s.weight) for s in snapshots])

    def logits(self, obs) -> np.ndarray:
        """Per-snapshot, per-objective action logits (P, A, d) at one state."""
        obs = np.asarray(obs, dtype=self.spec.dtype)
        if obs.ndim != 1 or obs.shape[0] != self.spec.obs_dim:
            raise SpecError(f"expected a single ({self.spec.obs_dim},) observation")
        h = np.broadcast_to(obs, (self.size, self.spec.obs_dim))
        for wn, bn in _layer_names("obs", self.spec.obs_layers):
            h = np.tanh(np.einsum("pi,pij->pj", h, self._stacks[wn]) + self._stacks[bn])
        feat = h * self._weight_feats
        z = np.einsum("pf,pfo->po", feat, self._stacks["actor.w"]) + self._stacks["actor.b"]
        return z.reshape(self.size, self.spec.num_actions, self.spec.weight_dim)

    def scalarized_logits(self, obs, w) -> np.ndarray:
        """(P, A) scalarized logits of every snapshot under query weight w."""
        w = validate_weight(w, self.spec.weight_dim)
        return self.logits(obs) @ w


def best_action(scalarized: np.ndarray, mask) -> int:
    """argmax over actions of the per-action max over policies, feasible only."""
    scalarized = np.asarray(scalarized, dtype=np.float64)
    mask = np.asarray(mask).astype(bool)
    if not mask.any():
        raise InvalidMaskError("mask leaves no feasible action")
    per_action = scalarized.max(axis=0)
    per_action[~mask] = -np.inf
    return int(np.argmax(per_action))


def gpi_action(bank: PolicyBank, obs, mask, w) -> int:
    return best_action(bank.scalarized_logits(obs, w), mask)


def gpi_episode_return(env, bank: PolicyBank, w, seed: int, gamma: float) -> float:
    """Discounted scalarized return of one seeded episode under GPI acting."""
    w = validate_weight(w, bank.spec.weight_dim)
    obs = env.reset(seed)
    total = 0.0
    discount = 1.0
    while True:
        result = env.step(gpi_action(bank, obs.features, obs.mask, w))
        total += discount * float(w @ result.reward)
        discount *= gamma
        obs = result.obs
        if result.terminated or result.truncated:
            return total


def estimate_gpi_value(env, bank: PolicyBank, w, seeds, gamma: float) -> float:
    """Monte-Carlo mean of the discounted scalarized GPI return."""
    if not len(seeds):
        raise ValueError("need at least one rollout seed")
    returns = [gpi_episode_return(env, bank, w, s, gamma) for s in seeds]
    return float(np.mean(returns))
