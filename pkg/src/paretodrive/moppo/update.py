"""Scalarized clipped-surrogate PPO update and the per-weight train loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import seeding
from ..nn import tape
from ..nn.adam import AdamState, adam_step
from ..nn.network import NetworkSpec, as_vars, forward_tape
from .policy import evaluate_policy
from .rollout import RolloutBuffer, collect_rollout, compute_gae


class TrainingError(RuntimeError):
    """Non-finite loss; message references the offending buffer slice."""


@dataclass(frozen=True)
class MoppoConfig:
    gamma: float = 0.99
    lam: float = 0.95
    clip_eps: float = 0.2
    c1: float = 0.5           # value-loss coefficient
    c2: float = 0.01          # entropy coefficient
    epochs: int = 10
    minibatch: int = 64
    lr: float = 3e-4
    n_steps: int = 10_000
    resample_prob: float = 0.5
    eval_episodes: int = 5

    def __post_init__(self):
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must be in [0, 1]")
        if self.clip_eps <= 0:
            raise ValueError("clip epsilon must be positive")
        if not 0.0 <= self.resample_prob <= 1.0:
            raise ValueError("resample probability must be in [0, 1]")
        if self.minibatch <= 0 or self.n_steps <= 0 or self.epochs < 0:
            raise ValueError("sizes must be positive (epochs may be 0)")


def _minibatch_loss(param_vars, spec, batch, config):
    """Build the tape for one minibatch; returns (total, l_clip, l_vf, entropy)."""
    obs, actions, logp_old, adv_vec, returns, weights, masks = batch
    b = obs.shape[0]
    z, v = forward_tape(param_vars, spec, obs, weights)
    z_s = tape.scalarize(z, weights)
    logp_all = tape.masked_log_softmax(z_s, masks)
    logp = tape.gather(logp_all, actions)

    # scalarized advantages, normalized within the update batch
    adv = np.einsum("td,td->t", adv_vec, weights)
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)

    ratio = tape.exp(tape.add_const(logp, -logp_old))
    unclipped = tape.mul_const(ratio, adv)
    clipped = tape.mul_const(
        tape.clip(ratio, 1.0 - config.clip_eps, 1.0 + config.clip_eps), adv)
    l_clip = tape.mean_all(tape.minimum(unclipped, clipped))

    err = tape.add_const(v, -returns)
    l_vf = tape.scale(tape.sum_all(tape.mul(err, err)), 1.0 / b)

    probs = tape.exp(logp_all)
    plogp = tape.mul_const(tape.mul(probs, logp_all), masks.astype(float))
    entropy = tape.scale(tape.sum_all(plogp), -1.0 / b)

    total = tape.add(
        tape.add(tape.scale(l_clip, -1.0), tape.scale(l_vf, config.c1)),
        tape.scale(entropy, -config.c2))
    return total, l_clip, l_vf, entropy


def ppo_update(params, adam: AdamState, spec: NetworkSpec, buffer: RolloutBuffer,
               config: MoppoConfig, rng: np.random.Generator):
    """Epochs of shuffled minibatch Adam steps over the buffer.

    Returns (new params, report) where the report averages each loss term
    over all minibatches of the update.
    """
    if buffer.advantages is None or buffer.returns is None:
        raise ValueError("compute_gae must run before ppo_update")
    n = len(buffer)
    sums = np.zeros(4)
    count = 0
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.minibatch):
            idx = order[start: start + config.minibatch]
            batch = (
                buffer.obs[idx], buffer.actions[idx], buffer.log_probs[idx],
                buffer.advantages[idx], buffer.returns[idx],
                buffer.weights[idx], buffer.masks[idx],
            )
            param_vars = as_vars(params)
            total, l_clip, l_vf, entropy = _minibatch_loss(
                param_vars, spec, batch, config)
            terms = (float(total.data), float(l_clip.data),
                     float(l_vf.data), float(entropy.data))
            if not np.all(np.isfinite(terms)):
                raise TrainingError(
                    f"non-finite loss {terms} on minibatch rows {idx[:8].tolist()}...")
            tape.backward(total)
            grads = {k: v.grad for k, v in param_vars.items()}
            params = adam_step(params, grads, adam)
            sums += terms
            count += 1
    report = dict(zip(("total", "l_clip", "l_vf", "entropy"),
                      (sums / max(count, 1)).tolist()))
    report["minibatches"] = count
    return params, report


def train_iteration(env, params, adam: AdamState, spec: NetworkSpec,
                    w_selected, w_topk, config: MoppoConfig,
                    master_seed: int, iteration: int):
    """One full learner pass: collect -> GAE -> PPO epochs -> evaluate at w.

    Returns (params, value vector v^{pi_w}, stats dict).
    """
    buffer = collect_rollout(env, params, spec, w_selected, w_topk, config,
                             master_seed, iteration)
    compute_gae(buffer, config.gamma, config.lam)
    if config.epochs > 0:
        rng = seeding.derived_rng(master_seed, seeding.UPDATE, iteration)
        params, report = ppo_update(params, adam, spec, buffer, config, rng)
    else:
        report = {"total": 0.0, "l_clip": 0.0, "l_vf": 0.0, "entropy": 0.0,
                  "minibatches": 0}
    seeds = [seeding.eval_episode_seed(master_seed, iteration, i)
             for i in range(config.eval_episodes)]
    value = evaluate_policy(env, params, spec, w_selected, seeds, config.gamma)
    episodes = len(buffer.episode_returns)
    stats = {
        "losses": report,
        "episodes": episodes,
        "success_rate": (float(np.mean(buffer.episode_successes))
                         if episodes else 0.0),
        "mean_return": (np.mean(buffer.episode_returns, axis=0)
                        if episodes else np.zeros(spec.weight_dim)),
    }
    return params, value, stats
