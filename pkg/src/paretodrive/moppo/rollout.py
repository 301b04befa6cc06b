"""Rollout collection with mixed-weight episodes, and vector GAE."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import seeding
from ..simplex import validate_weight
from .policy import policy_step, sample_action, value_estimate


class RolloutError(RuntimeError):
    """Environment fault during collection; message carries progress."""


@dataclass
class RolloutBuffer:
    """Flat arrays of exactly n_steps transitions.

    ``terminal`` marks true episode ends (no bootstrap); ``cut`` marks
    bootstrapped ends (env truncation or the buffer boundary slicing an
    episode), with the critic's value of the unseen next state stored in
    ``bootstrap``. Advantages/returns stay None until compute_gae runs.
    """

    obs: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    rewards: np.ndarray
    terminal: np.ndarray
    cut: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    masks: np.ndarray
    bootstrap: np.ndarray
    episode_returns: list = field(default_factory=list)   # per completed episode
    episode_successes: list = field(default_factory=list)
    advantages: np.ndarray | None = None
    returns: np.ndarray | None = None

    def __len__(self) -> int:
        return self.obs.shape[0]


def _pick_weight(rng, w_selected, w_topk, resample_prob):
    if rng.random() < resample_prob:
        return w_selected
    return w_topk[int(rng.integers(len(w_topk)))]


def collect_rollout(env, params, spec, w_selected, w_topk, config,
                    master_seed: int, iteration: int) -> RolloutBuffer:
    """Run exactly config.n_steps environment steps.

    The first episode is conditioned on ``w_selected``; every subsequent
    episode draws its conditioning weight with probability
    ``config.resample_prob`` as ``w_selected`` and otherwise uniformly
    from ``w_topk``. Episode seeds derive from (master_seed, iteration,
    episode index), so collection is reproducible and resumable.
    """
    w_selected = validate_weight(w_selected, spec.weight_dim)
    w_topk = [validate_weight(w, spec.weight_dim) for w in w_topk]
    if not w_topk:
        raise ValueError("w_topk must be non-empty")
    n = config.n_steps
    d = spec.weight_dim
    obs_dim = spec.obs_dim
    buf = RolloutBuffer(
        obs=np.zeros((n, obs_dim)),
        actions=np.zeros(n, dtype=np.int64),
        log_probs=np.zeros(n),
        rewards=np.zeros((n, d)),
        terminal=np.zeros(n, dtype=bool),
        cut=np.zeros(n, dtype=bool),
        values=np.zeros((n, d)),
        weights=np.zeros((n, d)),
        masks=np.zeros((n, spec.num_actions), dtype=np.uint8),
        bootstrap=np.zeros((n, d)),
    )
    rng = seeding.derived_rng(master_seed, seeding.ACTIONS, iteration)
    episode = 0
    w_ep = w_selected
    obs = env.reset(seeding.train_episode_seed(master_seed, iteration, episode))
    ep_return = np.zeros(d)
    for t in range(n):
        try:
            probs, value = policy_step(params, spec, obs.features, w_ep, obs.mask)
            action, logp = sample_action(rng, probs)
            buf.obs[t] = obs.features
            buf.actions[t] = action
            buf.log_probs[t] = logp
            buf.values[t] = value
            buf.weights[t] = w_ep
            buf.masks[t] = obs.mask
            result = env.step(action)
        except Exception as exc:  # noqa: BLE001 - annotate progress, re-raise
            raise RolloutError(
                f"environment fault at step {t}/{n} (episode {episode}): {exc}"
            ) from exc
        buf.rewards[t] = result.reward
        ep_return += result.reward
        if result.terminated:
            buf.terminal[t] = True
        elif result.truncated or t == n - 1:
            buf.cut[t] = True
            buf.bootstrap[t] = value_estimate(
                params, spec, result.obs.features, w_ep)
        if result.terminated or result.truncated:
            buf.episode_returns.append(ep_return.copy())
            buf.episode_successes.append(bool(result.info["reached_target"]))
            ep_return[:] = 0.0
            episode += 1
            w_ep = _pick_weight(rng, w_selected, w_topk, config.resample_prob)
            if t < n - 1:
                obs = env.reset(
                    seeding.train_episode_seed(master_seed, iteration, episode))
        else:
            obs = result.obs
    return buf


def compute_gae(buffer: RolloutBuffer, gamma: float, lam: float) -> None:
    """Per-objective GAE(gamma, lam) in place.

    delta_t = r_t + gamma * V(s_{t+1}) - V(s_t), with V(s_{t+1}) = 0 at
    terminal ends and the stored bootstrap at cut ends; the advantage
    recursion does not flow across either boundary.
    """
    n = len(buffer)
    adv = np.zeros_like(buffer.values)
    next_adv = np.zeros(buffer.values.shape[1])
    for t in range(n - 1, -1, -1):
        if buffer.terminal[t]:
            next_value = np.zeros_like(next_adv)
            next_adv = np.zeros_like(next_adv)
        elif buffer.cut[t]:
            next_value = buffer.bootstrap[t]
            next_adv = np.zeros_like(next_adv)
        else:
            next_value = buffer.values[t + 1]
        delta = buffer.rewards[t] + gamma * next_value - buffer.values[t]
        next_adv = delta + gamma * lam * next_adv
        adv[t] = next_adv
    buffer.advantages = adv
    buffer.returns = adv + buffer.values
