"""Acting with the weight-conditioned policy (no tape; rollout-speed path)."""

from __future__ import annotations

import numpy as np

from ..nn.network import NetworkSpec, forward, masked_softmax
from ..simplex import validate_weight


def action_distribution(params, spec: NetworkSpec, obs, w, mask):
    """(probabilities over actions, per-objective logits |A| x d).

    The per-objective logit matrix Z is scalarized by w, masked, and
    softmaxed; Z itself is returned too so the GPI layer can rescalarize
    the same state under other weights.
    """
    w = validate_weight(w, spec.weight_dim)
    z, _ = forward(params, spec, obs, w)
    probs = masked_softmax(z @ w, mask)
    return probs, z


def value_estimate(params, spec: NetworkSpec, obs, w) -> np.ndarray:
    w = validate_weight(w, spec.weight_dim)
    _, v = forward(params, spec, obs, w)
    return np.asarray(v, dtype=np.float64)


def policy_step(params, spec: NetworkSpec, obs, w, mask):
    """One forward pass serving both heads: (probabilities, value vector)."""
    z, v = forward(params, spec, obs, w)
    return masked_softmax(z @ np.asarray(w, dtype=z.dtype), mask), \
        np.asarray(v, dtype=np.float64)


def sample_action(rng: np.random.Generator, probs: np.ndarray) -> tuple[int, float]:
    """Draw an action; returns (index, log-prob)."""
    a = int(rng.choice(probs.shape[-1], p=probs))
    return a, float(np.log(probs[a]))


def greedy_action(probs: np.ndarray) -> int:
    return int(np.argmax(probs))


def evaluate_policy(env, params, spec: NetworkSpec, w, seeds, gamma: float) -> np.ndarray:
    """Mean discounted vector return of the greedy policy conditioned on w
    over the given episode seeds."""
    w = validate_weight(w, spec.weight_dim)
    totals = np.zeros(spec.weight_dim)
    for seed in seeds:
        obs = env.reset(seed)
        discount = 1.0
        while True:
            probs, _ = action_distribution(params, spec, obs.features, w, obs.mask)
            result = env.step(greedy_action(probs))
            totals += discount * result.reward
            discount *= gamma
            obs = result.obs
            if result.terminated or result.truncated:
                break
    return totals / len(seeds)


def episode_stats(env, params, spec: NetworkSpec, w, seeds, gamma: float) -> dict:
    """Greedy-policy evaluation with the bookkeeping the report tables need:
    discounted/undiscounted returns, success and collision rates, mean
    speed, distance, time, and cost of operation per meter."""
    w = validate_weight(w, spec.weight_dim)
    d = spec.weight_dim
    disc = np.zeros(d)
    undisc = np.zeros(d)
    success = collisions = 0
    distance = sim_time = speed_sum = speed_n = 0.0
    for seed in seeds:
        obs = env.reset(seed)
        discount = 1.0
        while True:
            probs, _ = action_distribution(params, spec, obs.features, w, obs.mask)
            result = env.step(greedy_action(probs))
            disc += discount * result.reward
            undisc += result.reward
            discount *= gamma
            distance += result.info["distance"]
            sim_time += result.info["dt"]
            speed_sum += result.info["speed"]
            speed_n += 1
            obs = result.obs
            if result.terminated or result.truncated:
                success += result.info["reached_target"]
                collisions += result.info["collision"]
                break
    n = len(seeds)
    driver_cost = -undisc[1] / n
    energy_cost = -undisc[2] / n
    mean_distance = distance / n
    tcop = driver_cost + energy_cost
    return {
        "value": disc / n,
        "return": undisc / n,
        "success_rate": success / n,
        "collision_rate": collisions / n,
        "mean_speed": speed_sum / max(speed_n, 1),
        "mean_distance": mean_distance,
        "mean_time": sim_time / n,
        "driver_cost": driver_cost,
        "energy_cost": energy_cost,
        "tcop": tcop,
        "tcop_per_m": tcop / mean_distance if mean_distance > 0 else float("inf"),
    }
