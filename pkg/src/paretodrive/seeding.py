"""Derived random streams keyed by (master seed, purpose, indices).

Every random draw in training/evaluation comes from a stream derived
here, so resuming from a checkpoint needs only the master seed and the
iteration index — no generator state is serialized. Training episode
seeds are even and evaluation episode seeds odd, making the two seed
sets disjoint by construction.
"""

from __future__ import annotations

import numpy as np

# purpose tags (part of the derivation key; never reuse values)
EPISODE = 1
ACTIONS = 2
UPDATE = 3
EVAL = 4
GPI = 5
REGISTER = 6
PARETO = 7


def _key(parts) -> list[int]:
    out = []
    for p in parts:
        if isinstance(p, (int, np.integer)):
            out.append(int(p))
        else:
            raise TypeError(f"seed key parts must be ints, got {p!r}")
    return out


def derived_rng(*parts) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(_key(parts)))


def derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(_key(parts)).generate_state(1)[0])


def train_episode_seed(master: int, iteration: int, episode: int) -> int:
    return 2 * derived_seed(master, EPISODE, iteration, episode)


def eval_episode_seed(master: int, tag: int, index: int) -> int:
    return 2 * derived_seed(master, EVAL, tag, index) + 1


def gpi_rollout_seed(master: int, iteration: int, candidate: int, rollout: int) -> int:
    """Episode seed for one GPI value-estimation rollout (odd: eval family)."""
    return 2 * derived_seed(master, GPI, iteration, candidate, rollout) + 1


def register_episode_seed(master: int, iteration: int, member: int, episode: int) -> int:
    """Episode seed for registering one weight of the coverage set (odd)."""
    return 2 * derived_seed(master, REGISTER, iteration, member, episode) + 1


def pareto_episode_seed(master: int, weight_index: int, episode: int) -> int:
    """Episode seed for the Pareto-front evaluation sweep (odd)."""
    return 2 * derived_seed(master, PARETO, weight_index, episode) + 1
