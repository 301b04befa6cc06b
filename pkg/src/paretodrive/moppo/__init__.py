"""Multi-objective PPO: weight-conditioned rollouts, vector GAE,
scalarized clipped-surrogate updates."""

from .policy import action_distribution, episode_stats, evaluate_policy, greedy_action
from .rollout import RolloutBuffer, RolloutError, collect_rollout, compute_gae
from .update import MoppoConfig, TrainingError, ppo_update, train_iteration

__all__ = [
    "action_distribution", "episode_stats", "evaluate_policy", "greedy_action",
    "RolloutBuffer", "RolloutError", "collect_rollout", "compute_gae",
    "MoppoConfig", "TrainingError", "ppo_update", "train_iteration",
]
