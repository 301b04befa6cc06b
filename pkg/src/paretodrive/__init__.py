"""Pareto-optimal tactical driving policies for a heavy-duty truck.

Trains a continuous set of driving policies trading off safety, driver
(time) cost and energy cost, using a weight-conditioned multi-objective
PPO learner inside a linear-support outer loop, on a native three-lane
highway microsimulation.
"""

__version__ = "0.1.0"

NUM_OBJECTIVES = 3
NUM_ACTIONS = 8

# Discrete high-level actions, in canonical index order.
ACTION_GAP_SHORT = 0    # desired time gap 1 s
ACTION_GAP_MEDIUM = 1   # desired time gap 2 s
ACTION_GAP_LONG = 2     # desired time gap 3 s
ACTION_SPEED_UP = 3     # desired speed +1 m/s
ACTION_SLOW_DOWN = 4    # desired speed -1 m/s
ACTION_MAINTAIN = 5     # keep desired speed and gap
ACTION_LANE_LEFT = 6
ACTION_LANE_RIGHT = 7

ACTION_NAMES = (
    "gap_short",
    "gap_medium",
    "gap_long",
    "speed_up",
    "slow_down",
    "maintain",
    "lane_left",
    "lane_right",
)
