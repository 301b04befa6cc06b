"""Kinematic lane-change admissibility filter.

A lane change is admitted only if the surrounding gaps, projected forward
at constant speeds over the maneuver timing, stay above an IDM-style
minimum gap, and a faster rear vehicle in the target lane could avoid the
ego with comfortable braking. Produces the lane-change bits of the
action mask plus per-condition margins for debugging.

All gaps here are net (bumper-to-bumper): sensor readings between
reference points must have vehicle lengths subtracted before
constructing a :class:`GapObservation`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

ABSENT = math.inf


class SafetyConfigError(ValueError):
    """Non-positive timing/geometry parameter."""


@dataclass(frozen=True)
class SafetyParams:
    s0: float = 2.0          # standstill gap, m
    t_headway: float = 1.0   # desired headway, s
    a_max: float = 1.0       # acceleration bound inside min_gap, m/s^2
    b_safe: float = 3.0      # comfortable deceleration, m/s^2
    eps: float = 1e-3        # TTC floor, s
    w_lane: float = 3.2      # lane width, m
    v_lat: float = 0.8       # lateral maneuver speed, m/s


@dataclass(frozen=True)
class GapObservation:
    """Net gaps around the ego for one candidate lane change.

    Gap fields use ``math.inf`` when no vehicle is present. Front relative
    speeds are leader-minus-ego (positive = opening); the target-lane rear
    vehicle's speed is absolute.
    """

    ego_speed: float
    ego_width: float
    front_gap_current: float = ABSENT
    front_rel_speed_current: float = 0.0
    front_gap_target: float = ABSENT
    front_rel_speed_target: float = 0.0
    rear_gap_target: float = ABSENT
    rear_speed_target: float = 0.0

    def __post_init__(self):
        for g in (self.front_gap_current, self.front_gap_target, self.rear_gap_target):
            if g < 0:
                raise ValueError(f"negative gap {g}; collision is upstream's problem")


def lane_change_times(w_lane: float, w_ego: float, v_lat: float):
    """(T_lc, t_enter, t_exit): total duration, time until the ego body
    first overlaps the target lane, time until it fully leaves the
    current lane."""
    if v_lat <= 0 or w_lane <= 0:
        raise SafetyConfigError("w_lane and v_lat must be positive")
    if not 0 < w_ego < 2 * w_lane:
        raise SafetyConfigError(f"ego width {w_ego} incompatible with lane width {w_lane}")
    t_lc = w_lane / v_lat
    t_enter = (w_lane - w_ego) / (2.0 * v_lat)
    t_exit = (w_lane + w_ego) / (2.0 * v_lat)
    return t_lc, t_enter, t_exit


def min_gap(v: float, dv: float, params: SafetyParams) -> float:
    """Minimum admissible net gap for a follower at speed ``v`` closing at
    ``dv`` (positive = approaching its leader)."""
    dynamic = params.t_headway * v + v * dv / (2.0 * math.sqrt(params.a_max * params.b_safe))
    return params.s0 + max(0.0, dynamic)


def required_deceleration(v_rear: float, v_ego: float, s_rear: float,
                          t_enter: float, eps: float) -> float:
    """Deceleration the target-lane rear vehicle needs once the ego starts
    entering its lane; valid only when it is actually approaching."""
    if v_rear <= v_ego:
        raise ValueError("required_deceleration needs v_rear > v_ego")
    ttc = s_rear / (v_rear - v_ego)
    return (v_rear - v_ego) / max(ttc - t_enter, eps)


def lane_change_safe(gaps: GapObservation, params: SafetyParams):
    """Returns (admissible, margins). A margin >= 0 means the condition
    passed; absent vehicles leave their conditions vacuously true (+inf)."""
    t_lc, t_enter, t_exit = lane_change_times(params.w_lane, gaps.ego_width, params.v_lat)
    v_ego = gaps.ego_speed
    margins: dict[str, float] = {}

    # 1) current-lane leader must stay clear until the ego has left the lane
    if math.isinf(gaps.front_gap_current):
        margins["front_current"] = ABSENT
    else:
        rel = gaps.front_rel_speed_current
        projected = gaps.front_gap_current + rel * t_exit
        margins["front_current"] = projected - min_gap(v_ego, -rel, params)

    # 2) target-lane leader must be clear both at lane entry and at completion
    if math.isinf(gaps.front_gap_target):
        margins["front_target"] = ABSENT
    else:
        rel = gaps.front_rel_speed_target
        need = min_gap(v_ego, -rel, params)
        margins["front_target"] = min(
            gaps.front_gap_target + rel * t_enter - need,
            gaps.front_gap_target + rel * t_lc - need,
        )

    # 3) + 4) target-lane rear vehicle: gap at entry, then braking feasibility
    if math.isinf(gaps.rear_gap_target):
        margins["rear_gap"] = ABSENT
        margins["rear_braking"] = ABSENT
    else:
        v_rear = gaps.rear_speed_target
        closing = v_rear - v_ego
        projected = gaps.rear_gap_target - closing * t_enter
        margins["rear_gap"] = projected - min_gap(v_rear, closing, params)
        if closing > 0:
            ttc = gaps.rear_gap_target / closing
            if ttc < t_lc:
                a_req = required_deceleration(v_rear, v_ego, gaps.rear_gap_target,
                                              t_enter, params.eps)
                margins["rear_braking"] = params.b_safe - a_req
            else:
                margins["rear_braking"] = ABSENT
        else:
            margins["rear_braking"] = ABSENT

    return all(m >= 0.0 for m in margins.values()), margins
