"""Three-lane highway microsimulation with a moving traffic window.

The ego truck is driven hierarchically: the agent picks one of 8 tactical
actions (desired gap / desired speed / lane change), a longitudinal IDM
controller tracks the command at 0.1 s substeps, and a timed lateral
controller executes lane changes at a fixed lateral speed. Surrounding
vehicles follow the Krauss car-following model with a simplified
overtaking rule. Traffic lives in a window centered on the ego; vehicles
leaving it re-enter at the opposite boundary with resampled speeds.

Lane 0 is the rightmost lane; "left" increases the lane index. ``x`` is
the front-bumper position, ``y`` the lateral body center (lane i center
at i * w_lane).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import (
    ACTION_GAP_LONG,
    ACTION_GAP_MEDIUM,
    ACTION_GAP_SHORT,
    ACTION_LANE_LEFT,
    ACTION_LANE_RIGHT,
    ACTION_SLOW_DOWN,
    ACTION_SPEED_UP,
    NUM_ACTIONS,
)
from ..safety import GapObservation, lane_change_safe, min_gap
from . import dynamics
from .config import ConfigError, SimConfig


class MaskedActionError(ValueError):
    """An action forbidden by the current mask was submitted."""


class EpisodeOver(RuntimeError):
    """step() called after termination/truncation without reset()."""


@dataclass
class VehicleState:
    vid: int
    kind: str                 # "ego" | "car" | "truck"
    x: float                  # front bumper, m
    y: float                  # body center, lateral, m
    lane: int
    v: float
    length: float
    width: float
    v_max: float
    lc_dir: int = 0           # 0 idle, +1 changing left, -1 right
    lc_elapsed: float = 0.0
    lc_target_y: float = 0.0
    lc_cooldown: float = math.inf  # time since last completed change

    def begin_lane_change(self, direction: int, w_lane: float) -> None:
        self.lc_dir = direction
        self.lc_elapsed = 0.0
        self.lc_target_y = (self.lane + direction) * w_lane

    @property
    def rear(self) -> float:
        return self.x - self.length

    @property
    def indicator_left(self) -> bool:
        return self.lc_dir > 0

    @property
    def indicator_right(self) -> bool:
        return self.lc_dir < 0


@dataclass
class Observation:
    features: np.ndarray      # fixed-length, roughly [-1, 1]
    mask: np.ndarray          # uint8[8], 1 = feasible


@dataclass
class StepResult:
    obs: Observation
    reward: np.ndarray        # [safety, driver, energy]
    terminated: bool
    truncated: bool
    info: dict


def observation_dim(config: SimConfig) -> int:
    return 9 + 9 * config.max_sensed + config.max_sensed


def _bodies_overlap_laterally(a: VehicleState, b: VehicleState) -> bool:
    return abs(a.y - b.y) < (a.width + b.width) / 2.0


def _occupies_lane(veh: VehicleState, lane: int, w_lane: float) -> bool:
    lo, hi = lane * w_lane - w_lane / 2.0, lane * w_lane + w_lane / 2.0
    return veh.y + veh.width / 2.0 > lo and veh.y - veh.width / 2.0 < hi


def _plans_lane(veh: VehicleState, lane: int, w_lane: float) -> bool:
    """Occupies the lane band now, or is mid-maneuver and sweeping into it.

    Planning against only instantaneous occupancy lets two vehicles start
    converging changes into the same band from opposite sides; counting a
    migrating vehicle's destination closes that race.
    """
    if _occupies_lane(veh, lane, w_lane):
        return True
    return bool(veh.lc_dir) and lane == int(round(veh.lc_target_y / w_lane))


class HighwayEnv:
    """Single-agent MOMDP over the microsimulation; not thread-safe."""

    def __init__(self, config: SimConfig, record_trace: bool = False):
        self.cfg = config
        self.record_trace = record_trace
        self.trace: list[tuple] = []
        self._done = True

    # ------------------------------------------------------------------ setup

    def reset(self, seed: int) -> Observation:
        cfg = self.cfg
        self.rng = np.random.default_rng(seed)
        self.ego = VehicleState(
            vid=0, kind="ego", x=0.0, y=0.0, lane=0,
            v=cfg.ego_start_speed, length=cfg.ego_length, width=cfg.ego_width,
            v_max=cfg.ego_max_speed,
        )
        self.v0 = cfg.ego_start_v0
        self.t_gap = cfg.ego_start_gap
        self._next_id = 1
        self.vehicles: list[VehicleState] = []
        self._deferred: list[tuple[str, float, int]] = []  # (kind, speed, side)
        self._spawn_initial_traffic()
        self.steps = 0
        self.sim_time = 0.0
        self.total_energy_kwh = 0.0
        self.trace = []
        self._done = False
        self._collided = False
        self._reached = False
        self._mask, self._mask_diag = self._compute_mask()
        return self._build_observation()

    def _sample_speed(self, kind: str) -> float:
        cfg = self.cfg
        mean, std = ((cfg.truck_speed_mean, cfg.truck_speed_std) if kind == "truck"
                     else (cfg.car_speed_mean, cfg.car_speed_std))
        for _ in range(1000):
            s = self.rng.normal(mean, std)
            if abs(s - mean) <= 3.0 * std and s >= cfg.min_traffic_speed:
                return float(s)
        return float(mean)

    def _dims(self, kind: str) -> tuple[float, float]:
        cfg = self.cfg
        if kind == "truck":
            return cfg.truck_length, cfg.truck_width
        return cfg.car_length, cfg.car_width

    def _accel_decel(self, kind: str) -> tuple[float, float]:
        cfg = self.cfg
        if kind == "truck":
            return cfg.truck_accel, cfg.truck_decel
        return cfg.car_accel, cfg.car_decel

    def _spawn_initial_traffic(self) -> None:
        cfg = self.cfg
        kinds = ["truck"] * cfg.truck_count + ["car"] * cfg.car_count
        if not kinds:
            return
        order = self.rng.permutation(len(kinds))
        half = cfg.l_window / 2.0
        for idx in order:
            kind = kinds[idx]
            length, width = self._dims(kind)
            speed = self._sample_speed(kind)
            placed = False
            for _ in range(400):
                lane = int(self.rng.integers(cfg.lane_count))
                x = float(self.rng.uniform(self.ego.x - half + length,
                                           self.ego.x + half))
                cand = VehicleState(
                    vid=self._next_id, kind=kind, x=x, y=lane * cfg.w_lane,
                    lane=lane, v=speed, length=length, width=width, v_max=speed)
                if self._insertion_safe(cand):
                    self.vehicles.append(cand)
                    self._next_id += 1
                    placed = True
                    break
            if not placed:
                raise ConfigError(
                    f"density {cfg.density} too high to place traffic without overlap")

    def _insertion_safe(self, cand: VehicleState) -> bool:
        """Safe to insert: nobody alongside and comfortable gaps both ways."""
        sp = self.cfg.safety
        for other in self._all_bodies():
            if other is cand or not _bodies_overlap_laterally(cand, other):
                continue
            if cand.x > other.rear and other.x > cand.rear:
                return False  # longitudinal overlap
            if other.x <= cand.rear:  # other behind candidate
                gap = cand.rear - other.x
                if gap < min_gap(other.v, other.v - cand.v, sp):
                    return False
            else:                      # other ahead
                gap = other.rear - cand.x
                if gap < min_gap(cand.v, cand.v - other.v, sp):
                    return False
        return True

    def _all_bodies(self) -> list[VehicleState]:
        return [self.ego, *self.vehicles]

    # ------------------------------------------------------------ gap queries

    def _body_leader(self, veh: VehicleState):
        """Nearest vehicle ahead whose body laterally overlaps ``veh``."""
        best, best_gap = None, math.inf
        for other in self._all_bodies():
            if other is veh or not _bodies_overlap_laterally(veh, other):
                continue
            if other.rear >= veh.x:
                gap = other.rear - veh.x
                if gap < best_gap:
                    best, best_gap = other, gap
        return best, best_gap

    def _band_neighbors(self, veh: VehicleState, lane: int):
        """(front, front_gap, rear, rear_gap, blocked) among current and
        incoming occupants of ``lane``'s band; blocked means someone is
        alongside ``veh``. Used for planning only, so a vehicle still
        migrating toward the band counts as present."""
        w_lane = self.cfg.w_lane
        front, front_gap = None, math.inf
        rear, rear_gap = None, math.inf
        blocked = False
        for other in self._all_bodies():
            if other is veh or not _plans_lane(other, lane, w_lane):
                continue
            if veh.x > other.rear and other.x > veh.rear:
                blocked = True
                continue
            if other.rear >= veh.x:
                gap = other.rear - veh.x
                if gap < front_gap:
                    front, front_gap = other, gap
            else:
                gap = veh.rear - other.x
                if gap < rear_gap:
                    rear, rear_gap = other, gap
        return front, front_gap, rear, rear_gap, blocked

    # ------------------------------------------------------------------- mask

    def _lane_change_check(self, direction: int):
        """(admissible, margins-or-None) for an ego change in ``direction``."""
        target = self.ego.lane + direction
        if not 0 <= target < self.cfg.lane_count:
            return False, None
        front_cur, gap_cur, _, _, _ = self._band_neighbors(self.ego, self.ego.lane)
        front_tar, gap_tar, rear_tar, rear_gap, blocked = \
            self._band_neighbors(self.ego, target)
        if blocked:
            return False, None
        gaps = GapObservation(
            ego_speed=self.ego.v,
            ego_width=self.ego.width,
            front_gap_current=gap_cur,
            front_rel_speed_current=(front_cur.v - self.ego.v) if front_cur else 0.0,
            front_gap_target=gap_tar,
            front_rel_speed_target=(front_tar.v - self.ego.v) if front_tar else 0.0,
            rear_gap_target=rear_gap,
            rear_speed_target=rear_tar.v if rear_tar else 0.0,
        )
        return lane_change_safe(gaps, self.cfg.safety)

    def _compute_mask(self):
        mask = np.ones(NUM_ACTIONS, dtype=np.uint8)
        diag = {}
        if self.v0 >= self.cfg.ego_max_speed:
            mask[ACTION_SPEED_UP] = 0
        if self.v0 <= 0.0:
            mask[ACTION_SLOW_DOWN] = 0
        ok_left, diag["left"] = self._lane_change_check(+1)
        ok_right, diag["right"] = self._lane_change_check(-1)
        mask[ACTION_LANE_LEFT] = 1 if ok_left else 0
        mask[ACTION_LANE_RIGHT] = 1 if ok_right else 0
        return mask, diag

    def action_mask(self) -> np.ndarray:
        return self._mask.copy()

    # ------------------------------------------------------------------- step

    def step(self, action: int) -> StepResult:
        if self._done:
            raise EpisodeOver("episode finished; call reset()")
        if not 0 <= action < NUM_ACTIONS:
            raise MaskedActionError(f"action {action} out of range")
        if not self._mask[action]:
            raise MaskedActionError(f"action {action} is masked in this state")

        cfg = self.cfg
        if action == ACTION_GAP_SHORT:
            self.t_gap = 1.0
        elif action == ACTION_GAP_MEDIUM:
            self.t_gap = 2.0
        elif action == ACTION_GAP_LONG:
            self.t_gap = 3.0
        elif action == ACTION_SPEED_UP:
            self.v0 = min(cfg.ego_max_speed, self.v0 + 1.0)
        elif action == ACTION_SLOW_DOWN:
            self.v0 = max(0.0, self.v0 - 1.0)
        elif action == ACTION_LANE_LEFT:
            self.ego.begin_lane_change(+1, cfg.w_lane)
        elif action == ACTION_LANE_RIGHT:
            self.ego.begin_lane_change(-1, cfg.w_lane)

        lateral = action in (ACTION_LANE_LEFT, ACTION_LANE_RIGHT)
        dt_total = (cfg.w_lane / cfg.v_lat) if lateral else 1.0
        n_sub = int(round(dt_total / cfg.substep))
        x_start = self.ego.x
        energy = 0.0
        collided = reached = False

        for _ in range(n_sub):
            energy += self._substep_ego()
            self._substep_traffic()
            self._moving_window_respawn()
            self.sim_time += cfg.substep
            if self.record_trace:
                self._record_substep()
            if self._check_collision():
                collided = True
                break
            if self.ego.x >= cfg.l_road:
                reached = True
                break

        self.steps += 1
        self.total_energy_kwh += energy
        terminated = collided or reached
        truncated = (not terminated) and self.steps >= cfg.max_steps
        self._done = terminated or truncated
        self._collided, self._reached = collided, reached
        reward = dynamics.reward_vector(collided, reached, dt_total, energy)
        self._mask, self._mask_diag = self._compute_mask()
        obs = self._build_observation()
        info = {
            "dt": dt_total,
            "energy_kwh": energy,
            "distance": self.ego.x - x_start,
            "collision": collided,
            "reached_target": reached,
            "speed": self.ego.v,
            "desired_speed": self.v0,
            "desired_gap": self.t_gap,
            "lane": self.ego.lane,
            "sim_time": self.sim_time,
            "safety_diagnostics": self._mask_diag,
        }
        return StepResult(obs, reward, terminated, truncated, info)

    # --------------------------------------------------------------- substeps

    def _advance_lateral(self, veh: VehicleState, dt: float) -> None:
        cfg = self.cfg
        if not veh.lc_dir:
            veh.lc_cooldown += dt
            return
        veh.lc_elapsed += dt
        veh.y += veh.lc_dir * cfg.v_lat * dt
        done = (veh.y >= veh.lc_target_y) if veh.lc_dir > 0 else (veh.y <= veh.lc_target_y)
        veh.lane = int(np.clip(round(veh.y / cfg.w_lane), 0, cfg.lane_count - 1))
        if done:
            veh.y = veh.lc_target_y
            veh.lane = int(round(veh.lc_target_y / cfg.w_lane))
            veh.lc_dir = 0
            veh.lc_cooldown = 0.0

    def _substep_ego(self) -> float:
        cfg = self.cfg
        dt = cfg.substep
        leader, gap = self._body_leader(self.ego)
        dv = (self.ego.v - leader.v) if leader else 0.0
        if self.v0 <= 0.0:
            # commanded standstill; IDM is singular at v0 = 0
            accel = -cfg.idm_b if self.ego.v > 0.0 else 0.0
        else:
            accel = dynamics.idm_accel(
                self.ego.v, self.v0, self.t_gap,
                max(gap, 1e-6) if leader else math.inf, dv,
                a=cfg.ego_accel, b=cfg.idm_b, s0=cfg.idm_s0,
                delta=cfg.idm_delta, decel_limit=cfg.ego_decel)
        v_old = self.ego.v
        v_new = float(np.clip(v_old + accel * dt, 0.0, cfg.ego_max_speed))
        a_actual = (v_new - v_old) / dt
        used = dynamics.energy_step(cfg.energy, a_actual, v_old, dt)
        self.ego.x += 0.5 * (v_old + v_new) * dt
        self.ego.v = v_new
        self.ego._last_accel = a_actual  # type: ignore[attr-defined]
        self._advance_lateral(self.ego, dt)
        return used

    def _substep_traffic(self) -> None:
        cfg = self.cfg
        dt = cfg.substep
        for veh in self.vehicles:
            self._maybe_start_traffic_lane_change(veh)
            leader, gap = self._body_leader(veh)
            a, b = self._accel_decel(veh.kind)
            eta = float(self.rng.random())
            v_new = dynamics.krauss_speed(
                veh.v, veh.v_max, a, b, cfg.krauss_tau,
                gap if leader else math.inf, leader.v if leader else 0.0,
                dt, sigma=cfg.krauss_sigma, eta=eta)
            veh._last_accel = (v_new - veh.v) / dt  # type: ignore[attr-defined]
            veh.x += 0.5 * (veh.v + v_new) * dt
            veh.v = v_new
            self._advance_lateral(veh, dt)

    def _maybe_start_traffic_lane_change(self, veh: VehicleState) -> None:
        cfg = self.cfg
        if veh.lc_dir or veh.lc_cooldown < cfg.traffic_lc_cooldown:
            return
        leader, _ = self._body_leader(veh)
        if leader is None or leader.v >= veh.v_max - cfg.traffic_lc_speed_deficit:
            return
        sp = cfg.safety
        for direction in (+1, -1):  # overtake on the left when possible
            target = veh.lane + direction
            if not 0 <= target < cfg.lane_count:
                continue
            front, fgap, rear, rgap, blocked = self._band_neighbors(veh, target)
            if blocked:
                continue
            if front and fgap < min_gap(veh.v, veh.v - front.v, sp):
                continue
            if rear and rgap < min_gap(rear.v, rear.v - veh.v, sp):
                continue
            veh.begin_lane_change(direction, cfg.w_lane)
            return

    # ---------------------------------------------------------- moving window

    def _moving_window_respawn(self) -> None:
        cfg = self.cfg
        half = cfg.l_window / 2.0
        kept: list[VehicleState] = []
        for veh in self.vehicles:
            if veh.x < self.ego.x - half:
                self._deferred.append((veh.kind, self._sample_speed(veh.kind), +1))
            elif veh.rear > self.ego.x + half:
                self._deferred.append((veh.kind, self._sample_speed(veh.kind), -1))
            else:
                kept.append(veh)
        self.vehicles = kept
        still_deferred: list[tuple[str, float, int]] = []
        for kind, speed, side in self._deferred:
            if not self._try_respawn(kind, speed, side):
                still_deferred.append((kind, speed, side))
        self._deferred = still_deferred

    def _try_respawn(self, kind: str, speed: float, side: int) -> bool:
        cfg = self.cfg
        half = cfg.l_window / 2.0
        length, width = self._dims(kind)
        x = self.ego.x + half if side > 0 else self.ego.x - half + length
        for lane in self.rng.permutation(cfg.lane_count):
            cand = VehicleState(
                vid=self._next_id, kind=kind, x=float(x), y=int(lane) * cfg.w_lane,
                lane=int(lane), v=speed, length=length, width=width, v_max=speed)
            if self._insertion_safe(cand):
                self.vehicles.append(cand)
                self._next_id += 1
                return True
        return False

    # ------------------------------------------------------------- bookkeeping

    def _check_collision(self) -> bool:
        ego = self.ego
        for veh in self.vehicles:
            if (ego.x > veh.rear and veh.x > ego.rear
                    and _bodies_overlap_laterally(ego, veh)):
                return True
        return False

    def _record_substep(self) -> None:
        for veh in self._all_bodies():
            self.trace.append((
                round(self.sim_time, 4), veh.vid, veh.lane,
                veh.x, veh.v, getattr(veh, "_last_accel", 0.0)))

    # ------------------------------------------------------------ observation

    def _lc_state(self, veh: VehicleState) -> float:
        if not veh.lc_dir:
            return 0.0
        t_lc = self.cfg.w_lane / self.cfg.v_lat
        return veh.lc_dir * min(1.0, veh.lc_elapsed / t_lc)

    def _build_observation(self) -> Observation:
        cfg = self.cfg
        half = cfg.l_window / 2.0
        lane_span = cfg.lane_count * cfg.w_lane
        v_scale = cfg.ego_max_speed
        ego = self.ego
        _, lead_gap = self._body_leader(ego)
        lead_feature = min(lead_gap, half) / half if math.isfinite(lead_gap) else 1.0
        features = np.zeros(observation_dim(cfg))
        features[0:9] = (
            ego.x / cfg.l_road,
            ego.v / v_scale,
            self._lc_state(ego),
            float(ego.indicator_left),
            float(ego.indicator_right),
            ego.lane / (cfg.lane_count - 1),
            ego.length / v_scale,
            ego.width / v_scale,
            lead_feature,
        )
        ranked = sorted(self.vehicles, key=lambda v: (abs(v.x - ego.x), v.vid))
        flags_base = 9 + 9 * cfg.max_sensed
        for slot, veh in enumerate(ranked[: cfg.max_sensed]):
            base = 9 + 9 * slot
            features[base: base + 9] = (
                (veh.x - ego.x) / half,
                (veh.y - ego.y) / lane_span,
                (veh.v - ego.v) / v_scale,
                self._lc_state(veh),
                veh.lane / (cfg.lane_count - 1),
                float(veh.indicator_left),
                float(veh.indicator_right),
                veh.length / v_scale,
                veh.width / v_scale,
            )
            features[flags_base + slot] = 1.0
        return Observation(features=features, mask=self._mask.copy())
