import math

import numpy as np
import pytest

from paretodrive import (
    ACTION_GAP_SHORT,
    ACTION_LANE_LEFT,
    ACTION_LANE_RIGHT,
    ACTION_MAINTAIN,
    ACTION_SLOW_DOWN,
    ACTION_SPEED_UP,
)
from paretodrive.sim import (
    ConfigError,
    EpisodeOver,
    HighwayEnv,
    MaskedActionError,
    SimConfig,
    VehicleState,
    observation_dim,
    sim_config_from_mapping,
)

ZERO = SimConfig(density=0.0)
LIGHT = SimConfig(density=0.015)
MEDIUM = SimConfig(density=0.03)


def drive(env, actions, seed=0):
    env.reset(seed)
    results = []
    for a in actions:
        results.append(env.step(a))
        if results[-1].terminated or results[-1].truncated:
            break
    return results


# ----------------------------------------------------------------- population

def test_zero_density_spawns_nothing():
    env = HighwayEnv(ZERO)
    obs = env.reset(3)
    assert len(env.vehicles) == 0
    flags = obs.features[9 + 9 * ZERO.max_sensed:]
    assert np.all(flags == 0.0)
    assert obs.features.shape == (observation_dim(ZERO),)
    assert observation_dim(ZERO) == 9 + 9 * 15 + 15


def test_light_density_is_six_cars_one_truck():
    assert LIGHT.vehicle_count == 7
    assert LIGHT.truck_count == 1 and LIGHT.car_count == 6
    env = HighwayEnv(LIGHT)
    env.reset(5)
    kinds = sorted(v.kind for v in env.vehicles)
    assert kinds == ["car"] * 6 + ["truck"]


def test_medium_density_is_eleven_cars_two_trucks():
    assert MEDIUM.vehicle_count == 13
    assert MEDIUM.truck_count == 2 and MEDIUM.car_count == 11
    env = HighwayEnv(MEDIUM)
    env.reset(5)
    kinds = [v.kind for v in env.vehicles]
    assert len(kinds) == 13
    assert kinds.count("truck") == 2 and kinds.count("car") == 11


def test_initial_traffic_has_safe_gaps_and_no_overlap():
    env = HighwayEnv(MEDIUM)
    for seed in range(5):
        env.reset(seed)
        bodies = env._all_bodies()
        for i, a in enumerate(bodies):
            for b in bodies[i + 1:]:
                same_band = abs(a.y - b.y) < (a.width + b.width) / 2
                overlap = a.x > b.rear and b.x > a.rear
                assert not (same_band and overlap)


# -------------------------------------------------------------------- rewards

def test_maintain_at_equilibrium_keeps_speed_and_prices_the_second():
    env = HighwayEnv(ZERO)
    env.reset(0)
    r = env.step(ACTION_MAINTAIN)
    assert r.info["speed"] == pytest.approx(20.0, abs=1e-12)
    assert r.reward[0] == 0.0
    assert r.reward[1] == pytest.approx(-50.0 / 3600.0, abs=1e-12)
    # cruise energy at 20 m/s over 1 s costs 0.5 euro/kWh * 0.022388 kWh
    assert r.reward[2] == pytest.approx(-0.5 * 0.022388, abs=1e-6)
    assert r.info["dt"] == 1.0


def test_lane_change_takes_four_seconds():
    env = HighwayEnv(ZERO)
    env.reset(0)
    r = env.step(ACTION_LANE_LEFT)
    assert r.info["dt"] == 4.0
    assert r.reward[1] == pytest.approx(-0.055556, abs=1e-6)
    assert env.ego.lane == 1
    assert env.ego.y == pytest.approx(3.2)
    assert env.ego.lc_dir == 0


def test_target_bonus_on_reaching_road_end():
    cfg = SimConfig(density=0.0, l_road=500.0, l_window=400.0)
    env = HighwayEnv(cfg)
    env.reset(0)
    for _ in range(40):
        r = env.step(ACTION_MAINTAIN)
        if r.terminated:
            break
    assert r.terminated and not r.truncated
    assert r.info["reached_target"]
    assert r.reward[0] == pytest.approx(4.41)


def test_truncation_at_step_limit():
    cfg = SimConfig(density=0.0, max_steps=5)
    env = HighwayEnv(cfg)
    env.reset(0)
    for i in range(5):
        r = env.step(ACTION_MAINTAIN)
    assert r.truncated and not r.terminated
    with pytest.raises(EpisodeOver):
        env.step(ACTION_MAINTAIN)


def test_collision_with_unavoidable_obstacle():
    env = HighwayEnv(ZERO)
    env.reset(0)
    # parked vehicle 15 m ahead: stopping from 20 m/s at 6 m/s^2 needs 33 m
    env.vehicles.append(VehicleState(
        vid=99, kind="car", x=env.ego.x + 5.0 + 15.0, y=0.0, lane=0,
        v=0.0, length=5.0, width=1.8, v_max=0.0))
    r = env.step(ACTION_MAINTAIN)
    assert r.terminated
    assert r.info["collision"]
    assert r.reward[0] == pytest.approx(-1000.0)


def test_driver_and_energy_accounting_identities():
    env = HighwayEnv(LIGHT)
    env.reset(11)
    rng = np.random.default_rng(0)
    total_dt, total_kwh, rewards = 0.0, 0.0, []
    for _ in range(60):
        mask = env.action_mask()
        action = int(rng.choice(np.flatnonzero(mask)))
        r = env.step(action)
        total_dt += r.info["dt"]
        total_kwh += r.info["energy_kwh"]
        rewards.append(r.reward)
        if r.terminated or r.truncated:
            break
    rewards = np.array(rewards)
    assert rewards[:, 1].sum() == pytest.approx(-50.0 * total_dt / 3600.0, abs=1e-12)
    assert rewards[:, 2].sum() == pytest.approx(-0.5 * total_kwh, rel=1e-12)
    assert total_kwh == pytest.approx(env.total_energy_kwh)


# ---------------------------------------------------------------------- masks

def test_initial_mask_blocks_only_right_change():
    env = HighwayEnv(ZERO)
    obs = env.reset(0)
    assert obs.mask[ACTION_LANE_RIGHT] == 0  # already on the rightmost lane
    assert obs.mask.sum() == 7


def test_middle_lane_zero_traffic_all_actions_valid():
    env = HighwayEnv(ZERO)
    env.reset(0)
    r = env.step(ACTION_LANE_LEFT)
    assert env.ego.lane == 1
    assert np.all(r.obs.mask == 1)


def test_leftmost_lane_blocks_left_change():
    env = HighwayEnv(ZERO)
    env.reset(0)
    env.step(ACTION_LANE_LEFT)
    r = env.step(ACTION_LANE_LEFT)
    assert env.ego.lane == 2
    assert r.obs.mask[ACTION_LANE_LEFT] == 0


def test_speed_bounds_mask_speed_actions():
    env = HighwayEnv(ZERO)
    env.reset(0)
    for _ in range(5):
        r = env.step(ACTION_SPEED_UP)
    assert env.v0 == 25.0
    assert r.obs.mask[ACTION_SPEED_UP] == 0
    env.reset(0)
    for _ in range(20):
        r = env.step(ACTION_SLOW_DOWN)
    assert env.v0 == 0.0
    assert r.obs.mask[ACTION_SLOW_DOWN] == 0
    # commanded standstill still prices time and allows recovery
    r = env.step(ACTION_SPEED_UP)
    assert env.v0 == 1.0


def test_masked_action_rejected():
    env = HighwayEnv(ZERO)
    env.reset(0)
    with pytest.raises(MaskedActionError):
        env.step(ACTION_LANE_RIGHT)
    with pytest.raises(MaskedActionError):
        env.step(42)


def test_unsafe_lane_change_is_masked():
    env = HighwayEnv(ZERO)
    env.reset(0)
    # fast vehicle closing in the target lane right behind the ego
    env.vehicles.append(VehicleState(
        vid=99, kind="car", x=env.ego.rear - 4.0, y=3.2, lane=1,
        v=25.0, length=5.0, width=1.8, v_max=30.0))
    env._mask, env._mask_diag = env._compute_mask()
    assert env.action_mask()[ACTION_LANE_LEFT] == 0
    assert env._mask_diag["left"]["rear_braking"] < 0 or \
        env._mask_diag["left"]["rear_gap"] < 0


def test_vehicle_alongside_blocks_lane_change():
    env = HighwayEnv(ZERO)
    env.reset(0)
    env.vehicles.append(VehicleState(
        vid=99, kind="car", x=env.ego.x - 2.0, y=3.2, lane=1,
        v=20.0, length=5.0, width=1.8, v_max=25.0))
    env._mask, env._mask_diag = env._compute_mask()
    assert env.action_mask()[ACTION_LANE_LEFT] == 0
    assert env._mask_diag["left"] is None


# ----------------------------------------------------------- window mechanics

def test_vehicle_dropping_behind_window_reappears_ahead():
    env = HighwayEnv(ZERO)
    env.reset(0)
    env.vehicles.append(VehicleState(
        vid=99, kind="car", x=env.ego.x - 201.0, y=0.0, lane=0,
        v=10.0, length=5.0, width=1.8, v_max=25.0))
    env._moving_window_respawn()
    assert len(env.vehicles) == 1
    fresh = env.vehicles[0]
    assert fresh.vid != 99
    assert fresh.x == pytest.approx(env.ego.x + 200.0)


def test_vehicle_count_conserved_over_long_run():
    env = HighwayEnv(MEDIUM)
    env.reset(21)
    rng = np.random.default_rng(1)
    for _ in range(100):
        action = int(rng.choice(np.flatnonzero(env.action_mask())))
        r = env.step(action)
        in_window = len(env.vehicles)
        assert in_window + len(env._deferred) == 13
        assert in_window <= 13
        half = MEDIUM.l_window / 2
        for v in env.vehicles:
            assert env.ego.x - half <= v.x and v.rear <= env.ego.x + half
        if r.terminated or r.truncated:
            break


# --------------------------------------------------------------- trajectories

def test_kinematic_consistency_on_trace():
    env = HighwayEnv(LIGHT, record_trace=True)
    env.reset(9)
    for a in (ACTION_MAINTAIN, ACTION_SPEED_UP, ACTION_LANE_LEFT, ACTION_MAINTAIN):
        env.step(a)
    rows = {}
    for t, vid, lane, x, v, a in env.trace:
        if vid in rows:
            t0, x0, v0 = rows[vid]
            if abs(t - t0 - 0.1) < 1e-9:  # consecutive substeps, same vehicle
                assert x - x0 == pytest.approx(0.5 * (v0 + v) * 0.1, abs=1e-9)
        rows[vid] = (t, x, v)
    assert len(env.trace) > 0


def test_speed_limits_respected():
    env = HighwayEnv(MEDIUM)
    env.reset(2)
    rng = np.random.default_rng(3)
    for _ in range(50):
        action = int(rng.choice(np.flatnonzero(env.action_mask())))
        r = env.step(action)
        assert 0.0 <= env.ego.v <= 25.0 + 1e-12
        for v in env.vehicles:
            assert 0.0 <= v.v <= v.v_max + 1e-12
        if r.terminated or r.truncated:
            break


def test_idm_never_rear_ends_a_slow_leader():
    env = HighwayEnv(ZERO)
    env.reset(0)
    env.vehicles.append(VehicleState(
        vid=50, kind="truck", x=env.ego.x + 12.0 + 40.0, y=0.0, lane=0,
        v=8.0, length=12.0, width=2.55, v_max=8.0))
    min_gap_seen = math.inf
    for _ in range(100):
        r = env.step(ACTION_GAP_SHORT if env.steps == 0 else ACTION_MAINTAIN)
        gap = env.vehicles[0].rear - env.ego.x
        min_gap_seen = min(min_gap_seen, gap)
        assert not r.terminated
    assert min_gap_seen > 0.0
    # settles close to the IDM equilibrium gap s0 + v*T at v = 8
    assert env.ego.v == pytest.approx(8.0, abs=0.2)


def test_determinism_same_seed_same_trajectory():
    def run(seed):
        env = HighwayEnv(MEDIUM)
        env.reset(seed)
        rng = np.random.default_rng(77)
        log = []
        for _ in range(40):
            action = int(rng.choice(np.flatnonzero(env.action_mask())))
            r = env.step(action)
            log.append((action, env.ego.x, env.ego.v, tuple(r.reward),
                        tuple(v.x for v in env.vehicles)))
            if r.terminated or r.truncated:
                break
        return log

    a, b = run(123), run(123)
    assert a == b
    assert run(124) != a


# ---------------------------------------------------------------- observation

def test_observation_layout_and_normalization():
    env = HighwayEnv(MEDIUM)
    obs = env.reset(4)
    f = obs.features
    assert f.shape == (159,)
    assert f[0] == pytest.approx(0.0)              # start of road
    assert f[1] == pytest.approx(20.0 / 25.0)      # speed
    assert f[5] == 0.0                             # rightmost lane
    assert np.all(np.abs(f) <= 1.5)
    flags = f[9 + 9 * 15:]
    assert flags.sum() == 13
    # nearest-first ordering by |relative longitudinal distance|
    rel = [abs(f[9 + 9 * k]) for k in range(13)]
    assert rel == sorted(rel)


def test_no_collisions_initiated_by_ego_lane_changes():
    """100 random-policy episodes in medium traffic: the filter must keep
    every admitted lane change collision-free (collisions on longitudinal
    steps, if any, are not the filter's responsibility)."""
    env = HighwayEnv(MEDIUM)
    lc_collisions = 0
    for seed in range(100):
        env.reset(seed)
        rng = np.random.default_rng(10_000 + seed)
        while True:
            action = int(rng.choice(np.flatnonzero(env.action_mask())))
            r = env.step(action)
            if r.info["collision"] and action in (ACTION_LANE_LEFT, ACTION_LANE_RIGHT):
                lc_collisions += 1
            if r.terminated or r.truncated:
                break
    assert lc_collisions == 0


def test_config_parsing_from_strings():
    cfg = sim_config_from_mapping(
        {"density": "0.015", "max_steps": "100", "l_road": "1000"},
        energy={"mass": "40000"},
        safety={"b_safe": "2.5"},
    )
    assert cfg.density == 0.015
    assert cfg.max_steps == 100
    assert cfg.energy.mass == 40000.0
    assert cfg.safety.b_safe == 2.5
    with pytest.raises(ConfigError):
        sim_config_from_mapping({"no_such_key": "1"})
    with pytest.raises(ConfigError):
        sim_config_from_mapping({"density": "fast"})
    with pytest.raises(ConfigError):
        SimConfig(lane_count=1)
