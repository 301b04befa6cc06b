"""Quick self-contained oracle checks, printable as PASS/FAIL lines.

Every check re-derives its expected value independently (hand arithmetic,
brute-force sums, finite differences, grid scans) so a silent numerical
regression in the library shows up as a FAIL without needing the full
test suite.
"""

from __future__ import annotations

import sys

import numpy as np

from ..gpils.ccs import CcsState, grid_max_scalarized, remove_dominated
from ..gpils.corners import corner_weights
from ..moppo.rollout import RolloutBuffer, compute_gae
from ..moppo.update import MoppoConfig, _minibatch_loss
from ..nn import tape
from ..nn.network import NetworkSpec, as_vars, init_params
from ..safety import ABSENT, GapObservation, SafetyParams, lane_change_safe
from ..sim.config import EnergyParams
from ..sim.dynamics import energy_step
from .baseline import analytic_cost_per_meter, analytic_optimum
from .hypervolume import hypervolume


def _check_cost_model():
    # hand formula at v = 20: driver 50/(3600*20), energy tariff applied to
    # 0.5*6.0*1.2*400 + 44000*9.81*0.006 joules per metre
    hand = 50.0 / (3600.0 * 20.0) + (0.5 / 3.6e6) * (
        0.5 * 6.0 * 1.2 * 400.0 + 44000.0 * 9.81 * 0.006)
    got = analytic_cost_per_meter(20.0)
    assert abs(got - hand) < 1e-15, f"cost/m at 20 m/s: {got} vs hand {hand}"


def _check_baseline_optimum():
    res = analytic_optimum()
    assert abs(res.optimal_speed - 24.04) < 0.01, f"v* = {res.optimal_speed}"
    assert abs(res.minimal_cost - 3.68) < 0.01, f"cost = {res.minimal_cost}"


def _check_energy_step():
    got = energy_step(EnergyParams(), 0.0, 20.0, 1.0)
    assert abs(got - 0.022388) < 1e-6, f"cruise energy {got} kWh"


def _check_corner_weights():
    two = corner_weights(np.array([[1.0, 0.0], [0.0, 1.0]]))
    expect = {(1.0, 0.0), (0.0, 1.0), (0.5, 0.5)}
    got = {tuple(np.round(w, 9)) for w in two}
    assert got == expect, f"2-vector corners {sorted(got)}"
    three = corner_weights(np.eye(3))
    assert len(three) == 7, f"eye(3) corner count {len(three)}"


def _check_gae_brute_force():
    rng = np.random.default_rng(3)
    n, d, gamma, lam = 6, 3, 0.97, 0.9
    buf = RolloutBuffer(
        obs=np.zeros((n, 1)), actions=np.zeros(n, dtype=int),
        log_probs=np.zeros(n), rewards=rng.standard_normal((n, d)),
        terminal=np.zeros(n, dtype=bool), cut=np.zeros(n, dtype=bool),
        values=rng.standard_normal((n, d)), weights=np.zeros((n, d)),
        masks=np.ones((n, 2), dtype=np.uint8),
        bootstrap=rng.standard_normal((n, d)))
    buf.terminal[2] = True
    buf.cut[n - 1] = True
    compute_gae(buf, gamma, lam)
    # literal definition: A_t = sum_l (gamma*lam)^l delta_{t+l} within segment
    segments = [(0, 2, "terminal"), (3, 5, "cut")]
    for lo, hi, kind in segments:
        for t in range(lo, hi + 1):
            total = np.zeros(d)
            for l in range(t, hi + 1):
                if l == hi:
                    nxt = np.zeros(d) if kind == "terminal" else buf.bootstrap[l]
                else:
                    nxt = buf.values[l + 1]
                delta = buf.rewards[l] + gamma * nxt - buf.values[l]
                total += (gamma * lam) ** (l - t) * delta
            err = np.max(np.abs(buf.advantages[t] - total))
            assert err < 1e-12, f"GAE mismatch at t={t}: {err}"


def _check_safety_filter():
    params = SafetyParams()
    ok, margins = lane_change_safe(
        GapObservation(ego_speed=20.0, ego_width=2.55), params)
    assert ok and all(m == ABSENT for m in margins.values()), "empty road"
    ok, margins = lane_change_safe(
        GapObservation(ego_speed=20.0, ego_width=2.55,
                       rear_gap_target=6.0, rear_speed_target=25.0), params)
    a_req = 3.0 - margins["rear_braking"]
    assert not ok and abs(a_req - 6.30) < 0.01, f"rear braking a_req {a_req}"


def _check_pruning():
    rng = np.random.default_rng(11)
    spec = NetworkSpec(obs_dim=2, weight_dim=3, num_actions=2,
                       obs_layers=(4,), weight_layers=(4,))
    state = CcsState(spec)
    for i in range(8):
        w = np.abs(rng.standard_normal(3))
        w /= w.sum()
        state.register(w, rng.standard_normal(3), init_params(spec), (1,), 0)
    pruned = remove_dominated(state, resolution=40)
    grid, before = grid_max_scalarized(state.values, 40)
    _, after = grid_max_scalarized(pruned.values, 40)
    worst = float(np.max(np.abs(before - after)))
    assert worst < 1e-12, f"pruning changed a grid maximum by {worst}"


def _check_gradient():
    spec = NetworkSpec(obs_dim=5, weight_dim=3, num_actions=4,
                       obs_layers=(4,), weight_layers=(4,),
                       dtype="float64", init_seed=11)
    rng = np.random.default_rng(5)
    params = init_params(spec)
    n = 4
    obs = rng.standard_normal((n, spec.obs_dim))
    actions = rng.integers(0, spec.num_actions, size=n)
    logp_old = -np.abs(rng.standard_normal(n)) - 0.3
    adv = rng.standard_normal((n, 3))
    returns = rng.standard_normal((n, 3))
    weights = np.abs(rng.standard_normal((n, 3)))
    weights /= weights.sum(axis=1, keepdims=True)
    masks = np.ones((n, spec.num_actions), dtype=np.uint8)
    masks[0, 2] = 0
    batch = (obs, actions, logp_old, adv, returns, weights, masks)
    cfg = MoppoConfig(n_steps=n, minibatch=n, epochs=1)

    pv = as_vars(params)
    total, *_ = _minibatch_loss(pv, spec, batch, cfg)
    tape.backward(total)

    def loss_at(p):
        t, *_ = _minibatch_loss(as_vars(p), spec, batch, cfg)
        return float(t.data)

    h, checked, worst = 1e-5, 0, 0.0
    for name, arr in params.items():
        flat_idx = rng.choice(arr.size, size=min(3, arr.size), replace=False)
        for i in flat_idx:
            orig = arr.flat[i]
            arr.flat[i] = orig + h
            up = loss_at(params)
            arr.flat[i] = orig - h
            down = loss_at(params)
            arr.flat[i] = orig
            numeric = (up - down) / (2 * h)
            analytic = pv[name].grad.flat[i]
            # floor at 1e-4: entries below the finite-difference noise
            # scale of an O(1) loss are compared absolutely
            scale = max(abs(numeric), abs(analytic), 1e-4)
            worst = max(worst, abs(numeric - analytic) / scale)
            checked += 1
    assert worst < 1e-4, f"gradient rel err {worst} over {checked} coords"


def _check_hypervolume():
    one = hypervolume([(1.0, 1.0)], (0.0, 0.0))
    assert abs(one - 1.0) < 1e-12, f"unit square {one}"
    # two staircase points: 2x1 plus the 1x1 strip above
    stair = hypervolume([(2.0, 1.0), (1.0, 2.0)], (0.0, 0.0))
    assert abs(stair - 3.0) < 1e-12, f"staircase {stair}"


CHECKS = (
    ("cost model hand formula", _check_cost_model),
    ("baseline optimum 24.04 m/s at 3.68 euro", _check_baseline_optimum),
    ("cruise energy 0.022388 kWh", _check_energy_step),
    ("corner weight hand cases", _check_corner_weights),
    ("vector GAE vs brute-force sum", _check_gae_brute_force),
    ("safety filter hand cases", _check_safety_filter),
    ("pruning keeps grid maxima", _check_pruning),
    ("loss gradient vs finite differences", _check_gradient),
    ("hypervolume hand cases", _check_hypervolume),
)


def run_selftest(stream=None) -> int:
    """Run every check; print one PASS/FAIL line each; return failure count."""
    stream = stream or sys.stdout
    failures = 0
    for name, fn in CHECKS:
        try:
            fn()
        except Exception as exc:  # report and keep going
            failures += 1
            print(f"FAIL {name}: {exc}", file=stream)
        else:
            print(f"PASS {name}", file=stream)
    return failures
