"""Longitudinal dynamics, traction energy, and the step reward vector."""

from __future__ import annotations

import math

import numpy as np

from .config import EnergyParams

# reward constants (euros except the unitless safety term)
R_TARGET = 4.41
P_COLLISION = 1000.0
DRIVER_COST_PER_HOUR = 50.0
ELECTRICITY_COST_PER_KWH = 0.5
JOULES_PER_KWH = 3.6e6


def idm_accel(v: float, v0: float, t_gap: float, s_gap: float, dv: float,
              a: float, b: float, s0: float, delta: float = 4.0,
              decel_limit: float = 6.0) -> float:
    """Intelligent Driver Model acceleration, clamped to [-decel_limit, a].

    ``dv`` is the closing speed (ego minus leader); free flow is the
    ``s_gap = inf`` limit. ``s_gap`` is the net bumper-to-bumper distance
    and must be positive — contact is a collision handled upstream.
    """
    if v0 <= 0:
        raise ValueError("desired speed must be positive")
    if s_gap <= 0:
        raise ValueError("non-positive gap reached the controller")
    s_star = s0 + v * t_gap + v * dv / (2.0 * math.sqrt(a * b))
    raw = a * (1.0 - (v / v0) ** delta - (s_star / s_gap) ** 2)
    return float(np.clip(raw, -decel_limit, a))


def krauss_speed(v: float, v_max: float, a: float, b: float, tau: float,
                 gap: float, v_lead: float, dt: float,
                 sigma: float = 0.0, eta: float = 0.0) -> float:
    """Krauss-model speed for the next step.

    v_safe keeps the follower able to stop behind the leader given a
    reaction time tau; the "dawdling" term sigma*eta*a*dt (eta uniform in
    [0,1)) injects the model's stochastic imperfection. No leader is the
    ``gap = inf`` limit.
    """
    if math.isinf(gap):
        v_safe = math.inf
    else:
        v_safe = v_lead + (gap - v_lead * tau) / ((v + v_lead) / (2.0 * b) + tau)
    v_des = min(v + a * dt, v_safe, v_max)
    return max(0.0, v_des - sigma * eta * a * dt)


def traction_force(params: EnergyParams, accel: float, speed: float) -> float:
    """Inertia + aerodynamic drag + rolling resistance + grade, newtons."""
    return (params.mass * accel
            + 0.5 * params.drag_coeff * params.frontal_area * params.air_density * speed ** 2
            + params.mass * params.gravity * params.rolling_coeff
            + params.mass * params.gravity * math.sin(math.atan(params.slope / 100.0)))


def energy_step(params: EnergyParams, accel: float, speed: float, dt: float) -> float:
    """Traction energy over dt in kWh; braking draws nothing (no regen)."""
    if speed < 0:
        raise ValueError("negative speed")
    joules = traction_force(params, accel, speed) * speed * dt
    return max(0.0, joules) / JOULES_PER_KWH


def reward_vector(collided: bool, reached_target: bool, dt: float,
                  energy_kwh: float) -> np.ndarray:
    """[safety, driver cost, energy cost] for one agent step."""
    if collided and reached_target:
        raise ValueError("a step cannot both collide and reach the target")
    if energy_kwh < 0:
        raise ValueError("negative energy")
    safety = R_TARGET * reached_target - P_COLLISION * collided
    return np.array([
        safety,
        -DRIVER_COST_PER_HOUR * dt / 3600.0,
        -ELECTRICITY_COST_PER_KWH * energy_kwh,
    ])
