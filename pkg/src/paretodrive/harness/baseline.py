"""Analytical constant-speed operating-cost baseline.

Driving the whole road at a fixed speed v costs, per meter,

    cost(v) = C_driver / (3600 v)                          [wage per time]
            + (C_el / 3.6e6) (0.5 C_d A_f rho v^2 + m g C_r) [energy]

on a flat road. The driver term falls with speed, the drag term grows
with v^2, so the sum has a single interior minimum with the closed form

    v* = (C_driver * 3.6e6 / (3600 C_el C_d A_f rho))^(1/3).

This gives trained policies an absolute yardstick: no policy can beat
the best constant speed by much on an empty road, and a sensible one
should land close to it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..sim.config import EnergyParams
from ..sim.dynamics import (
    DRIVER_COST_PER_HOUR,
    ELECTRICITY_COST_PER_KWH,
    JOULES_PER_KWH,
)

DEFAULT_ROAD_LENGTH = 3000.0
DEFAULT_SPEED_RANGE = (5.0, 25.0)


@dataclass(frozen=True)
class BaselineResult:
    optimal_speed: float          # m/s
    minimal_cost: float           # euros over road_length
    road_length: float            # m
    speeds: np.ndarray            # sampled curve, m/s
    costs_per_meter: np.ndarray   # euros/m at each sampled speed

    @property
    def cost_per_meter(self) -> float:
        return self.minimal_cost / self.road_length


def analytic_cost_per_meter(v: float, energy: EnergyParams = EnergyParams(),
                            driver_cost_per_hour: float = DRIVER_COST_PER_HOUR,
                            electricity_cost: float = ELECTRICITY_COST_PER_KWH) -> float:
    """Euros per meter at constant speed ``v`` on a flat road."""
    if v <= 0:
        raise ValueError(f"constant speed must be positive, got {v}")
    drag = 0.5 * energy.drag_coeff * energy.frontal_area * energy.air_density * v * v
    rolling = energy.mass * energy.gravity * energy.rolling_coeff
    driver = driver_cost_per_hour / (3600.0 * v)
    return driver + (electricity_cost / JOULES_PER_KWH) * (drag + rolling)


def golden_section_minimize(fn, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Minimizer of a unimodal function on [lo, hi]."""
    inv_phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def analytic_optimum(energy: EnergyParams = EnergyParams(),
                     driver_cost_per_hour: float = DRIVER_COST_PER_HOUR,
                     electricity_cost: float = ELECTRICITY_COST_PER_KWH,
                     road_length: float = DEFAULT_ROAD_LENGTH,
                     speed_range: tuple[float, float] = DEFAULT_SPEED_RANGE,
                     samples: int = 2001) -> BaselineResult:
    """Closed-form optimal constant speed, cross-checked numerically.

    The golden-section minimizer over the sampled range must agree with
    the closed form to 1e-6 m/s; disagreement means the parameters broke
    the unimodality assumption and is raised as an error.
    """
    drag_coeff_total = energy.drag_coeff * energy.frontal_area * energy.air_density
    v_star = (driver_cost_per_hour * JOULES_PER_KWH /
              (3600.0 * electricity_cost * drag_coeff_total)) ** (1.0 / 3.0)
    v_star = float(np.clip(v_star, *speed_range))

    def cost(v):
        return analytic_cost_per_meter(v, energy, driver_cost_per_hour,
                                       electricity_cost)

    v_golden = golden_section_minimize(cost, *speed_range)
    if abs(v_golden - v_star) > 1e-6:
        raise ArithmeticError(
            f"closed-form optimum {v_star} disagrees with numerical minimum "
            f"{v_golden}; cost curve is not unimodal on {speed_range}")

    speeds = np.linspace(speed_range[0], speed_range[1], samples)
    costs = np.array([cost(v) for v in speeds])
    return BaselineResult(
        optimal_speed=v_star,
        minimal_cost=cost(v_star) * road_length,
        road_length=road_length,
        speeds=speeds,
        costs_per_meter=costs)
