"""Native highway microsimulation (environment, dynamics, configuration)."""

from .config import ConfigError, EnergyParams, SimConfig, sim_config_from_mapping
from .dynamics import energy_step, idm_accel, krauss_speed, reward_vector
from .highway import (
    EpisodeOver,
    HighwayEnv,
    MaskedActionError,
    Observation,
    StepResult,
    VehicleState,
    observation_dim,
)

__all__ = [
    "ConfigError", "EnergyParams", "SimConfig", "sim_config_from_mapping",
    "energy_step", "idm_accel", "krauss_speed", "reward_vector",
    "EpisodeOver", "HighwayEnv", "MaskedActionError", "Observation",
    "StepResult", "VehicleState", "observation_dim",
]
