"""INI run configuration shared by training, evaluation, and replay."""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .. import NUM_ACTIONS, NUM_OBJECTIVES
from ..gpils.runner import GpilsConfig
from ..moppo.update import MoppoConfig
from ..nn.network import NetworkSpec, SpecError
from ..sim.config import ConfigError, SimConfig, sim_config_from_mapping
from ..sim.highway import observation_dim

KNOWN_SECTIONS = ("run", "sim", "energy", "safety", "network", "moppo", "gpils")


@dataclass(frozen=True)
class RunConfig:
    name: str
    seed: int
    output: str | None
    sim: SimConfig
    spec: NetworkSpec
    moppo: MoppoConfig
    gpils: GpilsConfig


def _dataclass_kwargs(cls, section: dict, name: str) -> dict:
    """Cast INI strings using each field's default-value type."""
    defaults = {f.name: f.default for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, raw in section.items():
        if key not in defaults:
            raise ConfigError(f"unknown {name} key {key!r}")
        default = defaults[key]
        try:
            if isinstance(default, tuple):
                kwargs[key] = tuple(float(p) for p in raw.split(",") if p.strip())
            elif isinstance(default, int):
                kwargs[key] = int(raw)
            else:
                kwargs[key] = float(raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {name}.{key}: {raw!r}") from exc
    return kwargs


def _parse_layers(raw: str, key: str) -> tuple[int, ...]:
    try:
        sizes = tuple(int(p) for p in raw.replace(" ", "").split(",") if p)
    except ValueError as exc:
        raise ConfigError(f"bad value for network.{key}: {raw!r}") from exc
    if not sizes:
        raise ConfigError(f"network.{key} needs at least one layer width")
    return sizes


def _network_spec(section: dict, sim: SimConfig) -> NetworkSpec:
    kwargs: dict = {}
    for key, raw in section.items():
        if key in ("obs_layers", "weight_layers"):
            kwargs[key] = _parse_layers(raw, key)
        elif key in ("activation", "dtype"):
            kwargs[key] = raw
        elif key == "init_seed":
            try:
                kwargs[key] = int(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for network.init_seed: {raw!r}") from exc
        else:
            raise ConfigError(f"unknown network key {key!r}")
    try:
        return NetworkSpec(obs_dim=observation_dim(sim), weight_dim=NUM_OBJECTIVES,
                           num_actions=NUM_ACTIONS, **kwargs)
    except SpecError as exc:
        raise ConfigError(str(exc)) from exc


def run_config_from_ini(path) -> RunConfig:
    """Parse a run configuration; raises ConfigError / configparser.Error
    (both carry enough context for a line-level diagnostic)."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    with open(path) as f:
        parser.read_file(f)

    for section in parser.sections():
        if section not in KNOWN_SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")

    run = dict(parser["run"]) if parser.has_section("run") else {}
    for key in run:
        if key not in ("name", "seed", "output"):
            raise ConfigError(f"unknown run key {key!r}")
    name = run.get("name", path.stem)
    try:
        seed = int(run.get("seed", "0"))
    except ValueError as exc:
        raise ConfigError(f"bad value for run.seed: {run['seed']!r}") from exc

    sim = sim_config_from_mapping(
        dict(parser["sim"]) if parser.has_section("sim") else {},
        energy=dict(parser["energy"]) if parser.has_section("energy") else None,
        safety=dict(parser["safety"]) if parser.has_section("safety") else None)
    spec = _network_spec(
        dict(parser["network"]) if parser.has_section("network") else {}, sim)
    try:
        moppo = MoppoConfig(**_dataclass_kwargs(
            MoppoConfig, dict(parser["moppo"]) if parser.has_section("moppo") else {},
            "moppo"))
        gpils_section = dict(parser["gpils"]) if parser.has_section("gpils") else {}
        gpils = GpilsConfig(**_dataclass_kwargs(GpilsConfig, gpils_section, "gpils"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(name=name, seed=seed, output=run.get("output"),
                     sim=sim, spec=spec, moppo=moppo, gpils=gpils)
