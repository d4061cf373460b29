import copy
import dataclasses
import json
import logging
from dataclasses import dataclass, field

import requests

from .core import KinematicLimits, MissionSpec, PlannerWeights, Position2, Region, ScenarioConfig, BEST_WEIGHTS
from .hp_planner import HPConfig
from .lp_planner import LPConfig
from .trajopt import OptimizerConfig

log = logging.getLogger("radarscout")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class UncertaintyConfig:
    """Belief widths handed to the chance-constrained planner.

    covariance_scale multiplies every covariance (unknown prior, known
    parameters and radar estimates); 0 collapses the chance constraint onto
    the deterministic one.
    """

    relative_std: float = 0.1
    p_fa_log10_std: float = 0.5
    rcs_std: float = 0.01
    position_std: float = 10.0
    covariance_scale: float = 1.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError("{} must be non-negative, got {}".format(f.name, getattr(self, f.name)))


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1.0
    t_max: float = 1200.0
    min_estimates: int = 1
    min_coverage: float = 0.1
    record_positions: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive, got {}".format(self.dt))
        if self.t_max < 0:
            raise ValueError("t_max must be non-negative, got {}".format(self.t_max))
        if not 0 <= self.min_coverage <= 1:
            raise ValueError("min_coverage must lie in [0, 1], got {}".format(self.min_coverage))


GROUPS = {
    "scenario": ScenarioConfig,
    "mission": MissionSpec,
    "limits": KinematicLimits,
    "weights": PlannerWeights,
    "optimizer": OptimizerConfig,
    "planner": HPConfig,
    "lp": LPConfig,
    "uncertainty": UncertaintyConfig,
    "sim": SimConfig,
}


def _plain(value):
    if isinstance(value, Position2):
        return [value.x, value.y]
    if isinstance(value, Region):
        return {"lower": _plain(value.lower), "upper": _plain(value.upper)}
    return value


def _typed(f, value):
    if f.type is Position2:
        return Position2.of(value)
    if f.type is Region and not isinstance(value, Region):
        return Region(value["lower"], value["upper"])
    return value


def group_as_dict(group):
    return {f.name: _plain(getattr(group, f.name)) for f in dataclasses.fields(group) if f.init}


def build_group(cls, values):
    known = {f.name: f for f in dataclasses.fields(cls) if f.init}
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError("Unknown {} settings: {}".format(cls.__name__, ", ".join(unknown)))
    try:
        return cls(**{name: _typed(known[name], value) for name, value in values.items()})
    except (TypeError, KeyError) as exc:
        raise ConfigError("Invalid {} settings: {}".format(cls.__name__, exc))


def merge(orig, updates):
    """Deep-merge updates into a copy of orig; nested dicts merge, everything else replaces."""
    merged = copy.deepcopy(orig)
    for k, v in updates.items():
        if isinstance(merged.get(k), dict) and isinstance(v, dict):
            merged[k] = merge(merged[k], v)
        else:
            merged[k] = copy.deepcopy(v)
    return merged


@dataclass(frozen=True)
class Settings:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    mission: MissionSpec = field(default_factory=MissionSpec)
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    weights: PlannerWeights = BEST_WEIGHTS
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    planner: HPConfig = field(default_factory=HPConfig)
    lp: LPConfig = field(default_factory=LPConfig)
    uncertainty: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    sim: SimConfig = field(default_factory=SimConfig)

    def as_dict(self):
        return {name: group_as_dict(getattr(self, name)) for name in GROUPS}

    @classmethod
    def from_dict(cls, data, base=None):
        data = data or {}
        unknown = sorted(set(data) - set(GROUPS))
        if unknown:
            raise ConfigError("Unknown settings groups: {}".format(", ".join(unknown)))
        defaults = (base or cls()).as_dict()
        # the mission shares the scenario region unless told otherwise
        if "region" in data.get("scenario", {}) and "region" not in data.get("mission", {}):
            data = merge(data, {"mission": {"region": data["scenario"]["region"]}})
        merged = merge(defaults, data)
        try:
            return cls(**{name: build_group(GROUPS[name], merged[name]) for name in GROUPS})
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(str(exc))

    def replace(self, **groups):
        """A copy with some groups overridden by partial dicts or whole objects."""
        updates = {}
        objects = {}
        for name, value in groups.items():
            if isinstance(value, dict):
                updates[name] = value
            else:
                objects[name] = value
        settings = Settings.from_dict(updates, base=self) if updates else self
        return dataclasses.replace(settings, **objects)

    @classmethod
    def load(cls, fp):
        try:
            data = json.load(fp)
        except ValueError as exc:
            raise ConfigError("Config file is not valid JSON: {}".format(exc))
        return cls.from_dict(data)

    @classmethod
    def load_url(cls, url):
        log.debug("Fetching settings from {}".format(url))
        resp = requests.get(url)
        resp.raise_for_status()
        return cls.from_dict(resp.json())
