import copy

import faker
import mock
import numpy as np
import pytest

from .config import Settings
from .core import Position2, ScenarioConfig
from .estimator import RadarEstimate
from .radar import RadarTruth


@pytest.fixture
def fake():
    return faker.Faker()


# pylama:ignore=C901
@pytest.fixture
def patch_dict():
    def _patch_dict(orig, updates):
        for k, v in updates.items():
            delete = str(k).startswith("-")
            replace = str(k).startswith("!")
            if delete or replace:
                k = k[1:]
            if delete:
                del orig[k]
                continue
            if k not in orig or replace:
                orig[k] = v
            elif isinstance(orig[k], dict) and isinstance(v, dict):
                _patch_dict(orig[k], v)
            else:
                orig[k] = v
        return orig

    return _patch_dict


@pytest.fixture
def mockit():
    def _mockit(i, *args, **kwargs):
        return mock.patch(i.__module__ + "." + i.__name__, *args, **kwargs)

    return _mockit


@pytest.fixture
def scenario():
    return ScenarioConfig()


@pytest.fixture
def radar_factory(scenario):
    def _radar(x=11000.0, y=11000.0, radar_id=0, p_t=10000.0, g_t=10.0, **overrides):
        params = dict(
            radar_id=radar_id,
            position=Position2(x, y),
            p_t=p_t,
            g_t=g_t,
            g_r=scenario.g_r,
            wavelength=scenario.wavelength,
            pulse_width=scenario.pulse_width,
            system_temp=scenario.system_temp,
            loss=scenario.loss,
            p_fa=scenario.p_fa,
        )
        params.update(overrides)
        return RadarTruth(**params)

    return _radar


@pytest.fixture
def estimate_factory():
    def _estimate(x=11000.0, y=11000.0, erp=1e5, radar_id=0, position_std=100.0, erp_std=1e4, n_measurements=5):
        cov = np.diag([position_std ** 2, position_std ** 2, erp_std ** 2])
        return RadarEstimate(radar_id, [x, y, erp], cov, n_measurements)

    return _estimate


@pytest.fixture
def settings_factory(patch_dict):
    """Settings from the defaults with deep-merged overrides."""

    def _settings(updates=None):
        return Settings.from_dict(patch_dict(Settings().as_dict(), updates or {}))

    return _settings


QUICK_SETTINGS = {
    "scenario": {"region": {"lower": [0.0, 0.0], "upper": [3000.0, 3000.0]}, "radar_count": 0, "n_agents": 2},
    "mission": {"goal": [3000.0, 3000.0], "region": {"lower": [0.0, 0.0], "upper": [3000.0, 3000.0]}},
    "planner": {"n_control": 8, "grid_n": 32, "circle_samples": 64, "trim_samples": 16},
    "optimizer": {"n_samples": 20, "max_outer": 10},
    "lp": {"grid_n": 9, "restarts_per_side": 2},
    "sim": {"t_max": 60.0, "record_positions": True},
}


@pytest.fixture
def quick_settings(settings_factory, patch_dict):
    """Small region, small planners: missions finish in seconds."""

    def _settings(updates=None):
        return settings_factory(patch_dict(copy.deepcopy(QUICK_SETTINGS), updates or {}))

    return _settings
