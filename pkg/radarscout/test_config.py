import io
import json

import mock
import pytest

from . import config
from .config import ConfigError, Settings, SimConfig, UncertaintyConfig
from .core import BEST_WEIGHTS, PlannerWeights, Position2, Region


def test_defaults_round_trip():
    settings = Settings()
    data = settings.as_dict()
    assert set(data) == set(config.GROUPS)
    assert "d_max" not in data["mission"]
    assert data["mission"]["start"] == [0.0, 0.0]
    assert data["scenario"]["region"] == {"lower": [0.0, 0.0], "upper": [22000.0, 22000.0]}
    assert Settings.from_dict(json.loads(json.dumps(data))) == settings
    assert settings.weights == BEST_WEIGHTS


def test_overrides_merge_into_defaults(settings_factory):
    settings = settings_factory({"scenario": {"seed": 7, "n_agents": 3}, "weights": {"alpha_e": 1.0}})
    assert settings.scenario.seed == 7
    assert settings.scenario.n_agents == 3
    assert settings.scenario.radar_count == 13
    assert settings.weights == PlannerWeights(1.0, 0.667, 0.083)


def test_scenario_region_carries_to_the_mission():
    region = {"lower": [0, 0], "upper": [5000, 5000]}
    settings = Settings.from_dict({"scenario": {"region": region}, "mission": {"goal": [5000, 5000]}})
    assert settings.mission.region == Region((0, 0), (5000, 5000))
    assert settings.mission.goal == Position2(5000, 5000)
    assert settings.mission.d_max == pytest.approx(5000 * 2 ** 0.5)


@pytest.mark.parametrize(
    "data",
    [
        pytest.param({"radars": {}}, id="unknown group"),
        pytest.param({"scenario": {"radar_cnt": 3}}, id="unknown key"),
        pytest.param({"scenario": {"radar_count": -1}}, id="invalid value"),
        pytest.param({"mission": {"epsilon": 1.5}}, id="out of range"),
        pytest.param({"weights": {"alpha_e": 0, "alpha_u": 0, "alpha_s": 0}}, id="zero weights"),
        pytest.param({"mission": {"region": {"lower": [30000, 0]}}}, id="inverted region"),
    ],
)
def test_invalid_settings_raise_config_error(data):
    with pytest.raises(ConfigError):
        Settings.from_dict(data)


def test_config_error_is_a_value_error():
    assert issubclass(ConfigError, ValueError)


def test_replace_accepts_dicts_and_objects():
    settings = Settings()
    weights = PlannerWeights(0.0, 0.0, 1.0)
    replaced = settings.replace(weights=weights, sim={"t_max": 60.0})
    assert replaced.weights is weights
    assert replaced.sim.t_max == 60.0
    assert settings.sim.t_max == 1200.0


def test_load_from_file():
    fp = io.StringIO(json.dumps({"uncertainty": {"covariance_scale": 0.0}}))
    assert Settings.load(fp).uncertainty.covariance_scale == 0.0
    with pytest.raises(ConfigError):
        Settings.load(io.StringIO("{not json"))


def test_load_from_url():
    response = mock.Mock()
    response.json.return_value = {"sim": {"dt": 2.0}}
    with mock.patch("radarscout.config.requests.get", return_value=response) as get:
        settings = Settings.load_url("http://config.example/settings.json")
    get.assert_called_once_with("http://config.example/settings.json")
    response.raise_for_status.assert_called_once()
    assert settings.sim.dt == 2.0


def test_group_validation():
    with pytest.raises(ValueError):
        UncertaintyConfig(rcs_std=-1.0)
    with pytest.raises(ValueError):
        SimConfig(dt=0.0)
    with pytest.raises(ValueError):
        SimConfig(min_coverage=2.0)
    assert SimConfig(t_max=0.0).t_max == 0.0
