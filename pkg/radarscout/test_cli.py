import json
import os
import re

import mock
import pytest
from click.testing import CliRunner

from . import cli
from .config import Settings
from .core import BEST_WEIGHTS, PlannerWeights
from .experiments import ExperimentResult


def canned_result(kind="single", errors=0, seed=0):
    runs = [{"label": kind, "mode": "ours", "seed": seed, "found": True, "t_found": 42.0, "error": None, "log": "m.jsonl"}]
    runs += [{"label": kind, "mode": "ours", "seed": seed + 1 + i, "found": False, "error": "boom"} for i in range(errors)]
    return ExperimentResult(kind, [{"seed": seed, "found": True}], runs)


@pytest.fixture
def invoke():
    """Runs the cli with experiments and figures stubbed; returns the result and the specs it ran."""

    def _invoke(args, result=None):
        specs = []

        def run(spec):
            specs.append(spec)
            return result or canned_result(spec.kind, seed=spec.seed)

        with mock.patch("radarscout.cli.experiments.run_experiment", side_effect=run):
            with mock.patch("radarscout.cli.plots.render", return_value=[]):
                outcome = CliRunner().invoke(cli.cli, args, catch_exceptions=False)
        return outcome, specs

    return _invoke


@pytest.mark.parametrize(
    "test",
    [
        pytest.param({"args": ["ternary", "-w", "1,0"], "exit_code": 2, "output": re.compile("not an alpha_e,alpha_u,alpha_s triple")}, id="short triple"),
        pytest.param({"args": ["baseline", "-w", "-1,1,1"], "exit_code": 2, "output": re.compile("non-negative")}, id="negative weight"),
        pytest.param({"args": ["single", "--mode", "spiral"], "exit_code": 2, "output": re.compile("spiral")}, id="unknown mode"),
        pytest.param({"args": ["ternary", "-s", "0"], "exit_code": 10, "output": re.compile("Invalid experiment")}, id="no scenarios"),
    ],
)
def test_bad_arguments(invoke, test):
    result, specs = invoke(test["args"])
    assert result.exit_code == test["exit_code"]
    assert test["output"].search(result.output) is not None
    assert specs == []


def test_config_file_errors_exit_with_config_code(invoke, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    result, _ = invoke(["-c", str(broken), "single"])
    assert result.exit_code == 10
    assert "Invalid settings" in result.output

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"scenario": {"radar_cnt": 3}}))
    result, _ = invoke(["-q", "-c", str(unknown), "single"])
    assert result.exit_code == 10
    assert result.output == ""


def test_config_file_reaches_the_experiment(invoke, tmp_path):
    path = tmp_path / "settings.json"
    path.write_text(json.dumps({"scenario": {"radar_count": 3}, "weights": {"alpha_e": 0.0, "alpha_u": 0.0, "alpha_s": 1.0}}))
    result, (spec,) = invoke(["-c", str(path), "single", "--seed", "9", "-a", "4", "-o", str(tmp_path / "out")])
    assert result.exit_code == 0
    assert spec.settings.scenario.radar_count == 3
    assert spec.settings.scenario.n_agents == 4
    assert spec.weights == (PlannerWeights(0.0, 0.0, 1.0),)
    assert spec.seed == 9
    assert "found=True t_found=42.0" in result.output
    assert os.path.exists(str(tmp_path / "out" / "single" / "manifest.json"))


def test_ternary_uses_the_simplex_grid(invoke, tmp_path):
    result, (spec,) = invoke(["ternary", "--divisions", "1", "-s", "2", "-o", str(tmp_path)])
    assert result.exit_code == 0
    assert len(spec.weights) == 4
    assert spec.weights[-1] == BEST_WEIGHTS
    assert spec.scenarios == 2


def test_explicit_weights_and_agent_counts(invoke, tmp_path):
    _, (spec,) = invoke(["ternary", "-w", "1,0,0", "-w", "0,1,0", "-o", str(tmp_path)])
    assert spec.weights == (PlannerWeights(1.0, 0.0, 0.0), PlannerWeights(0.0, 1.0, 0.0))
    _, (spec,) = invoke(["agents", "-a", "20", "-a", "5", "-o", str(tmp_path)])
    assert spec.kind == "agent_sweep"
    assert spec.agent_counts == (5, 20)


def test_calibrate_scales_covariance(invoke, tmp_path):
    _, (spec,) = invoke(["calibrate", "--covariance-scale", "0", "-o", str(tmp_path)])
    assert spec.settings.uncertainty.covariance_scale == 0.0
    _, (spec,) = invoke(["calibrate", "-o", str(tmp_path)])
    assert spec.settings.uncertainty.covariance_scale == 1.0


def test_mission_errors_exit_with_mission_code(invoke, tmp_path):
    result, _ = invoke(["baseline", "-o", str(tmp_path)], result=canned_result("baseline", errors=2))
    assert result.exit_code == 20
    assert "2 of 3 missions errored" in result.output


def test_config_url_retries(invoke, tmp_path):
    with mock.patch("radarscout.cli.time.sleep") as sleep:
        with mock.patch.object(Settings, "load_url", side_effect=[IOError("down"), Settings()]) as load_url:
            result, (spec,) = invoke(["--config-url", "http://config.example/s.json", "single", "-o", str(tmp_path)])
    assert result.exit_code == 0
    assert load_url.call_count == 2
    sleep.assert_called_once_with(4)
    assert spec.settings == Settings()


def test_config_url_gives_up(invoke, tmp_path):
    with mock.patch("radarscout.cli.time.sleep"):
        with mock.patch.object(Settings, "load_url", side_effect=IOError("down")) as load_url:
            result, specs = invoke(["-n", "3", "--config-url", "http://config.example/s.json", "single"])
    assert result.exit_code == 10
    assert load_url.call_count == 3
    assert "Could not fetch settings" in result.output
    assert specs == []


def test_render_reads_manifests(invoke, tmp_path):
    out = str(tmp_path)
    invoke(["single", "-o", out])
    with mock.patch("radarscout.cli.plots.render", return_value=["a.png", "b.png"]) as render:
        result = CliRunner().invoke(cli.cli, ["render", "-o", out], catch_exceptions=False)
    assert result.exit_code == 0
    assert "Rendered 2 figures" in result.output
    (call,) = render.call_args_list
    assert call[0][0].kind == "single"
    assert call[0][1] == os.path.join(out, "single", "figures")
