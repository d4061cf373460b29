import math
import os

import mock
import pytest

from . import experiments, utils
from .core import BEST_WEIGHTS, PlannerWeights
from .experiments import ExperimentResult, ExperimentSpec

NO_TIME = {"sim": {"t_max": 0.0}}
DISPATCH_AT_ONCE = {"sim": {"min_coverage": 0.0}}


@pytest.fixture
def spec_factory(quick_settings, tmp_path):
    def _spec(kind="single", settings=None, **kwargs):
        kwargs.setdefault("scenarios", 1)
        return ExperimentSpec(kind=kind, output_dir=str(tmp_path), settings=quick_settings(settings), **kwargs)

    return _spec


@pytest.mark.parametrize(
    "divisions,count",
    [
        pytest.param(1, 4, id="corners plus best"),
        pytest.param(6, 29, id="default grid"),
    ],
)
def test_simplex_grid(divisions, count):
    grid = experiments.simplex_grid(divisions)
    assert len(grid) == count
    assert all(w.on_simplex for w in grid)
    assert grid[-1] == BEST_WEIGHTS


def test_simplex_grid_skips_extras_already_on_it():
    assert len(experiments.simplex_grid(2, extra=(PlannerWeights(0.5, 0.5, 0.0),))) == 6
    with pytest.raises(ValueError):
        experiments.simplex_grid(0)


@pytest.mark.parametrize(
    "kwargs",
    [
        pytest.param({"kind": "sweep"}, id="unknown kind"),
        pytest.param({"scenarios": 0}, id="no scenarios"),
        pytest.param({"agent_counts": (10, 5)}, id="descending agents"),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentSpec(**kwargs)


def test_spec_seeds_and_log_dir():
    spec = ExperimentSpec(kind="baseline", scenarios=3, seed=10, output_dir="out")
    assert spec.seeds == [10, 11, 12]
    assert spec.log_dir == os.path.join("out", "logs", "baseline")


def test_mission_task(spec_factory):
    spec = spec_factory("agent_sweep")
    weights = PlannerWeights(0.0, 0.0, 1.0)
    task = experiments.mission_task(spec, "n4", 7, "lawnmower", weights=weights, n_agents=4)
    assert task.seed == 7
    assert task.settings.scenario.n_agents == 4
    assert task.settings.weights == weights
    assert task.log_path.endswith(os.path.join("agent_sweep", "n4-seed7-lawnmower.jsonl"))


def test_failed_mission_leaves_an_error_record(spec_factory):
    task = experiments.mission_task(spec_factory(), "single", 3)
    with mock.patch("radarscout.experiments.Mission", side_effect=RuntimeError("boom")):
        path = experiments.execute(task)
    (record,) = utils.read_jsonl(path)
    assert record["kind"] == "mission_error"
    assert record["error"] == "RuntimeError: boom"
    row = experiments.summarize_log(path, "single")
    assert row["found"] is False
    assert row["t_found"] == math.inf
    assert row["error"] == "RuntimeError: boom"


def test_time_stats_and_success_rate():
    runs = [{"found": True, "t_found": 10.0}, {"found": True, "t_found": 20.0}, {"found": False, "t_found": math.inf}]
    mean, std, median = experiments._time_stats(runs)
    assert (mean, median) == (15.0, 15.0)
    assert std == pytest.approx(50 ** 0.5)
    assert experiments.success_rate(runs) == pytest.approx(200.0 / 3)
    assert math.isnan(experiments.success_rate([]))
    assert all(math.isnan(v) for v in experiments._time_stats(runs[2:]))
    assert experiments._time_stats(runs[:1]) == (10.0, 0.0, 10.0)


def test_ternary_table(spec_factory):
    weights = (PlannerWeights(1.0, 0.0, 0.0), PlannerWeights(0.0, 0.0, 1.0))
    result = experiments.run_experiment(spec_factory("ternary", NO_TIME, scenarios=2, weights=weights))
    assert len(result.table) == 2
    assert len(result.runs) == 4
    for row, w in zip(result.table, weights):
        assert (row["alpha_e"], row["alpha_u"], row["alpha_s"]) == w.as_tuple()
        assert row["scenarios"] == 2
        assert row["successes"] == 0
        assert row["success_rate"] == 0.0
        assert math.isnan(row["mean_t_found"])
    assert result.errors == []


def test_baseline_pairs_modes_per_seed(spec_factory):
    result = experiments.run_experiment(spec_factory("baseline", NO_TIME, scenarios=2, seed=5))
    assert [row["seed"] for row in result.table] == [5, 6]
    assert set(result.extra) == {"ours", "lawnmower"}
    assert sorted(r["mode"] for r in result.runs) == ["lawnmower", "lawnmower", "ours", "ours"]


def test_agent_sweep_groups_by_agent_count(spec_factory):
    result = experiments.run_experiment(spec_factory("agent_sweep", NO_TIME, agent_counts=(1, 3)))
    assert [row["n_agents"] for row in result.table] == [1, 3]
    assert [r["n_agents"] for r in result.runs] == [1, 3]


def test_calibration_checks_dispatched_plans(spec_factory):
    result = experiments.run_experiment(spec_factory("calibration", DISPATCH_AT_ONCE))
    (row,) = result.table
    assert row["max_pd"] == 0.0
    assert row["safe"] is True
    assert row["t_found"] == 0.0
    assert result.extra["dispatched"] == 1
    assert result.extra["fraction_safe"] == 1.0


def test_dispatched_max_pd_without_dispatch(spec_factory):
    task = experiments.mission_task(spec_factory(settings=NO_TIME), "single", 0)
    assert experiments.dispatched_max_pd(experiments.execute(task)) is None


def test_single_run(spec_factory):
    result = experiments.run_experiment(spec_factory("single", NO_TIME, mode="lawnmower", seed=4))
    (row,) = result.table
    assert row["mode"] == "lawnmower"
    assert row["seed"] == 4
    assert os.path.exists(row["log"])


def test_result_round_trip():
    result = ExperimentResult("single", [{"seed": 1}], [{"seed": 1, "error": "x"}], {"note": 1})
    again = ExperimentResult.from_dict(result.as_dict())
    assert again.as_dict() == result.as_dict()
    assert again.errors == [{"seed": 1, "error": "x"}]
