import math

import numpy as np
import pytest

from . import sim, utils
from .lp_planner import PathHistory

NO_HP = {"sim": {"min_estimates": 100, "min_coverage": 1.0}}


def kinds(events, kind):
    return [e for e in events if e["kind"] == kind]


def measurements(events):
    return kinds(events, "measurement")


def test_mission_starts_with_a_manifest(quick_settings):
    mission = sim.Mission(quick_settings())
    (event,) = mission.state.events
    assert event["kind"] == "mission_started"
    assert event["time"] == 0.0
    assert event["radars"] == []
    assert event["seeded_history"] == {"points": [[0.0, 0.0], [0.0, 0.0]], "agent_ids": [0, 1], "times": [0.0, 0.0]}
    assert event["settings"]["scenario"]["n_agents"] == 2
    assert mission.state.history.times.tolist() == [0.0, 0.0]


def test_zero_time_budget_finds_nothing(quick_settings):
    outcome = sim.Mission(quick_settings()).run(0.0)
    assert not outcome.found
    assert outcome.t_found == math.inf
    assert outcome.hp_attempts == 0
    assert [e["kind"] for e in outcome.logs] == ["mission_started", "mission_finished"]
    assert outcome.manifest is outcome.logs[0]
    assert outcome.as_dict()["tf"] is None


def test_step_moves_agents_and_records_history(quick_settings):
    mission = sim.Mission(quick_settings(NO_HP))
    state = mission.step()
    assert state.clock == 1.0
    assert state.planning_rounds == 1
    for agent in state.agents.values():
        assert agent.position.distance_to((0.0, 0.0)) == pytest.approx(50.0)
    assert state.events[-1]["kind"] == "positions"
    assert set(state.events[-1]["agents"]) == {"0", "1"}
    assert len(state.history) == 2
    for _ in range(4):
        mission.step()
    assert len(state.history) == 4
    assert state.history.times.max() == 5.0


def test_step_rejects_non_positive_dt(quick_settings):
    with pytest.raises(ValueError):
        sim.Mission(quick_settings()).step(0.0)


def test_move_stops_at_the_waypoint(quick_settings):
    mission = sim.Mission(quick_settings(NO_HP))
    mission.step()
    target = mission.state.assignment.waypoint(0)
    mission.move(1e6)
    assert list(mission.state.agents[0].position) == pytest.approx(list(target))


def test_open_ground_dispatches_at_once(quick_settings):
    outcome = sim.Mission(quick_settings({"sim": {"min_coverage": 0.0}})).run()
    assert outcome.found
    assert outcome.t_found == 0.0
    assert outcome.hp_attempts == 1
    assert outcome.plan.dispatchable
    sequence = [e["kind"] for e in outcome.logs]
    assert sequence == ["mission_started", "waypoints_planned", "hp_attempted", "dispatched", "mission_finished"]
    assert "timings" not in outcome.logs[3]["plan"]["diagnostics"]
    assert outcome.as_dict()["tf"] == outcome.plan.tf


def test_measurements_are_reproducible(quick_settings, radar_factory):
    radars = [radar_factory(x=400.0, y=400.0)]
    first = sim.Mission(quick_settings(NO_HP), radars=radars).run(10.0)
    second = sim.Mission(quick_settings(NO_HP), radars=radars).run(10.0)
    assert measurements(first.logs)
    assert measurements(first.logs) == measurements(second.logs)
    for m in measurements(first.logs):
        assert m["time"] == float(int(m["time"]))
        assert 1.0 <= m["time"] <= 10.0
        assert m["radar_id"] == 0


def test_rerun_from_the_manifest(quick_settings, radar_factory, tmp_path):
    outcome = sim.Mission(quick_settings(NO_HP), radars=[radar_factory(x=400.0, y=400.0)]).run(10.0)
    path = outcome.write_log(str(tmp_path / "mission.jsonl"))
    manifest = utils.read_jsonl(path)[0]
    again = sim.rerun(manifest, t_max=10.0)
    assert measurements(again.logs) == measurements(utils.read_jsonl(path))


def test_seeded_history(quick_settings):
    history = PathHistory([[1000.0, 1000.0], [1500.0, 1000.0]], [0, 0], [-10.0, 0.0])
    mission = sim.Mission(quick_settings(), history=history)
    assert mission.state.events[0]["seeded_history"] == history.as_dict()
    assert mission.state.history is not history
    with pytest.raises(ValueError):
        sim.Mission(quick_settings(), history=PathHistory([[0.0, 0.0]], [0], [5.0]))


def test_rerun_keeps_the_seeded_history(quick_settings, radar_factory, tmp_path):
    history = PathHistory([[1000.0, 1000.0], [1500.0, 1000.0]], [0, 0], [-10.0, 0.0])
    outcome = sim.Mission(quick_settings(NO_HP), radars=[radar_factory(x=400.0, y=400.0)], history=history).run(10.0)
    logged = utils.read_jsonl(outcome.write_log(str(tmp_path / "seeded.jsonl")))
    again = sim.rerun(logged[0], t_max=10.0)
    replayed = utils.read_jsonl(again.write_log(str(tmp_path / "again.jsonl")))
    assert replayed[0] == logged[0]
    assert again.manifest["seeded_history"]["times"] == [-10.0, 0.0]
    assert kinds(replayed, "positions") == kinds(logged, "positions")
    assert measurements(replayed) == measurements(logged)


def test_unexplored_ground_blocks_the_first_attempt(quick_settings):
    mission = sim.Mission(quick_settings({"sim": {"min_coverage": 0.0}}), history=PathHistory())
    assert mission.state.events[0]["seeded_history"]["points"] == []
    mission.step()
    assert not mission.found
    assert mission.state.hp_attempts == 1
    assert mission.state.plan.reason == "undiscovered radar risk"
    assert mission.state.plan.diagnostics["p_max"] == pytest.approx(0.5)


def test_lawnmower_mode_runs(quick_settings):
    mission = sim.Mission(quick_settings(NO_HP), mode="lawnmower")
    mission.run(3.0)
    assert mission.state.clock == 3.0
    first = mission.state.assignment.waypoint(0)
    assert first is not None


def test_scaled_estimates(estimate_factory):
    estimate = estimate_factory()
    assert sim.scaled_estimates([estimate], 1.0)[0] is estimate
    (scaled,) = sim.scaled_estimates([estimate], 0.0)
    assert np.all(scaled.cov == 0.0)
    assert np.array_equal(scaled.mean, estimate.mean)


def test_run_mission_helper(quick_settings):
    settings = quick_settings()
    outcome = sim.run_mission(settings.scenario, settings.weights, settings.mission, t_max=0.0, settings=settings)
    assert outcome.mode == "ours"
    assert not outcome.found
