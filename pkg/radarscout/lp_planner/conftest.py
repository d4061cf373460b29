import pytest

from ..core import AgentState, MissionSpec, Region, ScenarioConfig
from .objective import PathHistory, PlanningContext
from .planner import LPConfig


@pytest.fixture
def small_scenario():
    return ScenarioConfig(region=Region((0.0, 0.0), (4000.0, 4000.0)), n_agents=2, radar_count=0)


@pytest.fixture
def small_mission():
    return MissionSpec(start=(0.0, 0.0), goal=(4000.0, 4000.0), region=Region((0.0, 0.0), (4000.0, 4000.0)))


@pytest.fixture
def context(small_scenario, small_mission):
    return PlanningContext(small_scenario, small_mission)


@pytest.fixture
def quick_lp():
    return LPConfig(grid_n=15, restarts_per_side=2)


@pytest.fixture
def agents():
    return {0: AgentState((0.0, 0.0), speed=50.0), 1: AgentState((0.0, 0.0), speed=50.0)}


@pytest.fixture
def start_history():
    return PathHistory([[0.0, 0.0], [0.0, 0.0]], [0, 1], [0.0, 0.0])
