from .objective import PathHistory, PlanningContext, coverage, gamma_e, gamma_s, gamma_u, total_objective
from .planner import (
    ExplorationStrategy,
    LPConfig,
    ScoutPlanner,
    WaypointAssignment,
    best_waypoint,
    get_strategy,
    plan_waypoints,
    planning_order,
)
from .lawnmower import LawnmowerPlanner, lawnmower_plan, rung_spacing

__all__ = [
    "PathHistory",
    "PlanningContext",
    "coverage",
    "gamma_e",
    "gamma_s",
    "gamma_u",
    "total_objective",
    "ExplorationStrategy",
    "LPConfig",
    "ScoutPlanner",
    "WaypointAssignment",
    "best_waypoint",
    "get_strategy",
    "plan_waypoints",
    "planning_order",
    "LawnmowerPlanner",
    "lawnmower_plan",
    "rung_spacing",
]
