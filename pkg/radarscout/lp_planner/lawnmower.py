import logging

import numpy as np
from scipy import optimize

from ..core import Position2
from .objective import PathHistory, gamma_e
from .planner import ExplorationStrategy, WaypointAssignment, _agents

log = logging.getLogger("radarscout")


def _rung(x0, x1, y, spacing):
    n = max(int(np.ceil((x1 - x0) / spacing)), 1)
    xs = np.linspace(x0, x1, n + 1)
    return np.column_stack([xs, np.full(n + 1, y)])


def midpoint_posterior(spacing, strip_width, config):
    """Exploration posterior halfway between two rungs flown spacing apart."""
    step = config.dt_e * config.lp_speed
    rungs = np.vstack([_rung(0.0, strip_width, 0.0, step), _rung(0.0, strip_width, spacing, step)])
    history = PathHistory(rungs, np.zeros(len(rungs), dtype=int), np.arange(len(rungs), dtype=float))
    return gamma_e(np.array([0.5 * strip_width, 0.5 * spacing]), history, config)


def rung_spacing(strip_width, height, config, threshold=0.25):
    """Largest rung spacing whose midpoint posterior stays at or below threshold."""
    floor = config.dt_e * config.lp_speed

    def excess(spacing):
        return midpoint_posterior(spacing, strip_width, config) - threshold

    if excess(height) <= 0:
        return height
    if excess(floor) > 0:
        log.debug("rung spacing floored at {:.0f} m".format(floor))
        return floor
    return optimize.bisect(excess, floor, height, xtol=1e-6 * height)


def _sweep(x0, x1, levels, left_first=True):
    points = []
    left = left_first
    for y in levels:
        ends = [(x0, y), (x1, y)] if left else [(x1, y), (x0, y)]
        points.extend(ends)
        left = not left
    return points


def lawnmower_plan(region, n_agents, config, threshold=0.25):
    """Boustrophedon waypoint sequences, one per vertical strip.

    Each agent sweeps up its strip on rungs spaced so the posterior between
    rungs stays at or below threshold, then sweeps back down on the rungs
    halfway between.
    """
    if n_agents < 1:
        raise ValueError("Lawnmower plan needs at least one agent, got {}".format(n_agents))
    edges = np.linspace(region.lower.x, region.upper.x, n_agents + 1)
    edges[-1] = region.upper.x
    strip_width = region.width / n_agents
    spacing = rung_spacing(strip_width, region.height, config, threshold)
    levels = np.arange(region.lower.y, region.upper.y, spacing)
    if region.upper.y - levels[-1] > 1e-9 * region.height:
        levels = np.append(levels, region.upper.y)
    halves = 0.5 * (levels[1:] + levels[:-1])[::-1]
    plans = []
    for k in range(n_agents):
        x0, x1 = edges[k], edges[k + 1]
        up = _sweep(x0, x1, levels)
        down = _sweep(x0, x1, halves, left_first=(len(levels) % 2 == 0))
        plans.append(np.array(up + down))
    log.debug("lawnmower: {} strips, rung spacing {:.0f} m".format(n_agents, spacing))
    return plans


class LawnmowerPlanner(ExplorationStrategy):
    modes = ["lawnmower"]

    def __init__(self, context, weights=None, lp_config=None):
        super().__init__(context, weights, lp_config)
        self.plans = None
        self.progress = {}

    def needs_replan(self, now, agents, assignment):
        if assignment is None:
            return True
        return any(self.arrived(state, assignment.waypoint(a)) for a, state in _agents(agents).items())

    def plan(self, now, agents, estimates, history, assignment=None):
        agents = _agents(agents)
        if self.plans is None:
            scenario = self.context.scenario
            self.plans = lawnmower_plan(scenario.region, len(agents), scenario, self.lp_config.lawnmower_threshold)
        previous = assignment.waypoints if assignment is not None else {}
        result = WaypointAssignment(order=sorted(agents), history=history)
        for slot, agent_id in enumerate(sorted(agents)):
            sequence = self.plans[slot]
            index = self.progress.get(agent_id, 0)
            if agent_id in previous and self.arrived(agents[agent_id], previous[agent_id]):
                index += 1
            # the sweep repeats once finished
            index %= len(sequence)
            self.progress[agent_id] = index
            result.waypoints[agent_id] = Position2(*sequence[index])
            result.planned_at[agent_id] = now
        return result
