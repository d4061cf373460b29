import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .. import estimator
from ..core import Position2
from ..estimator import RadarEstimate
from .objective import PathHistory, total_objective

log = logging.getLogger("radarscout")


@dataclass(frozen=True)
class LPConfig:
    grid_n: int = 25
    restarts_per_side: int = 4
    coverage_grid_n: int = 32
    coverage_threshold: float = 0.25
    lawnmower_threshold: float = 0.25
    deconflict: bool = True

    def __post_init__(self):
        if self.grid_n < self.restarts_per_side:
            raise ValueError("grid_n must be at least restarts_per_side")
        if self.restarts_per_side < 1:
            raise ValueError("restarts_per_side must be positive")


@dataclass(eq=False)
class WaypointAssignment:
    waypoints: dict = field(default_factory=dict)
    order: list = field(default_factory=list)
    covariances: dict = field(default_factory=dict)
    history: PathHistory = field(default_factory=PathHistory)
    broadcasts: list = field(default_factory=list)
    planned_at: dict = field(default_factory=dict)

    def waypoint(self, agent_id):
        return self.waypoints.get(agent_id)

    def as_dict(self):
        return {
            "order": list(self.order),
            "waypoints": {str(k): list(v) for k, v in self.waypoints.items()},
            "planned_at": {str(k): v for k, v in self.planned_at.items()},
            "hypothetical_dets": {str(k): float(np.linalg.det(v)) for k, v in self.covariances.items()},
        }


def _agents(agents):
    if isinstance(agents, dict):
        return dict(agents)
    return dict(enumerate(agents))


def planning_order(agents, estimates):
    """Agents nearest the most uncertain estimate plan first; agent id order without estimates."""
    agents = _agents(agents)
    if not estimates:
        return sorted(agents)
    dets = [e.det for e in estimates]
    target = estimates[int(np.argmax(dets))].position
    return sorted(agents, key=lambda a: (agents[a].position.distance_to(target), a))


def future_path(start, waypoint, spacing):
    """Points every spacing meters from start (exclusive) to waypoint (inclusive)."""
    start = Position2.of(start).as_array()
    waypoint = Position2.of(waypoint).as_array()
    distance = float(np.hypot(*(waypoint - start)))
    n = int(np.ceil(distance / spacing)) if distance > 0 else 0
    if n == 0:
        return np.zeros((0, 2))
    steps = np.minimum(np.arange(1, n + 1) * spacing, distance) / distance
    return start + steps[:, None] * (waypoint - start)


def hypothetical_update(estimates, waypoint, noise, g_i, wavelength):
    """Covariances after an imagined measurement at waypoint; means are untouched."""
    point = Position2.of(waypoint).as_array()
    updated = []
    for est in estimates:
        jac = estimator.measurement_jacobians(point, est.mean, g_i, wavelength, min_range=1.0)[0]
        cov, _ = estimator.covariance_update(est.cov, jac, noise.covariance)
        updated.append(RadarEstimate(est.radar_id, est.mean, cov, est.n_measurements))
    return updated


def best_waypoint(objective, region, grid_n=25, restarts_per_side=4):
    """Multi-start bounded minimization of a vectorized objective over the region."""
    low = np.array([region.lower.x, region.lower.y])
    span = np.array([region.width, region.height])
    axis = np.linspace(0.0, 1.0, grid_n)
    unit_grid = np.stack(np.meshgrid(axis, axis), axis=-1)
    values = np.asarray(objective(low + unit_grid.reshape(-1, 2) * span)).reshape(grid_n, grid_n)

    starts = []
    for rows in np.array_split(np.arange(grid_n), restarts_per_side):
        for cols in np.array_split(np.arange(grid_n), restarts_per_side):
            block = values[np.ix_(rows, cols)]
            r, c = np.unravel_index(int(np.argmin(block)), block.shape)
            starts.append(unit_grid[rows[r], cols[c]])

    def scalar(u):
        return float(np.asarray(objective(low + u[None, :] * span))[0])

    best_u = unit_grid.reshape(-1, 2)[int(np.argmin(values))]
    best_value = float(values.min())
    for start in starts:
        result = optimize.minimize(scalar, start, method="L-BFGS-B", bounds=[(0.0, 1.0), (0.0, 1.0)])
        if result.fun < best_value:
            best_value, best_u = float(result.fun), np.clip(result.x, 0.0, 1.0)
    return Position2(*(low + best_u * span)), best_value


def plan_waypoints(agents, estimates, history, weights, context, now=0.0, lp_config=None):
    """One planning round for the low-priority fleet.

    Agents plan one after another; each broadcasts its imagined future path
    and the covariances it expects after reaching its waypoint, and later
    agents plan against that hypothetical state.
    """
    lp_config = lp_config or LPConfig()
    agents = _agents(agents)
    scenario = context.scenario
    noise = context.noise
    estimates = list(estimates)
    order = planning_order(agents, estimates)
    spacing = scenario.dt_e * scenario.lp_speed
    assignment = WaypointAssignment(order=order, history=history)
    hypothetical_estimates = estimates
    hypothetical_history = history

    for agent_id in order:
        state = agents[agent_id]

        def objective(points, h=hypothetical_history, e=hypothetical_estimates):
            return total_objective(points, h, e, weights, context)

        waypoint, value = best_waypoint(objective, context.region, lp_config.grid_n, lp_config.restarts_per_side)
        assignment.waypoints[agent_id] = waypoint
        assignment.planned_at[agent_id] = now
        log.debug("agent {} waypoint ({:.0f}, {:.0f}) objective {:.4f}".format(agent_id, waypoint.x, waypoint.y, value))
        if not lp_config.deconflict:
            continue
        path = future_path(state.position, waypoint, spacing)
        times = now + scenario.dt_e * np.arange(1, len(path) + 1)
        hypothetical_history = hypothetical_history.extended(agent_id, times, path)
        hypothetical_estimates = hypothetical_update(hypothetical_estimates, waypoint, noise, scenario.g_i, scenario.wavelength)
        assignment.broadcasts.append({
            "agent_id": agent_id,
            "waypoint": list(waypoint),
            "path_points": len(path),
            "dets": [e.det for e in hypothetical_estimates],
        })

    assignment.history = hypothetical_history
    assignment.covariances = {e.radar_id: e.cov for e in hypothetical_estimates}
    return assignment


class ExplorationStrategy(object):
    modes = None

    def __init__(self, context, weights=None, lp_config=None):
        self.context = context
        self.weights = weights
        self.lp_config = lp_config or LPConfig()

    def arrived(self, state, waypoint):
        if waypoint is None:
            return True
        return state.position.distance_to(waypoint) <= self.context.scenario.arrival_radius

    def needs_replan(self, now, agents, assignment):
        raise NotImplementedError()

    def plan(self, now, agents, estimates, history, assignment=None):
        raise NotImplementedError()


class ScoutPlanner(ExplorationStrategy):
    modes = ["ours"]

    def needs_replan(self, now, agents, assignment):
        if assignment is None:
            return True
        t_h = self.context.scenario.t_h
        for agent_id, state in _agents(agents).items():
            if now - assignment.planned_at.get(agent_id, -np.inf) > t_h:
                return True
            if self.arrived(state, assignment.waypoint(agent_id)):
                return True
        return False

    def plan(self, now, agents, estimates, history, assignment=None):
        return plan_waypoints(agents, estimates, history, self.weights, self.context, now=now, lp_config=self.lp_config)


def get_strategy(mode):
    for strategy in ExplorationStrategy.__subclasses__():
        if isinstance(strategy.modes, list) and mode.lower() in strategy.modes:
            log.debug("Using exploration strategy: {}".format(strategy.__name__))
            return strategy
    raise LookupError("No exploration strategy for mode '{}'".format(mode))

