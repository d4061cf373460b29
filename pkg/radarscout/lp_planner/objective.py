import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .. import estimator, radar
from ..core import Position2

log = logging.getLogger("radarscout")

# points per slab when evaluating the exploration posterior over many candidates
CHUNK = 2048
# distance floor for hypothetical measurements taken on top of an estimate
MIN_HYPOTHETICAL_RANGE = 1.0


@dataclass(eq=False)
class PathHistory:
    """Explored locations shared by all agents, each tagged with agent id and time."""

    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))
    agent_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    times: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)
        self.agent_ids = np.asarray(self.agent_ids, dtype=int).reshape(-1)
        self.times = np.asarray(self.times, dtype=float).reshape(-1)
        if not len(self.points) == len(self.agent_ids) == len(self.times):
            raise ValueError("History points, agent ids and times must have equal length")

    def __len__(self):
        return len(self.points)

    def last_time(self, agent_id):
        mine = self.times[self.agent_ids == agent_id]
        return float(mine.max()) if len(mine) else -np.inf

    def append(self, agent_id, time, position):
        if not time > self.last_time(agent_id):
            raise ValueError("History times must increase for agent {}: {} after {}".format(agent_id, time, self.last_time(agent_id)))
        self.points = np.vstack([self.points, Position2.of(position).as_array()[None, :]])
        self.agent_ids = np.append(self.agent_ids, agent_id)
        self.times = np.append(self.times, float(time))
        return self

    def extended(self, agent_id, times, points):
        """A copy with a hypothetical future path appended."""
        points = np.asarray(points, dtype=float).reshape(-1, 2)
        times = np.asarray(times, dtype=float).reshape(-1)
        if len(times) and not times[0] > self.last_time(agent_id):
            raise ValueError("Hypothetical path must start after agent {}'s history".format(agent_id))
        return PathHistory(
            np.vstack([self.points, points]),
            np.concatenate([self.agent_ids, np.full(len(points), agent_id)]),
            np.concatenate([self.times, times]),
        )

    def copy(self):
        return PathHistory(self.points.copy(), self.agent_ids.copy(), self.times.copy())

    def as_dict(self):
        return {
            "points": self.points.tolist(),
            "agent_ids": self.agent_ids.tolist(),
            "times": self.times.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True, eq=False)
class PlanningContext:
    scenario: object
    mission: object

    @property
    def noise(self):
        return radar.NoiseModel.from_config(self.scenario)

    @property
    def region(self):
        return self.scenario.region


def _as_points(x):
    if isinstance(x, Position2):
        return x.as_array()[None, :], True
    x = np.asarray(x, dtype=float)
    return x.reshape(-1, 2), x.ndim == 1


def _scalar_or_array(values, single):
    return float(values[0]) if single else values


def gamma_e(x, history, config):
    """Posterior probability that an undiscovered radar sits at x given the history.

    Every history point would have intercepted a radar at x with
    radar.intercept_probability; none did, so the prior phi_prior is updated
    against the false-alarm-only alternative. Accepts one point or a (Q, 2) array.
    """
    points, single = _as_points(x)
    phi = config.phi_prior
    explored = history.points
    log_other = len(explored) * np.log1p(-config.p_fa) + np.log1p(-phi)
    values = np.empty(len(points))
    for start in range(0, len(points), CHUNK):
        block = points[start:start + CHUNK]
        if len(explored):
            p_int = radar.intercept_probability(explored[None, :, :], block[:, None, :], config)
            with np.errstate(divide="ignore"):
                log_missed = np.sum(np.log1p(-np.minimum(p_int, 1.0)), axis=1)
        else:
            log_missed = np.zeros(len(block))
        values[start:start + CHUNK] = special.expit(log_missed + np.log(phi) - log_other)
    return _scalar_or_array(values, single)


def hypothetical_covariances(x, estimates, noise, g_i, wavelength):
    """EKF-updated covariance of every estimate for a measurement taken at each point, (N, Q, 3, 3)."""
    points, _ = _as_points(x)
    updated = []
    for est in estimates:
        jac = estimator.measurement_jacobians(points, est.mean, g_i, wavelength, min_range=MIN_HYPOTHETICAL_RANGE)
        cov, _ = estimator.covariance_update(est.cov, jac, noise.covariance)
        updated.append(cov)
    return np.array(updated).reshape(len(updated), len(points), 3, 3)


def gamma_u(x, estimates, noise, d_cov, g_i=1.0, wavelength=0.0999):
    """Mean over estimates of det(updated covariance) / d_cov; 0 with no estimates."""
    points, single = _as_points(x)
    if not estimates:
        return _scalar_or_array(np.zeros(len(points)), single)
    dets = np.linalg.det(hypothetical_covariances(points, estimates, noise, g_i, wavelength))
    return _scalar_or_array(np.mean(dets, axis=0) / d_cov, single)


def gamma_s(x, mission):
    points, single = _as_points(x)
    distance = np.hypot(*(points - mission.goal.as_array()).T)
    return _scalar_or_array(distance / mission.d_max, single)


def total_objective(x, history, estimates, weights, context):
    """-alpha_e * gamma_e + alpha_u * gamma_u + alpha_s * gamma_s."""
    scenario = context.scenario
    value = -weights.alpha_e * np.asarray(gamma_e(x, history, scenario))
    if weights.alpha_u:
        value = value + weights.alpha_u * np.asarray(
            gamma_u(x, estimates, context.noise, scenario.d_cov, scenario.g_i, scenario.wavelength)
        )
    value = value + weights.alpha_s * np.asarray(gamma_s(x, context.mission))
    return float(value) if np.ndim(value) == 0 else value


def coverage(history, config, grid_n=32, threshold=0.25):
    """Fraction of a grid_n x grid_n region grid whose exploration posterior is at most threshold."""
    region = config.region
    xs = np.linspace(region.lower.x, region.upper.x, grid_n)
    ys = np.linspace(region.lower.y, region.upper.y, grid_n)
    grid = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
    return float(np.mean(gamma_e(grid, history, config) <= threshold))
