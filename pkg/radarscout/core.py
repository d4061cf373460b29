import math
from dataclasses import dataclass, field

import numpy as np

from . import utils

# Lower bound on sampled transmit power; keeps every radar strictly physical
# when the configured range starts at zero.
MIN_TRANSMIT_POWER = 1e-6


@dataclass(frozen=True)
class Position2:
    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("Position components must be finite, got ({}, {})".format(self.x, self.y))

    def __iter__(self):
        yield self.x
        yield self.y

    @classmethod
    def of(cls, value):
        if isinstance(value, cls):
            return value
        x, y = value
        return cls(x, y)

    def as_array(self):
        return np.array([self.x, self.y])

    def distance_to(self, other):
        other = Position2.of(other)
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Region:
    lower: Position2
    upper: Position2

    def __post_init__(self):
        object.__setattr__(self, "lower", Position2.of(self.lower))
        object.__setattr__(self, "upper", Position2.of(self.upper))
        if not (self.lower.x < self.upper.x and self.lower.y < self.upper.y):
            raise ValueError("Region lower bound {} must be below upper bound {}".format(self.lower, self.upper))

    @property
    def width(self):
        return self.upper.x - self.lower.x

    @property
    def height(self):
        return self.upper.y - self.lower.y

    @property
    def diagonal(self):
        return math.hypot(self.width, self.height)

    @property
    def center(self):
        return Position2(0.5 * (self.lower.x + self.upper.x), 0.5 * (self.lower.y + self.upper.y))

    def corners(self):
        """Counter-clockwise from the lower-left corner."""
        lx, ly, ux, uy = self.lower.x, self.lower.y, self.upper.x, self.upper.y
        return np.array([[lx, ly], [ux, ly], [ux, uy], [lx, uy]])

    def contains(self, points, tol=0.0):
        points = np.asarray(points, dtype=float)
        inside = (
            (points[..., 0] >= self.lower.x - tol)
            & (points[..., 0] <= self.upper.x + tol)
            & (points[..., 1] >= self.lower.y - tol)
            & (points[..., 1] <= self.upper.y + tol)
        )
        if inside.ndim == 0:
            return bool(inside)
        return inside

    def clip(self, points):
        points = np.asarray(points, dtype=float)
        low = np.array([self.lower.x, self.lower.y])
        high = np.array([self.upper.x, self.upper.y])
        return np.clip(points, low, high)


@dataclass(frozen=True)
class KinematicLimits:
    v_lb: float = 100.0
    v_ub: float = 134.0
    u_lb: float = -5.0
    u_ub: float = 5.0
    kappa_ub: float = 0.1

    def __post_init__(self):
        if not 0 < self.v_lb < self.v_ub:
            raise ValueError("Speed limits must satisfy 0 < v_lb < v_ub, got {} and {}".format(self.v_lb, self.v_ub))
        if not self.u_lb < 0 < self.u_ub:
            raise ValueError("Turn rate limits must bracket zero, got {} and {}".format(self.u_lb, self.u_ub))
        if self.kappa_ub <= 0:
            raise ValueError("Curvature limit must be positive, got {}".format(self.kappa_ub))


@dataclass(frozen=True)
class AgentState:
    position: Position2
    heading: float = 0.0
    speed: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", Position2.of(self.position))
        object.__setattr__(self, "heading", utils.wrap_angle(self.heading))
        object.__setattr__(self, "speed", float(self.speed))


@dataclass(frozen=True)
class MissionSpec:
    start: Position2 = Position2(0.0, 0.0)
    goal: Position2 = Position2(22000.0, 22000.0)
    region: Region = field(default_factory=lambda: Region((0.0, 0.0), (22000.0, 22000.0)))
    pd_threshold: float = 0.15
    epsilon: float = 0.9
    p_s: float = 0.45
    d_max: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "start", Position2.of(self.start))
        object.__setattr__(self, "goal", Position2.of(self.goal))
        for name in ("pd_threshold", "epsilon", "p_s"):
            value = getattr(self, name)
            if not 0 < value < 1:
                raise ValueError("{} must lie in (0, 1), got {}".format(name, value))
        if not (self.region.contains(self.start.as_array()) and self.region.contains(self.goal.as_array())):
            raise ValueError("Start {} and goal {} must lie inside the region".format(self.start, self.goal))
        d_max = max(self.goal.distance_to(corner) for corner in self.region.corners())
        object.__setattr__(self, "d_max", d_max)


@dataclass(frozen=True)
class PlannerWeights:
    alpha_e: float
    alpha_u: float
    alpha_s: float

    def __post_init__(self):
        if min(self.as_tuple()) < 0:
            raise ValueError("Planner weights must be non-negative, got {}".format(self.as_tuple()))
        if sum(self.as_tuple()) <= 0:
            raise ValueError("At least one planner weight must be positive")

    def as_tuple(self):
        return (self.alpha_e, self.alpha_u, self.alpha_s)

    @property
    def on_simplex(self):
        return abs(sum(self.as_tuple()) - 1.0) < 1e-9

    def normalized(self):
        total = sum(self.as_tuple())
        return PlannerWeights(*(w / total for w in self.as_tuple()))


BEST_WEIGHTS = PlannerWeights(0.25, 0.667, 0.083)


@dataclass(frozen=True)
class ScenarioConfig:
    region: Region = field(default_factory=lambda: Region((0.0, 0.0), (22000.0, 22000.0)))
    radar_count: int = 13
    p_t_lower: float = 0.0
    p_t_upper: float = 20000.0
    g_t_lower_db: float = 0.0
    g_t_upper_db: float = 20.0
    g_r_db: float = 10.0
    loss_db: float = 0.0
    wavelength: float = 0.0999
    pulse_width: float = 1.1e-5
    system_temp: float = 745.0
    p_fa: float = 1e-4
    g_i_db: float = 1.0
    rcs: float = 0.1
    sigma_se: float = 1e-6
    sigma_phi_deg: float = 2.0
    n_agents: int = 10
    lp_speed: float = 50.0
    seed: int = 0
    tick: float = 1.0
    dt_e: float = 5.0
    t_h: float = 20.0
    delta_l: float = 1e8
    d_cov: float = 1e14
    phi_prior: float = 0.5
    intercept_p_t: float = 10000.0
    intercept_g_t_db: float = 10.0
    n_z_min: int = 5
    arrival_radius: float = 100.0

    def __post_init__(self):
        if self.radar_count < 0:
            raise ValueError("radar_count must be non-negative, got {}".format(self.radar_count))
        for lower, upper in (("p_t_lower", "p_t_upper"), ("g_t_lower_db", "g_t_upper_db")):
            if getattr(self, lower) > getattr(self, upper):
                raise ValueError(
                    "Degenerate range: {}={} exceeds {}={}".format(lower, getattr(self, lower), upper, getattr(self, upper))
                )
        if self.p_t_lower < 0:
            raise ValueError("Transmit power range must be non-negative")
        if not 0 < self.p_fa < 1:
            raise ValueError("p_fa must lie in (0, 1), got {}".format(self.p_fa))
        if not 0 < self.phi_prior < 1:
            raise ValueError("phi_prior must lie in (0, 1), got {}".format(self.phi_prior))
        for name in ("wavelength", "pulse_width", "system_temp", "sigma_se", "sigma_phi_deg", "lp_speed", "tick", "dt_e", "t_h", "delta_l", "d_cov"):
            if getattr(self, name) <= 0:
                raise ValueError("{} must be positive, got {}".format(name, getattr(self, name)))
        if self.n_agents < 1:
            raise ValueError("n_agents must be at least 1, got {}".format(self.n_agents))

    @property
    def g_r(self):
        return float(utils.db_to_linear(self.g_r_db))

    @property
    def loss(self):
        return float(utils.db_to_linear(self.loss_db))

    @property
    def g_i(self):
        return float(utils.db_to_linear(self.g_i_db))

    @property
    def sigma_phi(self):
        return math.radians(self.sigma_phi_deg)


def generate_scenario(config):
    from .radar import RadarTruth

    rng = utils.rng_stream(config.seed, "scenario")
    n = config.radar_count
    region = config.region
    xs = rng.uniform(region.lower.x, region.upper.x, size=n)
    ys = rng.uniform(region.lower.y, region.upper.y, size=n)
    p_t = np.maximum(rng.uniform(config.p_t_lower, config.p_t_upper, size=n), MIN_TRANSMIT_POWER)
    g_t = utils.db_to_linear(rng.uniform(config.g_t_lower_db, config.g_t_upper_db, size=n))
    return [
        RadarTruth(
            radar_id=j,
            position=Position2(xs[j], ys[j]),
            p_t=p_t[j],
            g_t=g_t[j],
            g_r=config.g_r,
            wavelength=config.wavelength,
            pulse_width=config.pulse_width,
            system_temp=config.system_temp,
            loss=config.loss,
            p_fa=config.p_fa,
        )
        for j in range(n)
    ]


def unicycle_step(state, turn_rate, dt):
    """Integrate the unicycle model over dt with constant speed and turn rate.

    The constant-input solution is exact, so the arc closes on itself after
    one full period regardless of dt.
    """
    if dt <= 0:
        raise ValueError("dt must be positive, got {}".format(dt))
    x, y = state.position
    theta, v = state.heading, state.speed
    if abs(turn_rate) < 1e-12:
        x += v * dt * math.cos(theta)
        y += v * dt * math.sin(theta)
    else:
        theta_next = theta + turn_rate * dt
        x += v / turn_rate * (math.sin(theta_next) - math.sin(theta))
        y += v / turn_rate * (math.cos(theta) - math.cos(theta_next))
    return AgentState(Position2(x, y), theta + turn_rate * dt, v)
