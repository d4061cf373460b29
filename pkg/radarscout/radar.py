import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

from . import utils
from .core import Position2

BOLTZMANN = constants.Boltzmann
FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class RadarTruth:
    radar_id: int
    position: Position2
    p_t: float
    g_t: float
    g_r: float
    wavelength: float
    pulse_width: float
    system_temp: float
    loss: float
    p_fa: float

    def __post_init__(self):
        object.__setattr__(self, "position", Position2.of(self.position))
        for name in ("p_t", "g_t", "g_r", "wavelength", "pulse_width", "system_temp", "loss"):
            value = float(getattr(self, name))
            if value <= 0:
                raise ValueError("Radar {} must be positive, got {}".format(name, value))
            object.__setattr__(self, name, value)
        if not 0 < self.p_fa < 1:
            raise ValueError("p_fa must lie in (0, 1), got {}".format(self.p_fa))

    @property
    def erp(self):
        return erp(self)

    def as_dict(self):
        data = {name: getattr(self, name) for name in self.__dataclass_fields__}
        data["position"] = [self.position.x, self.position.y]
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True)
class KnownAgentParams:
    sigma: float
    position: Position2
    g_i: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", Position2.of(self.position))
        if self.sigma < 0:
            raise ValueError("RCS must be non-negative, got {}".format(self.sigma))

    def at(self, position):
        return KnownAgentParams(self.sigma, position, self.g_i)


@dataclass(frozen=True)
class NoiseModel:
    sigma_se: float
    sigma_phi: float

    @property
    def covariance(self):
        return np.diag([self.sigma_se ** 2, self.sigma_phi ** 2])

    @classmethod
    def from_config(cls, config):
        return cls(config.sigma_se, config.sigma_phi)


@dataclass(frozen=True)
class Measurement:
    s_e: float
    phi: float
    location: Position2
    agent_id: int
    radar_id: int
    time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "location", Position2.of(self.location))
        object.__setattr__(self, "phi", utils.wrap_angle(self.phi))

    def as_dict(self):
        return {
            "s_e": self.s_e,
            "phi": self.phi,
            "location": [self.location.x, self.location.y],
            "agent_id": self.agent_id,
            "radar_id": self.radar_id,
            "time": self.time,
        }


def erp(radar):
    return radar.p_t * radar.g_t / radar.loss


def _range_sq(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    delta = b - a
    return np.sum(delta * delta, axis=-1)


def received_power(p_e, g_i, wavelength, range_sq):
    return p_e * g_i * wavelength ** 2 / (FOUR_PI ** 2 * range_sq)


def snr(p_e, g_r, wavelength, rcs, pulse_width, system_temp, loss, range_sq):
    return (
        p_e * g_r * wavelength ** 2 * rcs * pulse_width
        / (FOUR_PI ** 3 * range_sq ** 2 * BOLTZMANN * system_temp * loss)
    )


def intercept_power(agent, radar):
    range_sq = _range_sq(agent.position.as_array(), radar.position.as_array())
    if range_sq == 0:
        raise ValueError("Agent and radar {} coincide; received power undefined".format(radar.radar_id))
    return float(received_power(erp(radar), agent.g_i, radar.wavelength, range_sq))


def detection_snr(agent, radar):
    range_sq = _range_sq(agent.position.as_array(), radar.position.as_array())
    if range_sq == 0:
        raise ValueError("Agent and radar {} coincide; SNR undefined".format(radar.radar_id))
    return float(
        snr(erp(radar), radar.g_r, radar.wavelength, agent.sigma, radar.pulse_width, radar.system_temp, radar.loss, range_sq)
    )


def pd_single(snr_value, p_fa):
    p_fa = np.asarray(p_fa, dtype=float)
    if np.any((p_fa <= 0) | (p_fa >= 1)):
        raise ValueError("p_fa must lie in (0, 1), got {}".format(p_fa))
    snr_value = np.asarray(snr_value, dtype=float)
    if np.any(snr_value < 0):
        raise ValueError("SNR must be non-negative")
    pd = np.exp(np.log(p_fa) / (snr_value + 1.0))
    if pd.ndim == 0:
        return float(pd)
    return pd


def combine_pd(pds, axis=-1):
    # empty product is 1, so no radars means PD 0
    return 1.0 - np.prod(1.0 - np.asarray(pds, dtype=float), axis=axis)


def pd_overall(agent, radars):
    if not radars:
        return 0.0
    pds = [pd_single(detection_snr(agent, radar), radar.p_fa) for radar in radars]
    return float(combine_pd(pds))


def radar_arrays(radars):
    """Stack radar parameters column-wise for vectorized field evaluation."""
    return {
        "position": np.array([[r.position.x, r.position.y] for r in radars]).reshape(-1, 2),
        "erp": np.array([erp(r) for r in radars]),
        "g_r": np.array([r.g_r for r in radars]),
        "wavelength": np.array([r.wavelength for r in radars]),
        "pulse_width": np.array([r.pulse_width for r in radars]),
        "system_temp": np.array([r.system_temp for r in radars]),
        "loss": np.array([r.loss for r in radars]),
        "p_fa": np.array([r.p_fa for r in radars]),
    }


def pd_field(points, radars, rcs, with_gradient=False):
    """Overall PD at each of the (P, 2) points, optionally with d(PD)/d(point).

    Points on top of a radar are assigned PD = 1 and zero gradient.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not radars:
        pd = np.zeros(len(points))
        return (pd, np.zeros_like(points)) if with_gradient else pd
    params = radar_arrays(radars)
    delta = params["position"][None, :, :] - points[:, None, :]
    range_sq = np.sum(delta * delta, axis=-1)
    coincident = range_sq == 0
    safe_sq = np.where(coincident, 1.0, range_sq)
    s = snr(
        params["erp"], params["g_r"], params["wavelength"], rcs,
        params["pulse_width"], params["system_temp"], params["loss"], safe_sq,
    )
    log_pfa = np.log(params["p_fa"])
    pd_j = np.where(coincident, 1.0, np.exp(log_pfa / (s + 1.0)))
    pd = 1.0 - np.prod(1.0 - pd_j, axis=1)
    if not with_gradient:
        return pd
    others = _product_of_others(1.0 - pd_j)
    dpd_ds = -pd_j * log_pfa / (s + 1.0) ** 2
    # dS/d(agent) = 4 S (radar - agent) / R^2
    ds_dx = 4.0 * s[..., None] * delta / safe_sq[..., None]
    grad = np.sum((others * dpd_ds)[..., None] * ds_dx * (~coincident)[..., None], axis=1)
    return pd, grad


def _product_of_others(values):
    """For each column j, the product of all other columns along axis 1."""
    ones = np.ones_like(values[:, :1])
    prefix = np.cumprod(np.concatenate([ones, values[:, :-1]], axis=1), axis=1)
    suffix = np.cumprod(np.concatenate([ones, values[:, :0:-1]], axis=1), axis=1)[:, ::-1]
    return prefix * suffix


def sample_measurement(agent, radar, noise, rng, agent_id=0, time=0.0):
    mean_power = intercept_power(agent, radar)
    delta = radar.position.as_array() - agent.position.as_array()
    mean_phi = math.atan2(delta[1], delta[0])
    draws = rng.standard_normal(2)
    return Measurement(
        s_e=mean_power + noise.sigma_se * draws[0],
        phi=utils.wrap_angle(mean_phi + noise.sigma_phi * draws[1]),
        location=agent.position,
        agent_id=agent_id,
        radar_id=radar.radar_id,
        time=time,
    )


def intercept_snr(distance_sq, p_t, g_t, g_i, wavelength, pulse_width, system_temp, loss, discount):
    return (
        p_t * g_t * g_i * wavelength ** 2 * pulse_width
        / (FOUR_PI ** 2 * distance_sq * BOLTZMANN * system_temp * loss * discount)
    )


def _intercept_probability(distance_sq, p_fa, **radar):
    distance_sq = np.asarray(distance_sq, dtype=float)
    coincident = distance_sq == 0
    s = intercept_snr(np.where(coincident, 1.0, distance_sq), **radar)
    prob = np.where(coincident, 1.0, np.exp(np.log(p_fa) / (s + 1.0)))
    if prob.ndim == 0:
        return float(prob)
    return prob


def _default_intercept_params(config):
    return dict(
        p_t=config.intercept_p_t,
        g_t=float(utils.db_to_linear(config.intercept_g_t_db)),
        g_i=config.g_i,
        wavelength=config.wavelength,
        pulse_width=config.pulse_width,
        system_temp=config.system_temp,
        loss=config.loss,
        discount=config.delta_l,
    )


def intercept_probability(agent_pos, candidate_radar_pos, config):
    """Chance an agent at agent_pos would intercept a default radar at candidate_radar_pos.

    Both arguments may be (..., 2) arrays; they broadcast against each other.
    """
    if isinstance(agent_pos, Position2):
        agent_pos = agent_pos.as_array()
    if isinstance(candidate_radar_pos, Position2):
        candidate_radar_pos = candidate_radar_pos.as_array()
    distance_sq = _range_sq(agent_pos, candidate_radar_pos)
    return _intercept_probability(distance_sq, config.p_fa, **_default_intercept_params(config))


def true_intercept_probability(agent_pos, radar, config):
    """Intercept chance against an actual radar, used for the simulated measurement trigger."""
    if isinstance(agent_pos, Position2):
        agent_pos = agent_pos.as_array()
    distance_sq = _range_sq(agent_pos, radar.position.as_array())
    return _intercept_probability(
        distance_sq,
        radar.p_fa,
        p_t=radar.p_t,
        g_t=radar.g_t,
        g_i=config.g_i,
        wavelength=radar.wavelength,
        pulse_width=radar.pulse_width,
        system_temp=radar.system_temp,
        loss=radar.loss,
        discount=config.delta_l,
    )


def effective_intercept_radius(config):
    """Distance at which intercept_probability falls to twice p_fa."""
    # exp(ln p_fa / (S + 1)) = 2 p_fa  =>  S = ln p_fa / ln(2 p_fa) - 1
    target = math.log(config.p_fa) / math.log(2.0 * config.p_fa) - 1.0
    unit = intercept_snr(1.0, **_default_intercept_params(config))
    return math.sqrt(unit / target)
