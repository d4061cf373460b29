import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import radar, utils
from .core import Position2

log = logging.getLogger("radarscout")

# Condition number bound on the scaled Fisher information (and the innovation
# correlation) above which a matrix is treated as singular.
FIM_CONDITION_LIMIT = 1e12
MIN_ERP = 1e-12


@dataclass(frozen=True, eq=False)
class RadarEstimate:
    radar_id: int
    mean: np.ndarray
    cov: np.ndarray
    n_measurements: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float).reshape(3))
        object.__setattr__(self, "cov", utils.clamp_psd(np.asarray(self.cov, dtype=float).reshape(3, 3)))

    @property
    def position(self):
        return Position2(self.mean[0], self.mean[1])

    @property
    def erp(self):
        return float(self.mean[2])

    @property
    def det(self):
        return float(np.linalg.det(self.cov))

    def as_dict(self):
        return {
            "radar_id": self.radar_id,
            "mean": self.mean.tolist(),
            "cov": self.cov.tolist(),
            "n_measurements": self.n_measurements,
        }


def _deltas(points, mean):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    delta = np.asarray(mean[:2], dtype=float)[None, :] - points
    return delta, np.sum(delta * delta, axis=1)


def measurement_model(location, mean, g_i, wavelength):
    """Predicted (received power, bearing) for a radar state (x_r, y_r, P_E)."""
    location = Position2.of(location).as_array()
    delta, r2 = _deltas(location, mean)
    if r2[0] == 0:
        raise utils.SingularityError("Measurement model undefined at the radar position")
    power = radar.received_power(mean[2], g_i, wavelength, r2[0])
    return np.array([power, math.atan2(delta[0, 1], delta[0, 0])])


def measurement_jacobians(points, mean, g_i, wavelength, min_range=0.0):
    """d(S_E, phi)/d(x_r, y_r, P_E) at each of the (P, 2) points as (P, 2, 3).

    min_range floors the distance used by the derivatives; 0 rejects
    evaluations at the radar position.
    """
    delta, r2 = _deltas(points, mean)
    if min_range > 0:
        r2 = np.maximum(r2, min_range ** 2)
    elif np.any(r2 == 0):
        raise utils.SingularityError("Measurement Jacobian undefined at the radar position")
    unit_power = radar.received_power(1.0, g_i, wavelength, r2)
    power = unit_power * mean[2]
    jac = np.zeros((len(r2), 2, 3))
    jac[:, 0, 0] = -2.0 * power * delta[:, 0] / r2
    jac[:, 0, 1] = -2.0 * power * delta[:, 1] / r2
    jac[:, 0, 2] = unit_power
    jac[:, 1, 0] = -delta[:, 1] / r2
    jac[:, 1, 1] = delta[:, 0] / r2
    return jac


def measurement_jacobian(location, mean, g_i, wavelength):
    return measurement_jacobians(Position2.of(location).as_array(), mean, g_i, wavelength)[0]


def covariance_update(cov, jac, noise_cov):
    """Joseph-form covariance update; broadcasts over leading axes of jac."""
    cov = np.asarray(cov, dtype=float)
    jac_t = np.swapaxes(jac, -1, -2)
    innovation = jac @ cov @ jac_t + noise_cov
    gain = cov @ jac_t @ np.linalg.inv(innovation)
    a = np.eye(3) - gain @ jac
    updated = a @ cov @ np.swapaxes(a, -1, -2) + gain @ noise_cov @ np.swapaxes(gain, -1, -2)
    return utils.symmetrize(updated), gain


def ekf_update(estimate, measurement, noise, g_i, wavelength):
    jac = measurement_jacobian(measurement.location, estimate.mean, g_i, wavelength)
    innovation_cov = jac @ estimate.cov @ jac.T + noise.covariance
    spread = np.sqrt(np.diag(innovation_cov))
    if not np.all(np.isfinite(innovation_cov)) or np.any(spread == 0):
        raise utils.SingularityError("Innovation covariance is singular for radar {}".format(estimate.radar_id))
    if np.linalg.cond(innovation_cov / np.outer(spread, spread)) > FIM_CONDITION_LIMIT:
        raise utils.SingularityError("Innovation covariance is singular for radar {}".format(estimate.radar_id))
    predicted = measurement_model(measurement.location, estimate.mean, g_i, wavelength)
    residual = np.array([measurement.s_e - predicted[0], utils.wrap_angle(measurement.phi - predicted[1])])
    cov, gain = covariance_update(estimate.cov, jac, noise.covariance)
    mean = estimate.mean + gain @ residual
    mean[2] = max(mean[2], MIN_ERP)
    return RadarEstimate(estimate.radar_id, mean, utils.clamp_psd(cov), estimate.n_measurements + 1)


def _bearing_intersections(z, locations):
    points = []
    units = np.column_stack([np.cos(z[:, 1]), np.sin(z[:, 1])])
    for k, l in itertools.combinations(range(len(z)), 2):
        cross = units[k, 0] * units[l, 1] - units[k, 1] * units[l, 0]
        if abs(cross) < 1e-3:
            continue
        d = locations[l] - locations[k]
        t = (d[0] * units[l, 1] - d[1] * units[l, 0]) / cross
        s = (d[0] * units[k, 1] - d[1] * units[k, 0]) / cross
        if t > 0 and s > 0:
            points.append(locations[k] + t * units[k])
    if not points:
        return None
    return np.mean(points, axis=0)


def _power_range_seed(z, locations):
    positive = np.flatnonzero(z[:, 0] > 0)
    if len(positive) < 2:
        return None
    strong = positive[np.argmax(z[positive, 0])]
    weak = positive[np.argmin(z[positive, 0])]
    if strong == weak or np.allclose(locations[strong], locations[weak]):
        return None
    # point on the strong bearing whose range ratio matches the power ratio
    rho_sq = z[weak, 0] / z[strong, 0]
    u = np.array([math.cos(z[strong, 1]), math.sin(z[strong, 1])])
    d = locations[strong] - locations[weak]
    a, b, c = rho_sq - 1.0, 2.0 * rho_sq * d @ u, rho_sq * d @ d
    if abs(a) < 1e-12:
        roots = [-c / b] if b != 0 else []
    else:
        disc = b * b - 4 * a * c
        if disc < 0:
            return None
        roots = [(-b - math.sqrt(disc)) / (2 * a), (-b + math.sqrt(disc)) / (2 * a)]
    roots = [r for r in roots if r > 0]
    if not roots:
        return None
    return locations[strong] + min(roots) * u


def _erp_seed(position, z, locations, g_i, wavelength):
    positive = z[:, 0] > 0
    if not np.any(positive):
        return 1e5
    r2 = np.sum((locations[positive] - position) ** 2, axis=1)
    r2 = np.maximum(r2, 1.0)
    unit = radar.received_power(1.0, g_i, wavelength, r2)
    return max(float(np.median(z[positive, 0] / unit)), 1.0)


def _seeds(z, locations, g_i, wavelength, region):
    positions = [_bearing_intersections(z, locations), _power_range_seed(z, locations)]
    if region is not None:
        positions.append(region.center.as_array())
    else:
        positions.append(locations.mean(axis=0) + 1000.0 * np.array([math.cos(z[0, 1]), math.sin(z[0, 1])]))
    seeds = []
    for position in positions:
        if position is None or not np.all(np.isfinite(position)):
            continue
        p_e = _erp_seed(position, z, locations, g_i, wavelength)
        seeds.append(np.array([position[0], position[1], math.log(p_e)]))
    return seeds


def nls_initialize(measurements, locations, noise, g_i, wavelength, region=None, radar_id=None):
    """Fit (x_r, y_r, P_E) to the measurements; None when the geometry cannot support it yet."""
    z = np.array([[m.s_e, m.phi] for m in measurements], dtype=float)
    locations = np.array([list(Position2.of(p)) for p in locations], dtype=float)
    if len(z) != len(locations):
        raise ValueError("Every measurement needs a location")
    if len(np.unique(locations, axis=0)) < 2:
        log.debug("Deferring initialization of radar {}: fewer than two distinct sites".format(radar_id))
        return None
    if radar_id is None:
        radar_id = measurements[0].radar_id
    scale = np.array([noise.sigma_se, noise.sigma_phi])

    def residuals(theta):
        mean = np.array([theta[0], theta[1], math.exp(theta[2])])
        delta, r2 = _deltas(locations, mean)
        r2 = np.maximum(r2, 1e-6)
        power = radar.received_power(mean[2], g_i, wavelength, r2)
        phi = np.arctan2(delta[:, 1], delta[:, 0])
        res = np.column_stack([power - z[:, 0], utils.wrap_angle(phi - z[:, 1])]) / scale
        return res.reshape(-1)

    best = None
    for seed in _seeds(z, locations, g_i, wavelength, region):
        try:
            result = optimize.least_squares(
                residuals, seed, method="lm", x_scale=np.array([1000.0, 1000.0, 1.0]),
                ftol=1e-12, xtol=1e-12, gtol=1e-12, max_nfev=4000,
            )
        except (ValueError, np.linalg.LinAlgError) as exc:
            log.debug("NLS seed {} failed for radar {}: {}".format(seed, radar_id, exc))
            continue
        if not np.all(np.isfinite(result.x)):
            continue
        if best is None or result.cost < best.cost:
            best = result
    if best is None:
        return None

    mean = np.array([best.x[0], best.x[1], math.exp(best.x[2])])
    try:
        jac = measurement_jacobians(locations, mean, g_i, wavelength)
    except utils.SingularityError:
        return None
    whitened = jac / scale[None, :, None]
    fim = np.einsum("kai,kaj->ij", whitened, whitened)
    units = np.diag([1000.0, 1000.0, mean[2]])
    if not np.all(np.isfinite(fim)) or np.linalg.cond(units @ fim @ units) > FIM_CONDITION_LIMIT:
        log.debug("Deferring initialization of radar {}: Fisher information is rank deficient".format(radar_id))
        return None
    cov = np.linalg.inv(fim)
    return RadarEstimate(radar_id, mean, utils.clamp_psd(cov), len(z))


class TrackStore(object):
    def __init__(self, noise, g_i, wavelength, n_z_min=5, region=None, on_initialized=None):
        self.noise = noise
        self.g_i = g_i
        self.wavelength = wavelength
        self.n_z_min = n_z_min
        self.region = region
        self.on_initialized = on_initialized
        self.measurements = {}
        self.locations = {}
        self._estimates = {}

    @classmethod
    def from_config(cls, config, **kwargs):
        return cls(
            radar.NoiseModel.from_config(config), config.g_i, config.wavelength,
            n_z_min=config.n_z_min, region=config.region, **kwargs
        )

    def initialized(self, radar_id):
        return radar_id in self._estimates

    def estimate(self, radar_id):
        return self._estimates.get(radar_id)

    def estimates(self):
        return [self._estimates[k] for k in sorted(self._estimates)]

    def measurement_count(self, radar_id=None):
        if radar_id is None:
            return sum(len(v) for v in self.measurements.values())
        return len(self.measurements.get(radar_id, ()))

    def ingest(self, m, n_z_min=None):
        n_z_min = self.n_z_min if n_z_min is None else n_z_min
        self.measurements.setdefault(m.radar_id, []).append(m)
        self.locations.setdefault(m.radar_id, []).append(m.location)

        current = self._estimates.get(m.radar_id)
        if current is not None:
            try:
                self._estimates[m.radar_id] = ekf_update(current, m, self.noise, self.g_i, self.wavelength)
            except utils.SingularityError as exc:
                log.warning("Skipping update of radar {}: {}".format(m.radar_id, exc))
            return self

        if len(self.measurements[m.radar_id]) < n_z_min:
            return self
        estimate = nls_initialize(
            self.measurements[m.radar_id], self.locations[m.radar_id], self.noise,
            self.g_i, self.wavelength, region=self.region, radar_id=m.radar_id,
        )
        if estimate is not None:
            self._estimates[m.radar_id] = estimate
            log.info(
                "Initialized radar {} at ({:.0f}, {:.0f}) from {} measurements".format(
                    m.radar_id, estimate.mean[0], estimate.mean[1], estimate.n_measurements
                )
            )
            if self.on_initialized:
                self.on_initialized(estimate)
        return self

    def export(self):
        return [
            dict(estimate.as_dict(), measurement_count=self.measurement_count(estimate.radar_id))
            for estimate in self.estimates()
        ]


def ingest(store, m, n_z_min=None):
    return store.ingest(m, n_z_min)
