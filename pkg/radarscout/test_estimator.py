import math

import mock
import numpy as np
import pytest
from scipy import stats

from . import estimator, radar, utils
from .core import Position2
from .estimator import RadarEstimate, TrackStore
from .radar import Measurement, NoiseModel

G_I = 10 ** 0.1
WAVELENGTH = 0.0999
TRUTH = np.array([10000.0, 12000.0, 1e5])


def ring(center, radius, n, start=0.0, sweep=math.pi):
    angles = start + np.linspace(0.0, sweep, n)
    return np.asarray(center)[None, :] + radius * np.column_stack([np.cos(angles), np.sin(angles)])


def exact_measurements(locations, mean=TRUTH, radar_id=0):
    out = []
    for k, location in enumerate(locations):
        s_e, phi = estimator.measurement_model(location, mean, G_I, WAVELENGTH)
        out.append(Measurement(s_e, phi, location, agent_id=0, radar_id=radar_id, time=float(k)))
    return out


def test_estimate_properties(estimate_factory):
    est = estimate_factory(x=1.0, y=2.0, erp=3.0, position_std=2.0, erp_std=1.0)
    assert est.position == Position2(1.0, 2.0)
    assert est.erp == 3.0
    assert est.det == pytest.approx(16.0)
    assert est.as_dict()["mean"] == [1.0, 2.0, 3.0]


def test_measurement_model_bearing_points_at_radar():
    s_e, phi = estimator.measurement_model((10000.0, 11000.0), TRUTH, G_I, WAVELENGTH)
    assert phi == pytest.approx(math.pi / 2)
    assert s_e == pytest.approx(radar.received_power(1e5, G_I, WAVELENGTH, 1000.0 ** 2))


def test_measurement_model_at_radar_raises():
    with pytest.raises(utils.SingularityError):
        estimator.measurement_model((10000.0, 12000.0), TRUTH, G_I, WAVELENGTH)
    with pytest.raises(utils.SingularityError):
        estimator.measurement_jacobian((10000.0, 12000.0), TRUTH, G_I, WAVELENGTH)


@pytest.mark.parametrize(
    "location",
    [
        pytest.param((7000.0, 9000.0), id="south west"),
        pytest.param((15000.0, 12500.0), id="east"),
        pytest.param((9000.0, 20000.0), id="north"),
    ],
)
def test_measurement_jacobian_matches_finite_differences(location):
    jac = estimator.measurement_jacobian(location, TRUTH, G_I, WAVELENGTH)
    steps = np.array([1e-2, 1e-2, 1.0])
    for i in range(3):
        offset = np.zeros(3)
        offset[i] = steps[i]
        numeric = (
            estimator.measurement_model(location, TRUTH + offset, G_I, WAVELENGTH)
            - estimator.measurement_model(location, TRUTH - offset, G_I, WAVELENGTH)
        ) / (2 * steps[i])
        assert jac[:, i] == pytest.approx(numeric, rel=1e-6, abs=1e-18)


def test_min_range_floors_jacobian():
    jac = estimator.measurement_jacobians(TRUTH[None, :2], TRUTH, G_I, WAVELENGTH, min_range=1.0)
    assert np.all(np.isfinite(jac))


def test_covariance_update_shrinks_uncertainty():
    cov = np.diag([100.0 ** 2, 100.0 ** 2, 1e4 ** 2])
    jac = estimator.measurement_jacobian((5000.0, 5000.0), TRUTH, G_I, WAVELENGTH)
    noise = NoiseModel(1e-9, math.radians(2.0))
    updated, gain = estimator.covariance_update(cov, jac, noise.covariance)
    assert gain.shape == (3, 2)
    assert np.linalg.det(updated) < np.linalg.det(cov)
    assert np.allclose(updated, updated.T)
    assert np.linalg.eigvalsh(updated).min() > 0


def test_ekf_update_moves_toward_measurement():
    noise = NoiseModel(1e-9, math.radians(2.0))
    prior = RadarEstimate(0, TRUTH + np.array([300.0, 0.0, 0.0]), np.diag([500.0 ** 2, 500.0 ** 2, 1e4 ** 2]), 5)
    location = (10000.0, 6000.0)
    m = exact_measurements([location])[0]
    posterior = estimator.ekf_update(prior, m, noise, G_I, WAVELENGTH)
    assert posterior.n_measurements == 6
    assert abs(posterior.mean[0] - TRUTH[0]) < 300.0
    assert posterior.det < prior.det


def test_ekf_update_rejects_singular_innovation():
    noise = NoiseModel(0.0, 0.0)
    prior = RadarEstimate(0, TRUTH, np.zeros((3, 3)), 5)
    m = exact_measurements([(5000.0, 5000.0)])[0]
    with pytest.raises(utils.SingularityError):
        estimator.ekf_update(prior, m, noise, G_I, WAVELENGTH)


def test_nls_recovers_truth_without_noise():
    noise = NoiseModel(1e-6, math.radians(2.0))
    locations = ring(TRUTH[:2], 4000.0, 8, start=-0.3, sweep=2.0)
    est = estimator.nls_initialize(exact_measurements(locations), locations, noise, G_I, WAVELENGTH, radar_id=7)
    assert est is not None
    assert est.radar_id == 7
    assert est.n_measurements == 8
    assert est.mean[:2] == pytest.approx(TRUTH[:2], rel=1e-3)
    assert est.mean[2] == pytest.approx(TRUTH[2], rel=1e-3)
    assert np.linalg.eigvalsh(est.cov).min() > 0


def test_nls_defers_with_one_site():
    noise = NoiseModel(1e-6, math.radians(2.0))
    locations = [(5000.0, 5000.0)] * 5
    assert estimator.nls_initialize(exact_measurements(locations), locations, noise, G_I, WAVELENGTH) is None


def test_nls_requires_locations_per_measurement():
    noise = NoiseModel(1e-6, math.radians(2.0))
    locations = ring(TRUTH[:2], 4000.0, 3)
    with pytest.raises(ValueError):
        estimator.nls_initialize(exact_measurements(locations), locations[:2], noise, G_I, WAVELENGTH)


def test_ekf_consistency_by_nees():
    noise = NoiseModel(1e-6, math.radians(2.0))
    rng = utils.rng_stream(5, "noise")
    cov0 = np.diag([50.0 ** 2, 50.0 ** 2, 1e4 ** 2])
    locations = ring(TRUTH[:2], 5000.0, 10, start=3.5, sweep=1.5)
    reps = 200
    nees = []
    for _ in range(reps):
        est = RadarEstimate(0, rng.multivariate_normal(TRUTH, cov0), cov0, 5)
        for location in locations:
            s_e, phi = estimator.measurement_model(location, TRUTH, G_I, WAVELENGTH)
            draws = rng.standard_normal(2)
            m = Measurement(s_e + noise.sigma_se * draws[0], phi + noise.sigma_phi * draws[1], location, 0, 0)
            est = estimator.ekf_update(est, m, noise, G_I, WAVELENGTH)
        err = est.mean - TRUTH
        nees.append(err @ np.linalg.solve(est.cov, err))
    lower = stats.chi2.ppf(0.0005, 3 * reps) / reps
    upper = stats.chi2.ppf(0.9995, 3 * reps) / reps
    assert lower <= np.mean(nees) <= upper


def test_track_store_initializes_after_enough_measurements():
    noise = NoiseModel(1e-6, math.radians(2.0))
    callback = mock.Mock()
    store = TrackStore(noise, G_I, WAVELENGTH, n_z_min=5, on_initialized=callback)
    locations = ring(TRUTH[:2], 4000.0, 7, start=-0.3, sweep=2.0)
    measurements = exact_measurements(locations, radar_id=3)
    for m in measurements[:4]:
        store.ingest(m)
    assert not store.initialized(3)
    assert store.estimates() == []
    store.ingest(measurements[4])
    assert store.initialized(3)
    callback.assert_called_once_with(store.estimate(3))
    assert store.estimate(3).n_measurements == 5
    estimator.ingest(store, measurements[5])
    store.ingest(measurements[6])
    assert store.estimate(3).n_measurements == 7
    assert store.measurement_count() == 7
    assert store.measurement_count(3) == 7
    assert callback.call_count == 1
    export = store.export()
    assert len(export) == 1
    assert export[0]["radar_id"] == 3
    assert export[0]["measurement_count"] == 7


def test_track_store_keeps_radars_apart():
    noise = NoiseModel(1e-6, math.radians(2.0))
    store = TrackStore(noise, G_I, WAVELENGTH, n_z_min=2)
    other = np.array([3000.0, 3000.0, 5e4])
    a = exact_measurements(ring(TRUTH[:2], 4000.0, 3), radar_id=0)
    b = exact_measurements(ring(other[:2], 4000.0, 3), mean=other, radar_id=1)
    for m in a[:1] + b[:1]:
        store.ingest(m)
    assert store.measurement_count(0) == 1
    assert store.measurement_count(1) == 1
    assert not store.initialized(0)


def test_track_store_from_config(scenario):
    store = TrackStore.from_config(scenario)
    assert store.n_z_min == scenario.n_z_min
    assert store.region == scenario.region
    assert store.g_i == pytest.approx(scenario.g_i)
