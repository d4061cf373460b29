import math

import numpy as np
from scipy import interpolate, optimize

from . import utils
from .core import Position2

# relative slack when checking that an evaluation time lies in [t0, tf]
DOMAIN_TOL = 1e-12


def uniform_knots(n_control, degree, t0, tf):
    """Unclamped uniform knots whose base interval [t_p, t_{N_c}] is exactly [t0, tf]."""
    step = (tf - t0) / (n_control - degree)
    return t0 + step * (np.arange(n_control + degree + 1) - degree)


class BSplineTrajectory(object):
    def __init__(self, control_points, degree=3, t0=0.0, tf=1.0):
        if not isinstance(control_points, np.ndarray):
            control_points = [list(Position2.of(c)) for c in control_points]
        control_points = np.asarray(control_points, dtype=float)
        if control_points.ndim != 2 or control_points.shape[1] != 2:
            raise ValueError("Control points must be an (N_c, 2) array")
        if degree < 0:
            raise ValueError("Degree must be non-negative, got {}".format(degree))
        if len(control_points) < degree + 1:
            raise ValueError("Need at least {} control points for degree {}, got {}".format(degree + 1, degree, len(control_points)))
        if not tf > t0:
            raise ValueError("Trajectory interval must satisfy t0 < tf, got [{}, {}]".format(t0, tf))
        self.control_points = control_points
        self.degree = int(degree)
        self.t0 = float(t0)
        self.tf = float(tf)
        self.knots = uniform_knots(len(control_points), self.degree, self.t0, self.tf)
        self._spline = interpolate.BSpline(self.knots, control_points, self.degree, extrapolate=False)
        self._derivatives = {0: self._spline}

    @property
    def n_control(self):
        return len(self.control_points)

    @property
    def duration(self):
        return self.tf - self.t0

    def _check_domain(self, t):
        t = np.asarray(t, dtype=float)
        slack = DOMAIN_TOL * max(1.0, abs(self.t0), abs(self.tf))
        if np.any(t < self.t0 - slack) or np.any(t > self.tf + slack):
            raise ValueError("Evaluation time outside [{}, {}]".format(self.t0, self.tf))
        return np.clip(t, self.t0, self.tf)

    def derivative_spline(self, order):
        if order not in self._derivatives:
            self._derivatives[order] = self._spline.derivative(order)
        return self._derivatives[order]

    def eval(self, t, derivative_order=0):
        t = self._check_domain(t)
        if derivative_order > self.degree:
            return np.zeros(np.shape(t) + (2,))
        return self.derivative_spline(derivative_order)(t)

    def __call__(self, t, derivative_order=0):
        return self.eval(t, derivative_order)

    def sample(self, n, derivative_order=0):
        """Values at n+1 evenly spaced times covering [t0, tf]."""
        times = np.linspace(self.t0, self.tf, n + 1)
        return times, self.eval(times, derivative_order)

    def as_dict(self):
        return {
            "degree": self.degree,
            "t0": self.t0,
            "tf": self.tf,
            "control_points": self.control_points.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(np.asarray(data["control_points"], dtype=float), data["degree"], data["t0"], data["tf"])

    def __repr__(self):
        return "BSplineTrajectory(n_control={}, degree={}, t0={}, tf={})".format(self.n_control, self.degree, self.t0, self.tf)


def basis(i, p, t, knots):
    knots = np.asarray(knots, dtype=float)
    n_control = len(knots) - p - 1
    low, high = knots[p], knots[n_control]
    if not low <= t <= high:
        raise ValueError("t={} outside the base interval [{}, {}]".format(t, low, high))
    if not 0 <= i < n_control:
        return 0.0
    matrix = interpolate.BSpline.design_matrix(np.array([t], dtype=float), knots, p)
    return float(matrix.toarray()[0, i])


def basis_matrix(params, knots, degree, derivative_order=0):
    """Rows map control points to curve (or derivative) values at params."""
    n_control = len(knots) - degree - 1
    identity = interpolate.BSpline(knots, np.eye(n_control), degree, extrapolate=False)
    if derivative_order > degree:
        return np.zeros((len(params), n_control))
    if derivative_order:
        identity = identity.derivative(derivative_order)
    return identity(np.asarray(params, dtype=float))


def eval(traj, t, derivative_order=0):
    return traj.eval(t, derivative_order)


def flat_outputs(traj, t):
    velocity = np.atleast_2d(traj.eval(t, 1))
    accel = np.atleast_2d(traj.eval(t, 2))
    speed = np.hypot(velocity[:, 0], velocity[:, 1])
    scale = max(1.0, float(np.abs(traj.control_points).max())) / traj.duration
    if np.any(speed < 1e-9 * scale):
        raise utils.SingularityError("Trajectory is stationary; turn rate and curvature undefined")
    cross = velocity[:, 0] * accel[:, 1] - velocity[:, 1] * accel[:, 0]
    turn_rate = cross / speed ** 2
    curvature = turn_rate / speed
    if np.ndim(t) == 0:
        return float(speed[0]), float(turn_rate[0]), float(curvature[0])
    return speed, turn_rate, curvature


def chord_length_params(points):
    steps = np.hypot(*np.diff(points, axis=0).T)
    total = steps.sum()
    if total == 0:
        raise ValueError("Path has zero length")
    return np.concatenate([[0.0], np.cumsum(steps) / total])


def fit_to_path(points, n_control, degree=3, params=None):
    """Least-squares spline on [0, 1] through an ordered path.

    Returns the trajectory and the largest distance between a path point and
    the curve at its parameter.
    """
    points = np.asarray([list(Position2.of(p)) for p in points], dtype=float)
    if len(points) < n_control:
        raise ValueError("Fitting {} control points needs at least as many path points, got {}".format(n_control, len(points)))
    if params is None:
        params = chord_length_params(points)
    params = np.clip(np.asarray(params, dtype=float), 0.0, 1.0)
    knots = uniform_knots(n_control, degree, 0.0, 1.0)
    try:
        spline = interpolate.make_lsq_spline(params, points, knots, k=degree)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise ValueError("Spline fit is underdetermined: {}".format(exc))
    traj = BSplineTrajectory(spline.c, degree, 0.0, 1.0)
    residual = float(np.max(np.hypot(*(traj.eval(params) - points).T)))
    return traj, residual


def retime(traj, tf_new):
    if tf_new <= 0:
        raise ValueError("tf_new must be positive, got {}".format(tf_new))
    return BSplineTrajectory(traj.control_points, traj.degree, 0.0, tf_new)


def max_speed(traj, n_samples=100):
    """Largest speed over [t0, tf] by dense sampling and a bounded scalar refinement."""
    times = np.linspace(traj.t0, traj.tf, 10 * n_samples + 1)
    speeds = np.hypot(*traj.eval(times, 1).T)
    k = int(np.argmax(speeds))
    low, high = times[max(k - 1, 0)], times[min(k + 1, len(times) - 1)]
    if high <= low:
        return float(speeds[k])

    def negative_speed(t):
        return -math.hypot(*traj.eval(t, 1))

    result = optimize.minimize_scalar(negative_speed, bounds=(low, high), method="bounded", options={"xatol": 1e-10 * traj.duration})
    return max(float(speeds[k]), -float(result.fun))
