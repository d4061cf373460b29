"""Minimum-time refinement of a B-spline trajectory.

The decision vector holds the control points and the final time. The
trajectory is evaluated at N_s + 1 evenly spaced samples of [0, tf], and
every kinematic, region and safety limit becomes one smooth inequality per
sample. The constrained problem is solved with a PHR augmented Lagrangian
whose inner problems go to L-BFGS-B.
"""
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import bspline, pd_uncertainty, radar
from .bspline import BSplineTrajectory

log = logging.getLogger("radarscout")

# standardized margins beyond this carry no gradient information
MARGIN_CLIP = 50.0
MAX_PENALTY = 1e8
# floor on |p'|^2 where turn rate and curvature are evaluated
MIN_SPEED_SQ = 1e-12


@dataclass(frozen=True)
class OptimizerConfig:
    n_samples: int = 100
    feas_tol: float = 1e-6
    opt_tol: float = 1e-4
    max_outer: int = 30
    penalty_growth: float = 10.0
    initial_penalty: float = 10.0
    max_inner: int = 200
    verify_factor: int = 10
    min_tf_fraction: float = 1e-3

    def __post_init__(self):
        if self.n_samples < 10:
            raise ValueError("n_samples must be at least 10, got {}".format(self.n_samples))
        if self.penalty_growth <= 1:
            raise ValueError("penalty_growth must exceed 1, got {}".format(self.penalty_growth))
        if self.feas_tol <= 0 or self.opt_tol <= 0:
            raise ValueError("Tolerances must be positive")


class DeterministicSafety(object):
    """Overall PD against known radars must stay at or below the threshold."""

    def __init__(self, radars, rcs, pd_threshold):
        self.radars = list(radars)
        self.rcs = rcs
        self.pd_threshold = pd_threshold

    def residuals(self, points):
        if not self.radars:
            return np.zeros(len(points)), np.zeros_like(points)
        pd, grad = radar.pd_field(points, self.radars, self.rcs, with_gradient=True)
        return (pd - self.pd_threshold) / self.pd_threshold, grad / self.pd_threshold

    def true_pd(self, points):
        return radar.pd_field(points, self.radars, self.rcs)


class ChanceSafety(object):
    """P(PD <= threshold) >= epsilon, expressed on the standardized margin."""

    # central-difference step for the margin gradient, meters
    step = 1.0

    def __init__(self, estimates, priors, known, pd_threshold, epsilon):
        self.estimates = list(estimates)
        self.priors = priors
        self.known = known
        self.pd_threshold = pd_threshold
        self.epsilon = epsilon
        self.required = float(np.clip(pd_uncertainty.required_margin(epsilon), -MARGIN_CLIP, MARGIN_CLIP))
        self.scale = max(1.0, abs(self.required))

    def margins(self, points):
        mean, variance = pd_uncertainty.belief_field(points, self.known, self.priors, self.estimates)
        return np.clip(pd_uncertainty.margin(mean, variance, self.pd_threshold), -MARGIN_CLIP, MARGIN_CLIP)

    def residuals(self, points):
        if not self.estimates or self.epsilon <= 0:
            return np.full(len(points), -1.0), np.zeros_like(points)
        z = self.margins(points)
        grad = np.empty_like(points)
        for axis in range(2):
            offset = np.zeros(2)
            offset[axis] = self.step
            grad[:, axis] = (self.margins(points + offset) - self.margins(points - offset)) / (2 * self.step)
        return (self.required - z) / self.scale, -grad / self.scale


@dataclass(eq=False)
class TrajectoryProblem:
    seed: BSplineTrajectory
    limits: object
    region: object
    mission: object
    safety: object
    start: np.ndarray = None
    goal: np.ndarray = None

    def __post_init__(self):
        if self.start is None:
            self.start = self.mission.start
        if self.goal is None:
            self.goal = self.mission.goal
        self.start = np.asarray(list(self.start), dtype=float)
        self.goal = np.asarray(list(self.goal), dtype=float)

    @property
    def length_scale(self):
        return max(self.region.diagonal, 1.0)


@dataclass
class SolverReport:
    iterations: int = 0
    max_violation: float = math.inf
    dense_violation: float = math.inf
    objective_history: list = field(default_factory=list)
    stalled: bool = False
    feasible: bool = False
    seed_tf: float = math.nan
    penalty: float = math.nan
    elapsed: float = 0.0

    def as_dict(self):
        return {
            "iterations": self.iterations,
            "max_violation": self.max_violation,
            "dense_violation": self.dense_violation,
            "objective_history": list(self.objective_history),
            "stalled": self.stalled,
            "feasible": self.feasible,
            "seed_tf": self.seed_tf,
            "penalty": self.penalty,
            "elapsed": self.elapsed,
        }


class Transcription(object):
    """Sampled constraints of a problem and their Jacobians in (C, tf)."""

    def __init__(self, problem, n_samples):
        self.problem = problem
        seed = problem.seed
        self.n_control = seed.n_control
        self.degree = seed.degree
        knots = bspline.uniform_knots(self.n_control, self.degree, 0.0, 1.0)
        params = np.linspace(0.0, 1.0, n_samples + 1)
        self.basis = [bspline.basis_matrix(params, knots, self.degree, d) for d in range(3)]

    def _block(self, g_pos=None, g_vel=None, g_acc=None, g_tf=None):
        rows = len(self.basis[0])
        jac = np.zeros((rows, self.n_control, 2))
        for basis, grad in zip(self.basis, (g_pos, g_vel, g_acc)):
            if grad is not None:
                jac += basis[:, :, None] * grad[:, None, :]
        g_tf = np.zeros(rows) if g_tf is None else g_tf
        return np.column_stack([jac.reshape(rows, -1), g_tf])

    def evaluate(self, control_points, tf, jacobian=False):
        """(equalities, inequalities) and, with jacobian, their derivatives.

        All residuals are normalized; an inequality holds when it is <= 0.
        """
        p = self.problem
        limits = p.limits
        scale = p.length_scale
        b0, b1, b2 = self.basis
        pos = b0 @ control_points
        d1 = b1 @ control_points
        d2 = b2 @ control_points
        rows = len(pos)
        parts = []

        lo = np.array([p.region.lower.x, p.region.lower.y])
        hi = np.array([p.region.upper.x, p.region.upper.y])
        extent = hi - lo
        for axis in range(2):
            unit = np.zeros((rows, 2))
            unit[:, axis] = 1.0 / extent[axis]
            parts.append(((lo[axis] - pos[:, axis]) / extent[axis], dict(g_pos=-unit)))
            parts.append(((pos[:, axis] - hi[axis]) / extent[axis], dict(g_pos=unit)))

        n = np.maximum(np.sum(d1 * d1, axis=1), MIN_SPEED_SQ)
        v_sq = n / tf ** 2
        v_ref = limits.v_ub ** 2
        g_vsq = 2.0 * d1 / tf ** 2
        dvsq_dtf = -2.0 * n / tf ** 3
        parts.append(((v_sq - v_ref) / v_ref, dict(g_vel=g_vsq / v_ref, g_tf=dvsq_dtf / v_ref)))
        parts.append(((limits.v_lb ** 2 - v_sq) / v_ref, dict(g_vel=-g_vsq / v_ref, g_tf=-dvsq_dtf / v_ref)))

        cross = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        dc_dd1 = np.column_stack([d2[:, 1], -d2[:, 0]])
        dc_dd2 = np.column_stack([-d1[:, 1], d1[:, 0]])
        u = cross / (tf * n)
        du_dd1 = (dc_dd1 * n[:, None] - 2.0 * cross[:, None] * d1) / (tf * n ** 2)[:, None]
        du_dd2 = dc_dd2 / (tf * n)[:, None]
        du_dtf = -u / tf
        u_ref = max(abs(limits.u_lb), abs(limits.u_ub))
        parts.append(((u - limits.u_ub) / u_ref, dict(g_vel=du_dd1 / u_ref, g_acc=du_dd2 / u_ref, g_tf=du_dtf / u_ref)))
        parts.append(((limits.u_lb - u) / u_ref, dict(g_vel=-du_dd1 / u_ref, g_acc=-du_dd2 / u_ref, g_tf=-du_dtf / u_ref)))

        kappa = cross / n ** 1.5
        dk_dd1 = dc_dd1 / n[:, None] ** 1.5 - 3.0 * cross[:, None] * d1 / n[:, None] ** 2.5
        dk_dd2 = dc_dd2 / n[:, None] ** 1.5
        k_ref = limits.kappa_ub ** 2
        parts.append(((kappa ** 2 - k_ref) / k_ref, dict(g_vel=2 * kappa[:, None] * dk_dd1 / k_ref, g_acc=2 * kappa[:, None] * dk_dd2 / k_ref)))

        safety, g_safety = p.safety.residuals(pos)
        parts.append((safety, dict(g_pos=g_safety)))

        ineq = np.concatenate([r for r, _ in parts])
        eq = np.concatenate([(pos[0] - p.start) / scale, (pos[-1] - p.goal) / scale])
        if not jacobian:
            return eq, ineq
        ineq_jac = np.vstack([self._block(**grads) for _, grads in parts])
        eq_jac = np.zeros((4, self.n_control * 2 + 1))
        for k, row in enumerate((0, -1)):
            for axis in range(2):
                eq_jac[2 * k + axis, axis:-1:2] = b0[row] / scale
        return eq, ineq, eq_jac, ineq_jac


def max_violation(eq, ineq):
    worst = 0.0
    if len(eq):
        worst = max(worst, float(np.max(np.abs(eq))))
    if len(ineq):
        worst = max(worst, float(np.max(ineq)))
    return worst


def assemble_constraints(problem, control_points, tf, n_samples=100):
    """Objective (seconds), equality residuals and inequality residuals."""
    if not tf > 0:
        raise ValueError("tf must be positive, got {}".format(tf))
    eq, ineq = Transcription(problem, n_samples).evaluate(np.asarray(control_points, dtype=float), tf)
    return float(tf), eq, ineq


def dense_violation(problem, traj, n_samples, factor=10):
    """Largest violation at factor times as many samples as the solver used."""
    problem = TrajectoryProblem(traj, problem.limits, problem.region, problem.mission, problem.safety, problem.start, problem.goal)
    eq, ineq = Transcription(problem, n_samples * factor).evaluate(traj.control_points, traj.duration)
    return max_violation(eq, ineq)


def solve(problem, config=None):
    """Refine the seed to minimize tf subject to the sampled constraints.

    Returns (trajectory, tf, report). The trajectory is the best feasible
    iterate found; when no iterate (seed included) is feasible the seed is
    returned with report.feasible False.
    """
    config = config or OptimizerConfig()
    started = time.perf_counter()
    seed = problem.seed
    transcription = Transcription(problem, config.n_samples)
    length = problem.length_scale
    t_scale = seed.duration
    n_vars = seed.n_control * 2

    def unpack(z):
        return z[:-1].reshape(seed.n_control, 2) * length, z[-1] * t_scale

    z = np.concatenate([seed.control_points.ravel() / length, [1.0]])
    eq, ineq = transcription.evaluate(*unpack(z))
    lam = np.zeros(len(eq))
    mu = np.zeros(len(ineq))
    rho = config.initial_penalty
    report = SolverReport(seed_tf=seed.duration)
    best = None
    violation = max_violation(eq, ineq)
    if violation <= config.feas_tol:
        best = (seed.duration, z.copy())
        report.objective_history.append(seed.duration)
    else:
        log.debug("seed violates constraints by {:.3g}; starting from an infeasible point".format(violation))
    jac_scale = np.concatenate([np.full(n_vars, length), [t_scale]])
    bounds = [(None, None)] * n_vars + [(config.min_tf_fraction, None)]

    def lagrangian(z):
        eq, ineq, eq_jac, ineq_jac = transcription.evaluate(*unpack(z), jacobian=True)
        shifted = np.maximum(0.0, mu + rho * ineq)
        value = z[-1] + lam @ eq + 0.5 * rho * eq @ eq + (shifted @ shifted - mu @ mu) / (2.0 * rho)
        grad = (eq_jac.T @ (lam + rho * eq) + ineq_jac.T @ shifted) * jac_scale
        grad[-1] += 1.0
        return value, grad

    previous_objective = math.inf
    converged = False
    for outer in range(1, config.max_outer + 1):
        result = optimize.minimize(
            lagrangian, z, jac=True, method="L-BFGS-B", bounds=bounds,
            options={"maxiter": config.max_inner, "gtol": 1e-10, "ftol": 1e-14},
        )
        z = result.x
        control_points, tf = unpack(z)
        eq, ineq = transcription.evaluate(control_points, tf)
        new_violation = max_violation(eq, ineq)
        report.iterations = outer
        log.debug("outer {}: tf={:.6g} violation={:.3g} penalty={:.3g}".format(outer, tf, new_violation, rho))
        if new_violation <= config.feas_tol and (best is None or tf < best[0]):
            best = (tf, z.copy())
            report.objective_history.append(tf)
        if new_violation <= config.feas_tol and previous_objective - tf <= config.opt_tol * tf:
            converged = True
            break
        lam = lam + rho * eq
        mu = np.maximum(0.0, mu + rho * ineq)
        if new_violation > 0.25 * violation:
            rho = min(rho * config.penalty_growth, MAX_PENALTY)
        violation = new_violation
        previous_objective = tf

    report.penalty = rho
    report.stalled = not converged
    if best is None:
        traj = seed
        report.feasible = False
        eq, ineq = transcription.evaluate(seed.control_points, seed.duration)
        report.max_violation = max_violation(eq, ineq)
        log.warning("trajectory refinement found no feasible iterate; keeping the seed")
    else:
        control_points, tf = unpack(best[1])
        traj = BSplineTrajectory(control_points, seed.degree, 0.0, tf)
        eq, ineq = transcription.evaluate(control_points, tf)
        report.max_violation = max_violation(eq, ineq)
        report.feasible = True
    report.dense_violation = dense_violation(problem, traj, config.n_samples, config.verify_factor)
    if report.dense_violation > config.feas_tol:
        log.info("constraints violated between samples by up to {:.3g}".format(report.dense_violation))
    report.elapsed = time.perf_counter() - started
    return traj, traj.duration, report


def enforce_velocity_heuristic(traj, limits, target=0.95, growth=1.05):
    """Stretch tf until the largest speed is at most target * v_ub."""
    ceiling = target * limits.v_ub
    speed = bspline.max_speed(traj)
    if speed <= ceiling:
        return traj
    # speed scales as 1 / tf
    traj = bspline.retime(traj, traj.duration * speed / ceiling)
    while bspline.max_speed(traj) > ceiling:
        traj = bspline.retime(traj, traj.duration * growth)
    return traj
