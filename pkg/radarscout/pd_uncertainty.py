"""Linearized PD uncertainty.

The overall PD is a smooth function of three parameter groups: the agent's
own known parameters (RCS and position), the radar parameters nobody can
observe (false alarm rate, receive gain, wavelength, pulse width, system
temperature) and the estimated radar state (position and ERP). Each group
carries a Gaussian belief; a first order expansion around the means turns
them into a Gaussian belief over PD.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import radar, utils
from .core import Position2

UNKNOWN_NAMES = ("p_fa", "g_r", "wavelength", "pulse_width", "system_temp")
ESTIMATED_NAMES = ("x", "y", "erp")


def _check_psd(name, cov, size):
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (size, size):
        raise ValueError("{} covariance must be {}x{}, got {}".format(name, size, size, cov.shape))
    if not np.allclose(cov, cov.T, rtol=1e-9, atol=0.0):
        raise ValueError("{} covariance must be symmetric".format(name))
    scale = max(np.abs(cov).max(), 1e-300)
    if np.linalg.eigvalsh(cov).min() < -1e-9 * scale:
        raise ValueError("{} covariance must be positive semi-definite".format(name))
    return cov


@dataclass(frozen=True, eq=False)
class UnknownPrior:
    mean: np.ndarray
    cov: np.ndarray
    loss: float = 1.0

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(5)
        if np.any(mean <= 0) or not mean[0] < 1:
            raise ValueError("Unknown parameter means must be positive with p_fa < 1, got {}".format(mean))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _check_psd("Unknown parameter", self.cov, 5))

    @classmethod
    def from_config(cls, config, relative_std=0.1, p_fa_log10_std=0.5):
        mean = np.array([config.p_fa, config.g_r, config.wavelength, config.pulse_width, config.system_temp])
        std = relative_std * mean
        # half a decade in log10, mapped through d(p)/d(log10 p) = p ln 10
        std[0] = config.p_fa * math.log(10.0) * p_fa_log10_std
        return cls(mean, np.diag(std ** 2), loss=config.loss)

    def scaled(self, factor):
        return UnknownPrior(self.mean, self.cov * factor, self.loss)


@dataclass(frozen=True, eq=False)
class KnownParamBelief:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(3)
        if mean[0] < 0:
            raise ValueError("RCS mean must be non-negative, got {}".format(mean[0]))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _check_psd("Known parameter", self.cov, 3))

    @classmethod
    def at(cls, position, rcs, rcs_std=0.0, position_std=0.0):
        position = Position2.of(position)
        return cls([rcs, position.x, position.y], np.diag([rcs_std ** 2, position_std ** 2, position_std ** 2]))

    @property
    def sigma(self):
        return float(self.mean[0])

    @property
    def position(self):
        return Position2(self.mean[1], self.mean[2])

    def moved(self, position):
        position = Position2.of(position)
        return KnownParamBelief([self.mean[0], position.x, position.y], self.cov)

    def scaled(self, factor):
        return KnownParamBelief(self.mean, self.cov * factor)


@dataclass(frozen=True)
class PdBelief:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("PD variance must be non-negative, got {}".format(self.variance))

    @property
    def std(self):
        return math.sqrt(self.variance)


def _stack(priors, estimates):
    estimates = list(estimates)
    n = len(estimates)
    if isinstance(priors, UnknownPrior):
        priors = [priors] * n
    priors = list(priors)
    if len(priors) != n:
        raise ValueError("Expected {} unknown-parameter priors, got {}".format(n, len(priors)))
    theta_u = np.array([p.mean for p in priors]).reshape(n, 5)
    cov_u = np.array([p.cov for p in priors]).reshape(n, 5, 5)
    loss = np.array([p.loss for p in priors])
    theta_e = np.array([np.asarray(e.mean, dtype=float) for e in estimates]).reshape(n, 3)
    cov_e = np.array([np.asarray(e.cov, dtype=float) for e in estimates]).reshape(n, 3, 3)
    return theta_u, cov_u, loss, theta_e, cov_e


def _partials(points, sigma, theta_u, theta_e, loss):
    """Per-radar PD and its partials at each point.

    Returns pd_j (P, N) and the per-radar partials of PD_j with respect to
    the known (P, N, 3), unknown (P, N, 5) and estimated (P, N, 3) groups.
    """
    p_fa, g_r, lam, tau, t_s = (theta_u[:, k] for k in range(5))
    x_r, y_r, p_e = (theta_e[:, k] for k in range(3))
    dx = x_r[None, :] - points[:, :1]
    dy = y_r[None, :] - points[:, 1:2]
    r2 = dx * dx + dy * dy
    if np.any(r2 == 0):
        raise utils.SingularityError("PD linearization is singular at a radar position")
    base = p_e * g_r * lam ** 2 * tau / (radar.FOUR_PI ** 3 * r2 ** 2 * radar.BOLTZMANN * t_s * loss)
    s = base * sigma
    log_pfa = np.log(p_fa)
    pd_j = np.exp(log_pfa / (s + 1.0))
    ds = -pd_j * log_pfa / (s + 1.0) ** 2
    radial_x = 4.0 * s * dx / r2
    radial_y = 4.0 * s * dy / r2
    known = np.stack([ds * base, ds * radial_x, ds * radial_y], axis=-1)
    unknown = np.stack(
        [
            pd_j / (p_fa * (s + 1.0)),
            ds * s / g_r,
            ds * 2.0 * s / lam,
            ds * s / tau,
            -ds * s / t_s,
        ],
        axis=-1,
    )
    estimated = np.stack([-ds * radial_x, -ds * radial_y, ds * s / p_e], axis=-1)
    return pd_j, known, unknown, estimated


def _quad(jac, cov):
    return np.einsum("...i,...ij,...j->...", jac, cov, jac)


def _overall(points, known, priors, estimates):
    theta_u, cov_u, loss, theta_e, cov_e = _stack(priors, estimates)
    pd_j, d_known, d_unknown, d_est = _partials(points, known.sigma, theta_u, theta_e, loss)
    q = radar._product_of_others(1.0 - pd_j)
    pd = 1.0 - np.prod(1.0 - pd_j, axis=1)
    j_k = np.sum(q[..., None] * d_known, axis=1)
    j_u = q[..., None] * d_unknown
    j_e = q[..., None] * d_est
    return pd, j_k, j_u, j_e, cov_u, cov_e


def pd_jacobians(known, priors, estimates):
    """Row Jacobians of overall PD with respect to the known, unknown and estimated groups."""
    if not estimates:
        raise ValueError("PD linearization needs at least one radar estimate")
    points = known.position.as_array()[None, :]
    _, j_k, j_u, j_e, _, _ = _overall(points, known, priors, estimates)
    return j_k[0], j_u[0].reshape(-1), j_e[0].reshape(-1)


def pd_belief(known, priors, estimates):
    if not estimates:
        return PdBelief(0.0, 0.0)
    mean, variance = belief_field(known.position.as_array()[None, :], known, priors, estimates)
    return PdBelief(float(mean[0]), float(variance[0]))


def belief_field(points, known, priors, estimates):
    """Overall PD mean and variance at each of the (P, 2) points.

    known supplies the RCS and the known-parameter covariance; its position
    is replaced by each point.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if not estimates:
        return np.zeros(len(points)), np.zeros(len(points))
    pd, j_k, j_u, j_e, cov_u, cov_e = _overall(points, known, priors, estimates)
    variance = _quad(j_k, known.cov) + np.sum(_quad(j_u, cov_u), axis=1) + np.sum(_quad(j_e, cov_e), axis=1)
    return pd, np.maximum(variance, 0.0)


def radar_belief_field(points, known, priors, estimates):
    """Per-radar PD mean and variance, each (P, N), treating radar j alone."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    theta_u, cov_u, loss, theta_e, cov_e = _stack(priors, estimates)
    pd_j, d_known, d_unknown, d_est = _partials(points, known.sigma, theta_u, theta_e, loss)
    variance = _quad(d_known, known.cov) + _quad(d_unknown, cov_u) + _quad(d_est, cov_e)
    return pd_j, np.maximum(variance, 0.0)


def margin(mean, variance, threshold):
    """Standardized safety margin (threshold - mean) / std, +-inf when std is 0."""
    mean = np.asarray(mean, dtype=float)
    std = np.sqrt(np.asarray(variance, dtype=float))
    degenerate = std == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (threshold - mean) / np.where(degenerate, 1.0, std)
    z = np.where(degenerate, np.where(mean <= threshold, np.inf, -np.inf), z)
    if z.ndim == 0:
        return float(z)
    return z


def chance(mean, variance, threshold):
    """Gaussian probability that the PD lies at or below threshold."""
    value = special.ndtr(margin(mean, variance, threshold))
    if np.ndim(value) == 0:
        return float(value)
    return value


def safety_margin(belief, threshold):
    return margin(belief.mean, belief.variance, threshold)


def prob_pd_below(belief, threshold):
    return chance(belief.mean, belief.variance, threshold)


def required_margin(epsilon):
    """Margin that makes the chance exactly epsilon; inf for 1 and -inf for 0."""
    return float(special.ndtri(epsilon))
