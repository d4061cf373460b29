"""Planning pipelines for the high-priority agent.

Both pipelines follow the same stages: build a roadmap over the threat field,
trim unsafe edges, search it, fit a spline to the path, retime it under the
speed limit and refine it for minimum time. The uncertain pipeline then
checks that no undiscovered radar is likely to sit on the result.
"""
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import bspline, radar, roadmap, trajopt
from .lp_planner import gamma_e

log = logging.getLogger("radarscout")


@dataclass(frozen=True)
class HPConfig:
    n_control: int = 40
    degree: int = 3
    path_spacing: float = 100.0
    grid_n: int = 201
    circle_samples: int = 256
    trim_samples: int = 64
    attach_k: int = 5
    velocity_target: float = 0.95

    def __post_init__(self):
        if self.n_control < self.degree + 1:
            raise ValueError("n_control must be at least degree + 1")
        if self.path_spacing <= 0:
            raise ValueError("path_spacing must be positive, got {}".format(self.path_spacing))


@dataclass(eq=False)
class PlanResult:
    trajectory: object = None
    tf: float = math.inf
    dispatchable: bool = False
    reason: str = ""
    diagnostics: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "tf": self.tf,
            "dispatchable": self.dispatchable,
            "reason": self.reason,
            "trajectory": self.trajectory.as_dict() if self.trajectory is not None else None,
            "diagnostics": self.diagnostics,
        }


class _Stages(object):
    """Collects per-stage wall time for the diagnostics."""

    def __init__(self):
        self.timings = {}
        self._last = time.perf_counter()

    def mark(self, name):
        now = time.perf_counter()
        self.timings[name] = now - self._last
        self._last = now
        log.debug("hp stage {} took {:.3f} s".format(name, self.timings[name]))


def deterministic_weights(radars, rcs):
    """w_j = (k_B T_s L / (P_E G_R lambda^2 sigma tau_p)) ** (1/4) for each radar.

    Detection SNR is equal for two radars where R_j * w_j = R_k * w_k, so the
    weighted diagram sites carry 1 / w_j.
    """
    return np.array([
        (radar.BOLTZMANN * r.system_temp * r.loss / (r.erp * r.g_r * r.wavelength ** 2 * rcs * r.pulse_width)) ** 0.25
        for r in radars
    ])


def _boundary_graph(region):
    graph = roadmap.RoadmapGraph(region)
    graph.add_boundary_ring()
    return graph


def _seed_trajectory(path, limits, hp_config):
    points = path.points(hp_config.path_spacing)
    if len(points) < 2 * hp_config.n_control:
        points = path.points(max(path.cost / (2 * hp_config.n_control), 1e-6))
    traj, residual = bspline.fit_to_path(points, hp_config.n_control, hp_config.degree)
    guess = max(path.cost, 1.0) / (hp_config.velocity_target * limits.v_ub)
    seed = trajopt.enforce_velocity_heuristic(bspline.retime(traj, guess), limits, hp_config.velocity_target)
    return seed, residual


def _roadmap_diagnostics(graph, trimmed, path):
    return {
        "roadmap_vertices": len(graph.vertices),
        "roadmap_edges": len(graph.edges),
        "trimmed_edges": len(graph.edges) - len(trimmed.edges),
        "path_length": path.cost if path.found else None,
        "path_edges": len(path.edges) if path.found else 0,
    }


def _refine(problem, optimizer_config, diagnostics, stages):
    traj, tf, report = trajopt.solve(problem, optimizer_config)
    stages.mark("optimize")
    diagnostics["solver"] = report.as_dict()
    return traj, tf, report


def plan_deterministic(radars, agent, mission, limits, hp_config=None, optimizer_config=None):
    hp_config = hp_config or HPConfig()
    optimizer_config = optimizer_config or trajopt.OptimizerConfig()
    radars = list(radars)
    region = mission.region
    stages = _Stages()

    if radars:
        weights = deterministic_weights(radars, agent.sigma)
        sites = [roadmap.WeightedSite(r.position, 1.0 / w, r.radar_id) for r, w in zip(radars, weights)]
        graph = roadmap.build_weighted_diagram(sites, region, hp_config.circle_samples)
    else:
        graph = _boundary_graph(region)
    stages.mark("roadmap")
    risk = roadmap.DeterministicRisk(radars, agent, mission.pd_threshold, hp_config.trim_samples)
    trimmed = risk.trim(graph)
    stages.mark("trim")
    path = roadmap.shortest_path(trimmed, mission.start, mission.goal, feasible=risk.feasible, k=hp_config.attach_k)
    stages.mark("search")
    diagnostics = _roadmap_diagnostics(graph, trimmed, path)
    diagnostics["timings"] = stages.timings
    if not path.found:
        return PlanResult(dispatchable=False, reason=path.reason, diagnostics=diagnostics)

    seed, residual = _seed_trajectory(path, limits, hp_config)
    diagnostics["fit_residual"] = residual
    diagnostics["seed_tf"] = seed.duration
    stages.mark("fit")
    safety = trajopt.DeterministicSafety(radars, agent.sigma, mission.pd_threshold)
    problem = trajopt.TrajectoryProblem(seed, limits, region, mission, safety)
    traj, tf, report = _refine(problem, optimizer_config, diagnostics, stages)

    dense = np.linspace(traj.t0, traj.tf, optimizer_config.verify_factor * optimizer_config.n_samples + 1)
    diagnostics["max_sampled_pd"] = float(np.max(safety.true_pd(traj.eval(dense)))) if radars else 0.0
    if not report.feasible:
        return PlanResult(traj, tf, False, "infeasible", diagnostics)
    log.info("deterministic plan: tf={:.1f} s over {} edges".format(tf, len(path.edges)))
    return PlanResult(traj, tf, True, "", diagnostics)


def plan_uncertain(estimates, priors, known, history, mission, limits, scenario, hp_config=None, optimizer_config=None):
    """Chance-constrained plan through the generalized diagram of the estimates.

    Dispatchable only when refinement succeeds and the largest exploration
    posterior along the trajectory is at most mission.p_s.
    """
    hp_config = hp_config or HPConfig()
    optimizer_config = optimizer_config or trajopt.OptimizerConfig()
    estimates = list(estimates)
    region = mission.region
    stages = _Stages()

    if estimates:
        graph = roadmap.build_generalized_diagram(estimates, priors, known, region, hp_config.grid_n, mission.pd_threshold)
    else:
        graph = _boundary_graph(region)
    stages.mark("roadmap")
    risk = roadmap.ChanceRisk(estimates, priors, known, mission.pd_threshold, mission.epsilon, optimizer_config.n_samples)
    trimmed = risk.trim(graph)
    stages.mark("trim")
    path = roadmap.shortest_path(trimmed, mission.start, mission.goal, feasible=risk.feasible, k=hp_config.attach_k)
    stages.mark("search")
    diagnostics = _roadmap_diagnostics(graph, trimmed, path)
    diagnostics["timings"] = stages.timings
    if not path.found:
        return PlanResult(dispatchable=False, reason=path.reason, diagnostics=diagnostics)

    seed, residual = _seed_trajectory(path, limits, hp_config)
    diagnostics["fit_residual"] = residual
    diagnostics["seed_tf"] = seed.duration
    stages.mark("fit")
    safety = trajopt.ChanceSafety(estimates, priors, known, mission.pd_threshold, mission.epsilon)
    problem = trajopt.TrajectoryProblem(seed, limits, region, mission, safety)
    traj, tf, report = _refine(problem, optimizer_config, diagnostics, stages)

    samples = traj.eval(np.linspace(traj.t0, traj.tf, optimizer_config.n_samples + 1))
    p_max = float(np.max(gamma_e(samples, history, scenario)))
    diagnostics["p_max"] = p_max
    if estimates:
        margins = risk.margins(samples)[1]
        diagnostics["min_sampled_chance"] = float(special.ndtr(np.min(margins)))
    stages.mark("gate")
    if not report.feasible:
        return PlanResult(traj, tf, False, "infeasible", diagnostics)
    if p_max > mission.p_s:
        log.info("plan blocked: undiscovered radar posterior {:.3f} exceeds {:.3f}".format(p_max, mission.p_s))
        return PlanResult(traj, tf, False, "undiscovered radar risk", diagnostics)
    log.info("uncertain plan: tf={:.1f} s, p_max={:.3f}".format(tf, p_max))
    return PlanResult(traj, tf, True, "", diagnostics)
