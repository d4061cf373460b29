import logging
import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from . import bspline, pd_uncertainty, radar, roadmap, utils  # noqa: E402
from .config import Settings  # noqa: E402
from .estimator import RadarEstimate  # noqa: E402
from .hp_planner import deterministic_weights  # noqa: E402

log = logging.getLogger("radarscout")

# fixed PNG metadata keeps re-renders byte-identical
PNG_METADATA = {"Software": None}
DPI = 100


def save(fig, path):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, format="png", dpi=DPI, metadata=PNG_METADATA)
    plt.close(fig)
    log.debug("Wrote figure '{}'".format(path))
    return path


def grid(region, grid_n=200):
    xs = np.linspace(region.lower.x, region.upper.x, grid_n)
    ys = np.linspace(region.lower.y, region.upper.y, grid_n)
    return xs, ys, np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)


def pd_grid(radars, rcs, region, grid_n=200):
    """Overall PD sampled on the heatmap grid; field[i, j] sits at (xs[j], ys[i])."""
    xs, ys, points = grid(region, grid_n)
    return xs, ys, radar.pd_field(points, list(radars), rcs).reshape(grid_n, grid_n)


def chance_grid(estimates, priors, known, region, threshold, grid_n=200):
    xs, ys, points = grid(region, grid_n)
    mean, variance = pd_uncertainty.belief_field(points, known, priors, list(estimates))
    return xs, ys, pd_uncertainty.chance(mean, variance, threshold).reshape(grid_n, grid_n)


def _heatmap(xs, ys, field, label, radars=(), estimates=(), vmin=0.0, vmax=1.0):
    fig, ax = plt.subplots(figsize=(6, 5))
    mesh = ax.pcolormesh(xs, ys, field, shading="nearest", vmin=vmin, vmax=vmax, cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=label)
    for r in radars:
        ax.plot(r.position.x, r.position.y, "r^", markersize=6)
    for e in estimates:
        ax.plot(e.position.x, e.position.y, "wx", markersize=6)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal")
    return fig, ax


def pd_heatmap(radars, rcs, region, path, grid_n=200):
    xs, ys, field = pd_grid(radars, rcs, region, grid_n)
    fig, _ = _heatmap(xs, ys, field, "probability of detection", radars=radars)
    return save(fig, path)


def chance_heatmap(estimates, priors, known, region, threshold, path, grid_n=200):
    xs, ys, field = chance_grid(estimates, priors, known, region, threshold, grid_n)
    fig, _ = _heatmap(xs, ys, field, "P(PD <= {:.2f})".format(threshold), estimates=estimates)
    return save(fig, path)


def _draw_trajectory(ax, traj, n=400):
    points = traj.eval(np.linspace(traj.t0, traj.tf, n))
    ax.plot(points[:, 0], points[:, 1], "k-", linewidth=2)


def roadmap_overlay(graph, path, trajectory=None, radars=(), samples=32):
    fig, ax = plt.subplots(figsize=(6, 6))
    for edge in graph.edges:
        points = edge.sample(samples)
        ax.plot(points[:, 0], points[:, 1], color="0.6", linewidth=0.8)
    vertices = graph.vertex_array
    if len(vertices):
        ax.plot(vertices[:, 0], vertices[:, 1], ".", color="0.3", markersize=3)
    for r in radars:
        ax.plot(r.position.x, r.position.y, "r^", markersize=6)
    if trajectory is not None:
        _draw_trajectory(ax, trajectory)
    region = graph.region
    ax.set_xlim(region.lower.x, region.upper.x)
    ax.set_ylim(region.lower.y, region.upper.y)
    ax.set_aspect("equal")
    return save(fig, path)


def trajectory_plot(trajectory, radars, rcs, region, path, grid_n=120):
    xs, ys, field = pd_grid(radars, rcs, region, grid_n)
    fig, ax = _heatmap(xs, ys, field, "probability of detection", radars=radars)
    _draw_trajectory(ax, trajectory)
    return save(fig, path)


def ternary_scatter(table, path):
    fig, ax = plt.subplots(figsize=(6, 5))
    alpha_u = np.array([row["alpha_u"] for row in table], dtype=float)
    alpha_s = np.array([row["alpha_s"] for row in table], dtype=float)
    rates = np.array([row["success_rate"] for row in table], dtype=float)
    x = alpha_u + 0.5 * alpha_s
    y = alpha_s * math.sqrt(3.0) / 2.0
    ax.plot([0, 1, 0.5, 0], [0, 0, math.sqrt(3.0) / 2.0, 0], "k-", linewidth=0.8)
    points = ax.scatter(x, y, c=rates, vmin=0.0, vmax=100.0, cmap="viridis", s=60)
    fig.colorbar(points, ax=ax, label="success rate (%)")
    ax.text(-0.05, -0.05, "exploration")
    ax.text(0.9, -0.05, "uncertainty")
    ax.text(0.45, 0.9, "goal")
    ax.set_axis_off()
    ax.set_aspect("equal")
    return save(fig, path)


def time_boxplot(runs, path):
    modes = ["ours", "lawnmower"]
    data = [[r["t_found"] for r in runs if r["mode"] == m and r["found"]] for m in modes]
    if not any(data):
        return None
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.boxplot([d if d else [math.nan] for d in data])
    ax.set_xticks([1, 2], modes)
    ax.set_ylabel("time to path (s)")
    return save(fig, path)


def agent_sweep_plot(table, path):
    counts = [row["n_agents"] for row in table]
    means = [row["mean_t_found"] for row in table]
    stds = [row["std_t_found"] for row in table]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.errorbar(counts, means, yerr=stds, marker="o", capsize=3)
    ax.set_xlabel("low-priority agents")
    ax.set_ylabel("time to path (s)")
    return save(fig, path)


def _log_estimates(records):
    latest = {}
    for record in records:
        if record["kind"] == "track_initialized":
            track = record["track"]
            latest[track["radar_id"]] = RadarEstimate(track["radar_id"], track["mean"], track["cov"], track["n_measurements"])
    return [latest[k] for k in sorted(latest)]


def render_log(log_path, figures_dir, grid_n=200):
    """Heatmaps, roadmap and trajectory for a single mission log."""
    records = utils.read_jsonl(log_path)
    head = records[0]
    if head["kind"] != "mission_started":
        log.warning("Log '{}' holds no mission; skipping its figures".format(log_path))
        return []
    settings = Settings.from_dict(head["settings"])
    scenario, mission = settings.scenario, settings.mission
    radars = [radar.RadarTruth.from_dict(r) for r in head["radars"]]
    files = [pd_heatmap(radars, scenario.rcs, scenario.region, os.path.join(figures_dir, "pd_heatmap.png"), grid_n)]

    estimates = _log_estimates(records)
    if estimates:
        unc = settings.uncertainty
        priors = pd_uncertainty.UnknownPrior.from_config(scenario, unc.relative_std, unc.p_fa_log10_std)
        known = pd_uncertainty.KnownParamBelief.at(mission.start, scenario.rcs, unc.rcs_std, unc.position_std)
        files.append(chance_heatmap(
            estimates, priors, known, scenario.region, mission.pd_threshold,
            os.path.join(figures_dir, "chance_heatmap.png"), grid_n,
        ))
    else:
        log.warning("No radar estimates in '{}'; skipping the chance heatmap".format(log_path))

    dispatched = [r for r in records if r["kind"] == "dispatched"]
    trajectory = None
    if dispatched:
        trajectory = bspline.BSplineTrajectory.from_dict(dispatched[-1]["plan"]["trajectory"])
        files.append(trajectory_plot(trajectory, radars, scenario.rcs, scenario.region, os.path.join(figures_dir, "trajectory.png")))
    else:
        log.warning("No dispatched plan in '{}'; skipping the trajectory".format(log_path))

    if radars:
        weights = deterministic_weights(radars, scenario.rcs)
        sites = [roadmap.WeightedSite(r.position, 1.0 / w, r.radar_id) for r, w in zip(radars, weights)]
        graph = roadmap.build_weighted_diagram(sites, scenario.region, settings.planner.circle_samples)
        files.append(roadmap_overlay(graph, os.path.join(figures_dir, "roadmap.png"), trajectory, radars))
    return files


def render(result, figures_dir):
    """Figures for an experiment result; plots without data are skipped with a warning."""
    files = []
    if not result.table and not result.runs:
        log.warning("No results to render for {}".format(result.kind))
        return files
    if result.kind == "ternary" and result.table:
        files.append(ternary_scatter(result.table, os.path.join(figures_dir, "ternary.png")))
    elif result.kind == "baseline":
        path = time_boxplot(result.runs, os.path.join(figures_dir, "baseline_times.png"))
        if path is None:
            log.warning("No successful missions; skipping the baseline box plot")
        else:
            files.append(path)
    elif result.kind == "agent_sweep" and result.table:
        files.append(agent_sweep_plot(result.table, os.path.join(figures_dir, "agent_sweep.png")))
    elif result.kind in ("single", "calibration"):
        for run in result.runs:
            if not run.get("log") or not os.path.exists(run["log"]):
                log.warning("Missing mission log for seed {}; skipping its figures".format(run.get("seed")))
                continue
            subdir = os.path.join(figures_dir, "seed{}".format(run["seed"]))
            files.extend(render_log(run["log"], subdir))
    return [f for f in files if f]
