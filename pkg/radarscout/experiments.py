"""Scenario batches behind the command line experiments.

Every mission writes its log to disk and every statistic here is computed
by reading those logs back, so the tables can always be rebuilt from the
raw records.
"""
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bspline, radar, utils
from .config import Settings
from .core import BEST_WEIGHTS, PlannerWeights
from .sim import Mission

log = logging.getLogger("radarscout")

KINDS = ("ternary", "baseline", "agent_sweep", "calibration", "single")


def simplex_grid(divisions=6, extra=(BEST_WEIGHTS,)):
    """Weight triples on the simplex at the given spacing plus any extra triples."""
    if divisions < 1:
        raise ValueError("divisions must be at least 1, got {}".format(divisions))
    grid = []
    for i in range(divisions + 1):
        for j in range(divisions + 1 - i):
            k = divisions - i - j
            grid.append(PlannerWeights(i / divisions, j / divisions, k / divisions))
    for weights in extra:
        if not any(np.allclose(weights.as_tuple(), w.as_tuple()) for w in grid):
            grid.append(weights)
    return grid


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str = "single"
    scenarios: int = 20
    seed: int = 0
    weights: tuple = (BEST_WEIGHTS,)
    agent_counts: tuple = (10,)
    output_dir: str = "results"
    jobs: int = 1
    mode: str = "ours"
    settings: Settings = field(default_factory=Settings)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError("Unknown experiment kind '{}'".format(self.kind))
        if self.scenarios < 1:
            raise ValueError("Scenario count must be at least 1, got {}".format(self.scenarios))
        if list(self.agent_counts) != sorted(self.agent_counts):
            raise ValueError("Agent counts must be ascending, got {}".format(list(self.agent_counts)))
        object.__setattr__(self, "weights", tuple(self.weights))
        object.__setattr__(self, "agent_counts", tuple(self.agent_counts))

    @property
    def seeds(self):
        return [self.seed + i for i in range(self.scenarios)]

    @property
    def log_dir(self):
        return os.path.join(self.output_dir, "logs", self.kind)


@dataclass(frozen=True)
class MissionTask:
    label: str
    mode: str
    settings: Settings
    log_path: str

    @property
    def seed(self):
        return self.settings.scenario.seed


@dataclass(eq=False)
class ExperimentResult:
    kind: str
    table: list
    runs: list
    extra: dict = field(default_factory=dict)

    @property
    def errors(self):
        return [run for run in self.runs if run.get("error")]

    def as_dict(self):
        return {"kind": self.kind, "table": list(self.table), "runs": list(self.runs), "extra": self.extra}

    @classmethod
    def from_dict(cls, data):
        return cls(data["kind"], list(data["table"]), utils.WhereList(data["runs"]), dict(data.get("extra") or {}))


def weights_label(weights):
    return "w{:.3f}-{:.3f}-{:.3f}".format(*weights.as_tuple())


def mission_task(spec, label, seed, mode="ours", weights=None, n_agents=None):
    settings = spec.settings.replace(
        scenario={"seed": seed, "n_agents": n_agents or spec.settings.scenario.n_agents},
    )
    if weights is not None:
        settings = settings.replace(weights=weights)
    path = os.path.join(spec.log_dir, "{}-seed{}-{}.jsonl".format(label, seed, mode))
    return MissionTask(label, mode, settings, path)


def execute(task):
    """Run one mission and persist its log; errors are logged as records too."""
    os.makedirs(os.path.dirname(task.log_path) or ".", exist_ok=True)
    try:
        outcome = Mission(task.settings, task.mode).run()
        records = outcome.logs
    except Exception as exc:
        log.exception("Mission {} seed {} ({}) failed".format(task.label, task.seed, task.mode))
        records = [{
            "kind": "mission_error",
            "time": 0.0,
            "mode": task.mode,
            "seed": task.seed,
            "settings": task.settings.as_dict(),
            "error": "{}: {}".format(type(exc).__name__, exc),
        }]
    utils.write_jsonl(task.log_path, records)
    return task.log_path


def run_tasks(tasks, jobs=1):
    """Execute the tasks, in parallel when jobs > 1; log paths come back in task order."""
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(execute, tasks))
    return [execute(task) for task in tasks]


def summarize_log(path, label=None):
    """One row per mission, read back from its log."""
    records = utils.read_jsonl(path)
    head = records[0]
    if head["kind"] == "mission_error":
        weights = head["settings"]["weights"]
        return {
            "label": label, "mode": head["mode"], "seed": head["seed"], "found": False, "t_found": math.inf,
            "n_agents": head["settings"]["scenario"]["n_agents"], "hp_attempts": 0, "coverage": 0.0,
            "alpha_e": weights["alpha_e"], "alpha_u": weights["alpha_u"], "alpha_s": weights["alpha_s"],
            "error": head["error"], "log": path,
        }
    finished = [r for r in records if r["kind"] == "mission_finished"][-1]
    weights = head["settings"]["weights"]
    return {
        "label": label,
        "mode": head["mode"],
        "seed": head["seed"],
        "found": finished["found"],
        "t_found": finished["t_found"],
        "n_agents": head["settings"]["scenario"]["n_agents"],
        "hp_attempts": finished["hp_attempts"],
        "coverage": finished["coverage"],
        "alpha_e": weights["alpha_e"],
        "alpha_u": weights["alpha_u"],
        "alpha_s": weights["alpha_s"],
        "error": None,
        "log": path,
    }


def _summaries(tasks, paths):
    return utils.WhereList(summarize_log(path, task.label) for task, path in zip(tasks, paths))


def _time_stats(runs):
    times = np.array([r["t_found"] for r in runs if r["found"]], dtype=float)
    if not len(times):
        return math.nan, math.nan, math.nan
    std = float(np.std(times, ddof=1)) if len(times) > 1 else 0.0
    return float(np.mean(times)), std, float(np.median(times))


def success_rate(runs):
    if not runs:
        return math.nan
    return 100.0 * sum(1 for r in runs if r["found"]) / len(runs)


def run_ternary(spec):
    tasks = [
        mission_task(spec, weights_label(w), seed, "ours", weights=w)
        for w in spec.weights
        for seed in spec.seeds
    ]
    runs = _summaries(tasks, run_tasks(tasks, spec.jobs))
    table = []
    for w in spec.weights:
        group = runs.where(label=weights_label(w))
        mean, std, _ = _time_stats(group)
        table.append({
            "alpha_e": w.alpha_e,
            "alpha_u": w.alpha_u,
            "alpha_s": w.alpha_s,
            "scenarios": len(group),
            "successes": sum(1 for r in group if r["found"]),
            "success_rate": success_rate(group),
            "mean_t_found": mean,
        })
    return ExperimentResult("ternary", table, runs)


def run_baseline(spec):
    weights = spec.weights[0]
    tasks = [
        mission_task(spec, "baseline", seed, mode, weights=weights)
        for seed in spec.seeds
        for mode in ("ours", "lawnmower")
    ]
    runs = _summaries(tasks, run_tasks(tasks, spec.jobs))
    table = []
    for seed in spec.seeds:
        ours = runs.find(seed=seed, mode="ours")
        lawnmower = runs.find(seed=seed, mode="lawnmower")
        table.append({
            "seed": seed,
            "ours_found": ours["found"],
            "ours_t_found": ours["t_found"],
            "lawnmower_found": lawnmower["found"],
            "lawnmower_t_found": lawnmower["t_found"],
        })
    extra = {}
    for mode in ("ours", "lawnmower"):
        group = runs.where(mode=mode)
        mean, std, median = _time_stats(group)
        extra[mode] = {"success_rate": success_rate(group), "mean_t_found": mean, "std_t_found": std, "median_t_found": median}
    return ExperimentResult("baseline", table, runs, extra)


def run_agent_sweep(spec):
    weights = spec.weights[0]
    tasks = [
        mission_task(spec, "n{}".format(n), seed, "ours", weights=weights, n_agents=n)
        for n in spec.agent_counts
        for seed in spec.seeds
    ]
    runs = _summaries(tasks, run_tasks(tasks, spec.jobs))
    table = []
    for n in spec.agent_counts:
        group = runs.where(n_agents=n)
        mean, std, _ = _time_stats(group)
        table.append({
            "n_agents": n,
            "scenarios": len(group),
            "success_rate": success_rate(group),
            "mean_t_found": mean,
            "std_t_found": std,
        })
    return ExperimentResult("agent_sweep", table, runs)


def dispatched_max_pd(path, verify_factor=10):
    """Ground-truth max PD along the dispatched trajectory in a mission log, None if nothing flew."""
    records = utils.read_jsonl(path)
    dispatched = [r for r in records if r["kind"] == "dispatched"]
    if not dispatched or records[0]["kind"] != "mission_started":
        return None
    head = records[0]
    radars = [radar.RadarTruth.from_dict(r) for r in head["radars"]]
    if not radars:
        return 0.0
    traj = bspline.BSplineTrajectory.from_dict(dispatched[-1]["plan"]["trajectory"])
    n = verify_factor * head["settings"]["optimizer"]["n_samples"] + 1
    points = traj.eval(np.linspace(traj.t0, traj.tf, n))
    return float(np.max(radar.pd_field(points, radars, head["settings"]["scenario"]["rcs"])))


def run_calibration(spec):
    weights = spec.weights[0]
    tasks = [mission_task(spec, "calibration", seed, "ours", weights=weights) for seed in spec.seeds]
    paths = run_tasks(tasks, spec.jobs)
    runs = _summaries(tasks, paths)
    threshold = spec.settings.mission.pd_threshold
    table = []
    for run, path in zip(runs, paths):
        max_pd = dispatched_max_pd(path, spec.settings.optimizer.verify_factor)
        run["max_pd"] = max_pd
        if max_pd is not None:
            table.append({"seed": run["seed"], "t_found": run["t_found"], "max_pd": max_pd, "safe": max_pd <= threshold})
    extra = {
        "dispatched": len(table),
        "pd_threshold": threshold,
        "epsilon": spec.settings.mission.epsilon,
        "fraction_safe": float(np.mean([row["safe"] for row in table])) if table else math.nan,
        "mean_max_pd": float(np.mean([row["max_pd"] for row in table])) if table else math.nan,
    }
    return ExperimentResult("calibration", table, runs, extra)


def run_single(spec):
    weights = spec.weights[0]
    tasks = [mission_task(spec, "single", seed, spec.mode, weights=weights) for seed in spec.seeds[:1]]
    paths = run_tasks(tasks, 1)
    runs = _summaries(tasks, paths)
    return ExperimentResult("single", [dict(r) for r in runs], runs)


RUNNERS = {
    "ternary": run_ternary,
    "baseline": run_baseline,
    "agent_sweep": run_agent_sweep,
    "calibration": run_calibration,
    "single": run_single,
}


def run_experiment(spec):
    log.info("Running {} over {} scenarios".format(spec.kind, spec.scenarios))
    return RUNNERS[spec.kind](spec)
