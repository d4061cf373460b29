"""Time-stepped mission engine.

Low-priority agents fly straight lines toward their waypoints, intercept
radar emissions on a fixed tick, and feed one shared track store. Every
planning round may also attempt a plan for the high-priority agent; the
mission ends at the first dispatchable plan or at t_max.
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import hp_planner, radar, utils
from .config import Settings
from .core import AgentState, Position2, generate_scenario
from .estimator import RadarEstimate, TrackStore
from .hooks import trigger_hook
from .lp_planner import PathHistory, PlanningContext, coverage, get_strategy
from .pd_uncertainty import KnownParamBelief, UnknownPrior

log = logging.getLogger("radarscout")

# slack when deciding whether a float clock crossed a tick boundary
CLOCK_TOL = 1e-9


@dataclass(eq=False)
class SimState:
    clock: float = 0.0
    agents: dict = field(default_factory=dict)
    history: PathHistory = field(default_factory=PathHistory)
    assignment: object = None
    plan: object = None
    events: list = field(default_factory=list)
    next_history: float = 0.0
    planning_rounds: int = 0
    hp_attempts: int = 0

    def positions(self):
        return {str(a): list(s.position) for a, s in sorted(self.agents.items())}


@dataclass(eq=False)
class MissionOutcome:
    found: bool
    t_found: float
    plan: object
    logs: list
    coverage: float = 0.0
    hp_attempts: int = 0
    n_estimates: int = 0
    mode: str = "ours"
    seed: int = 0

    def as_dict(self):
        return {
            "found": self.found,
            "t_found": self.t_found,
            "coverage": self.coverage,
            "hp_attempts": self.hp_attempts,
            "n_estimates": self.n_estimates,
            "mode": self.mode,
            "seed": self.seed,
            "tf": self.plan.tf if self.found else None,
        }

    @property
    def manifest(self):
        return self.logs[0] if self.logs else None

    def write_log(self, path):
        return utils.write_jsonl(path, self.logs)


def scaled_estimates(estimates, factor):
    if factor == 1.0:
        return list(estimates)
    return [RadarEstimate(e.radar_id, e.mean, e.cov * factor, e.n_measurements) for e in estimates]


class Mission(object):
    def __init__(self, settings=None, mode="ours", radars=None, history=None):
        self.settings = settings or Settings()
        self.mode = mode
        scenario = self.settings.scenario
        mission = self.settings.mission
        uncertainty = self.settings.uncertainty

        self.radars = generate_scenario(scenario) if radars is None else list(radars)
        self.context = PlanningContext(scenario, mission)
        self.strategy = get_strategy(mode)(self.context, self.settings.weights, self.settings.lp)
        self.noise = radar.NoiseModel.from_config(scenario)
        self.prior = UnknownPrior.from_config(
            scenario, uncertainty.relative_std, uncertainty.p_fa_log10_std
        ).scaled(uncertainty.covariance_scale)
        self.known = KnownParamBelief.at(
            mission.start, scenario.rcs, uncertainty.rcs_std, uncertainty.position_std
        ).scaled(uncertainty.covariance_scale)
        self.tracks = TrackStore.from_config(scenario, on_initialized=self.track_initialized)
        self.found = False
        self.t_found = math.inf

        agents = {a: AgentState(mission.start, 0.0, scenario.lp_speed) for a in range(scenario.n_agents)}
        if history is None:
            history = PathHistory()
            for agent_id in sorted(agents):
                history.append(agent_id, 0.0, mission.start)
        else:
            if len(history) and history.times.max() > 0:
                raise ValueError("Seeded history must end by t=0, got t={}".format(history.times.max()))
            history = history.copy()
        self.state = SimState(agents=agents, history=history, next_history=scenario.dt_e)
        self.record("mission_started", **self.seed_manifest())

    def seed_manifest(self):
        return {
            "mode": self.mode,
            "seed": self.settings.scenario.seed,
            "settings": self.settings.as_dict(),
            "radars": [r.as_dict() for r in self.radars],
            "seeded_history": self.state.history.as_dict(),
        }

    def trigger(self, hook, *args, **kwargs):
        return trigger_hook(hook, self, *args, **kwargs)

    def record(self, kind, **data):
        event = dict({"kind": kind, "time": self.state.clock}, **data)
        self.state.events.append(event)
        return event

    def track_initialized(self, estimate):
        self.trigger("track_initialized", estimate)

    def coverage(self):
        lp = self.settings.lp
        return coverage(self.state.history, self.settings.scenario, lp.coverage_grid_n, lp.coverage_threshold)

    def ready_for_hp(self):
        sim = self.settings.sim
        if len(self.tracks.estimates()) >= max(sim.min_estimates, 1):
            return True
        return self.coverage() >= sim.min_coverage

    def attempt_hp(self):
        settings = self.settings
        estimates = scaled_estimates(self.tracks.estimates(), settings.uncertainty.covariance_scale)
        result = hp_planner.plan_uncertain(
            estimates, self.prior, self.known, self.state.history, settings.mission, settings.limits,
            settings.scenario, settings.planner, settings.optimizer,
        )
        self.state.hp_attempts += 1
        self.state.plan = result
        self.trigger("hp_attempted", result)
        if result.dispatchable:
            self.found = True
            self.t_found = self.state.clock
            self.trigger("dispatched", result)
        return result

    def replan(self):
        state = self.state
        if not self.strategy.needs_replan(state.clock, state.agents, state.assignment):
            return False
        state.assignment = self.strategy.plan(
            state.clock, state.agents, self.tracks.estimates(), state.history, state.assignment
        )
        state.planning_rounds += 1
        self.trigger("waypoints_planned", state.assignment)
        if self.ready_for_hp():
            self.attempt_hp()
        return True

    def move(self, dt):
        state = self.state
        for agent_id, agent in sorted(state.agents.items()):
            waypoint = state.assignment.waypoint(agent_id) if state.assignment else None
            if waypoint is None:
                continue
            delta = waypoint.as_array() - agent.position.as_array()
            distance = float(np.hypot(*delta))
            if distance == 0:
                continue
            travel = min(agent.speed * dt, distance)
            position = agent.position.as_array() + delta * (travel / distance)
            state.agents[agent_id] = AgentState(Position2(*position), math.atan2(delta[1], delta[0]), agent.speed)

    def measure(self, tick_index):
        """Bernoulli intercept draw for every agent and radar at one measurement tick."""
        scenario = self.settings.scenario
        rng = utils.rng_stream(scenario.seed, "measurement", tick_index)
        time = tick_index * scenario.tick
        count = 0
        for agent_id, agent in sorted(self.state.agents.items()):
            params = radar.KnownAgentParams(scenario.rcs, agent.position, scenario.g_i)
            for truth in self.radars:
                if rng.random() >= radar.true_intercept_probability(agent.position, truth, scenario):
                    continue
                try:
                    m = radar.sample_measurement(params, truth, self.noise, rng, agent_id, time)
                except ValueError as exc:
                    log.debug("No measurement at tick {}: {}".format(tick_index, exc))
                    continue
                self.record("measurement", **m.as_dict())
                self.tracks.ingest(m)
                count += 1
        return count

    def record_history(self):
        state = self.state
        dt_e = self.settings.scenario.dt_e
        if state.clock + CLOCK_TOL < state.next_history:
            return
        for agent_id, agent in sorted(state.agents.items()):
            state.history.append(agent_id, state.clock, agent.position)
        state.next_history = (math.floor(state.clock / dt_e + CLOCK_TOL) + 1) * dt_e

    def step(self, dt=None):
        dt = self.settings.sim.dt if dt is None else dt
        if dt <= 0:
            raise ValueError("dt must be positive, got {}".format(dt))
        state = self.state
        self.replan()
        if self.found:
            return state

        tick = self.settings.scenario.tick
        first = int(math.floor(state.clock / tick + CLOCK_TOL)) + 1
        self.move(dt)
        state.clock += dt
        last = int(math.floor(state.clock / tick + CLOCK_TOL))
        for k in range(first, last + 1):
            self.measure(k)
        self.record_history()
        if self.settings.sim.record_positions:
            self.record("positions", agents=state.positions())
        return state

    def run(self, t_max=None):
        t_max = self.settings.sim.t_max if t_max is None else t_max
        while not self.found and self.state.clock + CLOCK_TOL < t_max:
            self.step()
        outcome = MissionOutcome(
            found=self.found,
            t_found=self.t_found if self.found else math.inf,
            plan=self.state.plan,
            logs=self.state.events,
            coverage=self.coverage(),
            hp_attempts=self.state.hp_attempts,
            n_estimates=len(self.tracks.estimates()),
            mode=self.mode,
            seed=self.settings.scenario.seed,
        )
        self.record("mission_finished", **outcome.as_dict())
        log.info(
            "{} mission seed {}: found={} t={} after {} hp attempts".format(
                self.mode, outcome.seed, outcome.found, outcome.t_found, outcome.hp_attempts
            )
        )
        return outcome


def step(mission, dt=1.0):
    return mission.step(dt)


def run_mission(scenario, weights, mission, mode="ours", t_max=1200.0, settings=None, radars=None, history=None):
    settings = (settings or Settings()).replace(scenario=scenario, weights=weights, mission=mission)
    return Mission(settings, mode, radars=radars, history=history).run(t_max)


def rerun(manifest, t_max=None):
    """Run a mission again from the manifest record at the head of its log."""
    settings = Settings.from_dict(manifest["settings"])
    radars = [radar.RadarTruth.from_dict(r) for r in manifest["radars"]]
    history = PathHistory.from_dict(manifest["seeded_history"])
    return Mission(settings, manifest["mode"], radars=radars, history=history).run(t_max)
