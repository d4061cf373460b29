import logging

from .mission_hook import MissionHook

log = logging.getLogger("radarscout")

# wall-clock fields stay out of the log so reruns reproduce it exactly
WALL_CLOCK_KEYS = ("timings", "elapsed")


def _without_wall_clock(value):
    if isinstance(value, dict):
        return {k: _without_wall_clock(v) for k, v in value.items() if k not in WALL_CLOCK_KEYS}
    return value


class PlanningLogHook(MissionHook):
    """Mirrors planning rounds and HP attempts into the mission log."""

    def hook_waypoints_planned(self, mission, assignment):
        mission.record("waypoints_planned", **assignment.as_dict())

    def hook_hp_attempted(self, mission, result):
        mission.record(
            "hp_attempted",
            dispatchable=result.dispatchable,
            reason=result.reason,
            tf=result.tf if result.trajectory is not None else None,
            p_max=result.diagnostics.get("p_max"),
            n_estimates=len(mission.tracks.estimates()),
        )
        if not result.dispatchable:
            log.debug("hp attempt at t={:.0f} s not dispatchable: {}".format(mission.state.clock, result.reason))

    def hook_dispatched(self, mission, result):
        mission.record("dispatched", plan=_without_wall_clock(result.as_dict()))
        log.info("high-priority agent dispatched at t={:.0f} s, tf={:.1f} s".format(mission.state.clock, result.tf))
