"""Mission event hooks.

A subclass of MissionHook listens to a mission event by defining
``hook_<event>(mission, ...)``. The mission engine raises:

- ``waypoints_planned(mission, assignment)`` after every planning round
- ``track_initialized(mission, estimate)`` when a radar track starts
- ``hp_attempted(mission, result)`` after every high-priority plan
- ``dispatched(mission, result)`` when the high-priority agent leaves
"""
import logging
import re

log = logging.getLogger("radarscout")

MISSION_EVENTS = ("waypoints_planned", "track_initialized", "hp_attempted", "dispatched")


class MissionHook:
    pass


def handler_name(event):
    return "hook_" + re.sub("[^a-z0-9]+", "_", event, flags=re.I).lower()


def listeners(event):
    """Hook classes with a handler for event, in definition order."""
    name = handler_name(event)
    return [Hook for Hook in MissionHook.__subclasses__() if callable(getattr(Hook, name, None))]


def trigger_hook(event, mission, *args, **kwargs):
    """Delivers event to a fresh instance of every listener and returns their results."""
    name = handler_name(event)
    results = []
    for Hook in listeners(event):
        log.debug("{} handles {}".format(Hook.__name__, event))
        results.append(getattr(Hook(), name)(mission, *args, **kwargs))
    return results
