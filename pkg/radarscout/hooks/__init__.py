from .mission_hook import MissionHook, trigger_hook
from .track_export_hook import TrackExportHook
from .planning_log_hook import PlanningLogHook

__all__ = [
    "MissionHook",
    "trigger_hook",
    "TrackExportHook",
    "PlanningLogHook",
]
