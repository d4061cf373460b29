from .config import Settings
from .sim import Mission, MissionOutcome, run_mission

__all__ = ["Settings", "Mission", "MissionOutcome", "run_mission"]
