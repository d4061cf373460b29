import mock
import pytest

from ..sim import SimState


class RecordingMission(object):
    def __init__(self, estimates=(), counts=None, clock=0.0):
        self.state = SimState(clock=clock)
        self.tracks = mock.Mock()
        self.tracks.estimates.return_value = list(estimates)
        self.tracks.measurement_count.side_effect = lambda radar_id=None: (counts or {}).get(radar_id, 0)

    def record(self, kind, **data):
        event = dict({"kind": kind, "time": self.state.clock}, **data)
        self.state.events.append(event)
        return event

    @property
    def events(self):
        return self.state.events


@pytest.fixture
def recording_mission():
    def _mission(estimates=(), counts=None, clock=0.0):
        return RecordingMission(estimates, counts, clock)

    return _mission


@pytest.fixture
def hook_trigger():
    """Runs one hook class against a mission the way trigger_hook would."""

    def _trigger(hook_cls, hook, mission, *args, **kwargs):
        func = getattr(hook_cls(), "hook_" + hook, None)
        if func is None:
            return []
        return [func(mission, *args, **kwargs)]

    return _trigger
