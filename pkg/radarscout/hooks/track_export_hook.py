import logging

from .mission_hook import MissionHook

log = logging.getLogger("radarscout")


class TrackExportHook(MissionHook):
    def hook_track_initialized(self, mission, estimate):
        count = mission.tracks.measurement_count(estimate.radar_id)
        record = dict(estimate.as_dict(), measurement_count=count)
        mission.record("track_initialized", track=record)
        log.debug("exported track for radar {} after {} measurements".format(estimate.radar_id, count))
        return record
