import logging

import numpy as np
from scipy import special

from .. import pd_uncertainty, radar, utils

log = logging.getLogger("radarscout")


class EdgeRisk(object):
    """Safety predicate shared by edge trimming and start/goal attachment."""

    def feasible(self, edge):
        return self.assess(edge)[0]

    def assess(self, edge):
        """(feasible, annotations) for a single edge."""
        raise NotImplementedError()

    def trim(self, graph):
        kept = []
        for edge in graph.edges:
            ok, annotations = self.assess(edge)
            if ok:
                kept.append(edge.annotated(**annotations))
        log.debug("trimmed {} of {} edges".format(len(graph.edges) - len(kept), len(graph.edges)))
        return graph.with_edges(kept)


class DeterministicRisk(EdgeRisk):
    def __init__(self, radars, agent, pd_threshold, samples=64):
        self.radars = list(radars)
        self.rcs = agent.sigma
        self.pd_threshold = pd_threshold
        self.samples = samples
        self.positions = np.array([r.position.as_array() for r in self.radars]).reshape(-1, 2)

    def candidates(self, edge):
        # PD along an edge peaks where the edge comes closest to a radar
        points = [edge.point_at(np.array([0.0, 1.0]))]
        if self.samples:
            points.append(edge.sample(self.samples))
        points.extend(np.asarray(edge.closest_point(q))[None, :] for q in self.positions)
        return np.concatenate(points)

    def assess(self, edge):
        if not self.radars:
            return True, {"max_risk": 0.0}
        max_risk = float(np.max(radar.pd_field(self.candidates(edge), self.radars, self.rcs)))
        return max_risk <= self.pd_threshold, {"max_risk": max_risk}


class ChanceRisk(EdgeRisk):
    def __init__(self, estimates, priors, known, pd_threshold, epsilon, samples_per_edge=32):
        self.estimates = list(estimates)
        self.priors = priors
        self.known = known
        self.pd_threshold = pd_threshold
        self.required = pd_uncertainty.required_margin(epsilon)
        self.samples_per_edge = samples_per_edge

    def margins(self, points):
        mean, variance = pd_uncertainty.belief_field(points, self.known, self.priors, self.estimates)
        return mean, pd_uncertainty.margin(mean, variance, self.pd_threshold)

    def assess(self, edge):
        if not self.estimates:
            return True, {"max_risk": 0.0, "min_chance": 1.0}
        try:
            mean, z = self.margins(edge.sample(self.samples_per_edge))
        except utils.SingularityError:
            return False, {"max_risk": 1.0, "min_chance": 0.0}
        ok = not np.any(z < self.required)
        return ok, {"max_risk": float(mean.max()), "min_chance": float(special.ndtr(z.min()))}


def trim_deterministic(graph, radars, agent, pd_threshold, samples=64):
    """Drop every edge whose largest overall PD exceeds pd_threshold."""
    return DeterministicRisk(radars, agent, pd_threshold, samples).trim(graph)


def trim_uncertain(graph, estimates, priors, known, pd_threshold, epsilon, samples_per_edge=32):
    """Drop every edge with a sampled point where P(PD <= pd_threshold) < epsilon."""
    return ChanceRisk(estimates, priors, known, pd_threshold, epsilon, samples_per_edge).trim(graph)
