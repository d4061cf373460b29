import itertools
import logging

import numpy as np

from .geometry import (
    TWO_PI,
    Circle,
    apollonius_circle,
    circle_region_intervals,
    line_region_interval,
    weighted_distances,
)
from .graph import ArcEdge, RoadmapGraph, SegmentEdge

log = logging.getLogger("radarscout")

# relative slack when comparing weighted distances on a pair locus
DOMINANCE_TOL = 1e-9
REFINE_STEPS = 60


def _dominant(points, i, j, positions, weights):
    """True where sites i and j are the two nearest in weighted distance."""
    distances = weighted_distances(points, positions, weights)
    own = np.maximum(distances[:, i], distances[:, j])
    if distances.shape[1] == 2:
        return np.ones(len(distances), dtype=bool)
    others = distances.copy()
    others[:, [i, j]] = np.inf
    return own <= others.min(axis=1) * (1.0 + DOMINANCE_TOL)


def _refine(curve, outside, inside, predicate):
    """Bisect the parameter between a failing and a passing sample."""
    for _ in range(REFINE_STEPS):
        middle = 0.5 * (outside + inside)
        if middle in (outside, inside):
            break
        if predicate(curve(np.array([middle])))[0]:
            inside = middle
        else:
            outside = middle
    return inside


def _runs(mask):
    """(first, last) index pairs of consecutive True entries."""
    runs = []
    start = None
    for k, value in enumerate(mask):
        if value and start is None:
            start = k
        elif not value and start is not None:
            runs.append((start, k - 1))
            start = None
    if start is not None:
        runs.append((start, len(mask) - 1))
    return runs


def _dominant_intervals(curve, a, b, predicate, samples, periodic=False):
    params = np.linspace(a, b, samples + 1)
    mask = predicate(curve(params))
    if mask.all():
        return [(a, b)]
    intervals = []
    for first, last in _runs(mask):
        low = params[first] if first == 0 else _refine(curve, params[first - 1], params[first], predicate)
        high = params[last] if last == samples else _refine(curve, params[last + 1], params[last], predicate)
        intervals.append([low, high])
    if periodic and len(intervals) > 1 and mask[0] and mask[-1]:
        # the run through the seam of a full circle is one arc
        head = intervals.pop(0)
        intervals[-1][1] = head[1] + (b - a)
    return [tuple(v) for v in intervals if v[1] > v[0]]


def _add_arc(graph, circle, low, high, pair):
    sweep = high - low
    if sweep >= TWO_PI - 1e-12:
        # a closed circle becomes two half arcs so both ends are vertices
        _add_arc(graph, circle, low, low + np.pi, pair)
        _add_arc(graph, circle, low + np.pi, high, pair)
        return
    ends = circle.point(np.array([low, high]))
    u = graph.add_vertex(ends[0])
    v = graph.add_vertex(ends[1])
    graph.add_edge(ArcEdge(u, v, circle.center, circle.radius, low, sweep, sites=pair))


def build_weighted_diagram(sites, region, samples=256):
    """Roadmap over the multiplicatively weighted diagram of sites, clipped to region.

    Each edge is a maximal piece of a pairwise Apollonius circle (or bisector)
    along which its two sites are the two nearest in weighted distance.
    """
    sites = list(sites)
    if not sites:
        raise ValueError("Weighted diagram needs at least one site")
    positions = np.array([s.position.as_array() for s in sites])
    if not np.all(region.contains(positions)):
        raise ValueError("All sites must lie inside the region")
    weights = np.array([s.weight for s in sites])
    graph = RoadmapGraph(region)
    for i, j in itertools.combinations(range(len(sites)), 2):
        locus = apollonius_circle(sites[i], sites[j])
        pair = (sites[i].site_id, sites[j].site_id)

        def predicate(points, i=i, j=j):
            return _dominant(points, i, j, positions, weights)

        if isinstance(locus, Circle):
            for a, b in circle_region_intervals(locus, region):
                full = b - a >= TWO_PI - 1e-12
                for low, high in _dominant_intervals(locus.point, a, b, predicate, samples, periodic=full):
                    _add_arc(graph, locus, low, high, pair)
        else:
            interval = line_region_interval(locus, region)
            if interval is None:
                continue
            for low, high in _dominant_intervals(locus.at, interval[0], interval[1], predicate, samples):
                ends = locus.at(np.array([low, high]))
                u = graph.add_vertex(ends[0])
                v = graph.add_vertex(ends[1])
                graph.add_edge(SegmentEdge(u, v, ends[0], ends[1], sites=pair))
    graph.add_boundary_ring()
    log.debug("weighted diagram: {} sites, {} vertices, {} edges".format(len(sites), len(graph.vertices), len(graph.edges)))
    return graph
