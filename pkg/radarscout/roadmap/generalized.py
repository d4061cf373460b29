import logging
from dataclasses import dataclass

import contourpy
import numpy as np

from .. import bspline, pd_uncertainty
from .graph import RoadmapGraph, SegmentEdge, SplineEdge

log = logging.getLogger("radarscout")

# margins are clipped so differences stay finite where a PD variance vanishes
MARGIN_CLIP = 1e12
MIN_SPLINE_POINTS = 8
MAX_SPLINE_CONTROL = 12
RADAR_NUDGE = 1e-3


@dataclass(eq=False)
class DiagramRaster:
    xs: np.ndarray
    ys: np.ndarray
    labels: np.ndarray
    margins: np.ndarray

    def as_dict(self):
        return {"xs": self.xs.tolist(), "ys": self.ys.tolist(), "labels": self.labels.tolist()}


def radar_margins(points, estimates, priors, known, pd_threshold):
    """Per-radar standardized margin (P, N); lower means less likely to be safe."""
    points = _off_radars(np.atleast_2d(np.asarray(points, dtype=float)), estimates)
    mean, variance = pd_uncertainty.radar_belief_field(points, known, priors, estimates)
    return np.clip(pd_uncertainty.margin(mean, variance, pd_threshold), -MARGIN_CLIP, MARGIN_CLIP)


def _off_radars(points, estimates):
    # grid points landing exactly on an estimate are nudged off the singularity
    centers = np.array([np.asarray(e.mean, dtype=float)[:2] for e in estimates])
    hit = np.any(np.all(points[:, None, :] == centers[None, :, :], axis=-1), axis=1)
    if hit.any():
        points = points.copy()
        points[hit, 0] += RADAR_NUDGE
    return points


def label_points(points, estimates, priors, known, pd_threshold):
    """Index of the radar most likely to violate the threshold; ties go to the lowest index."""
    return np.argmin(radar_margins(points, estimates, priors, known, pd_threshold), axis=1)


def _adjacent_pairs(labels):
    pairs = set()
    for a, b in ((labels[:, :-1], labels[:, 1:]), (labels[:-1, :], labels[1:, :])):
        differ = a != b
        for p, q in zip(a[differ], b[differ]):
            pairs.add((int(min(p, q)), int(max(p, q))))
    return sorted(pairs)


def _pair_dominant(z, a, b):
    own = 0.5 * (z[:, a] + z[:, b])
    if z.shape[1] == 2:
        return np.ones(len(z), dtype=bool)
    others = z.copy()
    others[:, [a, b]] = np.inf
    return own <= others.min(axis=1) + 1e-9 * np.maximum(np.abs(own), 1.0)


def _split_runs(points, mask):
    """Pieces of a contour polyline where mask holds; closed loops are handled."""
    closed = len(points) > 2 and np.allclose(points[0], points[-1])
    if closed:
        if mask.all():
            half = len(points) // 2
            return [points[: half + 1], points[half:]]
        shift = int(np.argmin(mask))
        points = np.concatenate([points[shift:-1], points[: shift + 1]])
        mask = np.concatenate([mask[shift:-1], mask[: shift + 1]])
    runs = []
    start = None
    for k, value in enumerate(mask):
        if value and start is None:
            start = k
        elif not value and start is not None:
            runs.append(points[start:k])
            start = None
    if start is not None:
        runs.append(points[start:])
    return [r for r in runs if len(r) >= 2]


def _edge_for_run(graph, run, pair):
    u = graph.add_vertex(run[0])
    v = graph.add_vertex(run[-1])
    if u == v:
        return None
    if len(run) >= MIN_SPLINE_POINTS:
        n_control = min(max(4, len(run) // 4), MAX_SPLINE_CONTROL)
        try:
            traj, _ = bspline.fit_to_path(run, n_control)
            return graph.add_edge(SplineEdge(u, v, traj, sites=pair))
        except ValueError as exc:
            log.debug("spline fit failed for boundary {}: {}".format(pair, exc))
    return graph.add_edge(SegmentEdge(u, v, run[0], run[-1], sites=pair))


def build_generalized_diagram(estimates, priors, known, region, grid_n=201, pd_threshold=0.15):
    """Roadmap over the cells of a grid labelled by the most threatening radar.

    A point belongs to radar j when radar j alone is least likely to keep the
    PD at or below pd_threshold. Cell boundaries are traced as zero contours
    of pairwise margin differences and fitted with cubic splines.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("Generalized diagram needs at least one radar estimate")
    if grid_n < 32:
        raise ValueError("grid_n must be at least 32, got {}".format(grid_n))
    xs = np.linspace(region.lower.x, region.upper.x, grid_n)
    ys = np.linspace(region.lower.y, region.upper.y, grid_n)
    grid_x, grid_y = np.meshgrid(xs, ys)
    points = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    z = radar_margins(points, estimates, priors, known, pd_threshold)
    labels = np.argmin(z, axis=1).reshape(grid_n, grid_n)
    cell_diagonal = np.hypot(xs[1] - xs[0], ys[1] - ys[0])
    graph = RoadmapGraph(region, merge_tol=1.5 * cell_diagonal)
    graph.raster = DiagramRaster(xs, ys, labels, z.reshape(grid_n, grid_n, -1))
    ids = [e.radar_id for e in estimates]
    for a, b in _adjacent_pairs(labels):
        field = (z[:, a] - z[:, b]).reshape(grid_n, grid_n)
        generator = contourpy.contour_generator(xs, ys, field, line_type=contourpy.LineType.Separate)
        for line in generator.lines(0.0):
            line = region.clip(line)
            if len(line) < 2:
                continue
            mask = _pair_dominant(radar_margins(line, estimates, priors, known, pd_threshold), a, b)
            for run in _split_runs(line, mask):
                _edge_for_run(graph, run, (ids[a], ids[b]))
    graph.add_boundary_ring()
    log.debug("generalized diagram: {} radars, {} vertices, {} edges".format(len(estimates), len(graph.vertices), len(graph.edges)))
    return graph

