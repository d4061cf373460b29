import copy
import math

import numpy as np

from .geometry import TWO_PI, arc_closest_point, segment_closest_point


class Edge(object):
    kind = None
    # points used to measure curved edges
    length_samples = 256

    def __init__(self, u, v, sites=None):
        self.u = u
        self.v = v
        self.sites = tuple(sites) if sites is not None else None
        self.max_risk = None
        self.min_chance = None

    def other(self, vertex):
        return self.v if vertex == self.u else self.u

    def point_at(self, s):
        raise NotImplementedError()

    def sample(self, n):
        """n+1 points, both endpoints included, from u to v."""
        return self.point_at(np.linspace(0.0, 1.0, n + 1))

    def oriented_points(self, from_vertex, spacing):
        n = max(int(math.ceil(self.length / spacing)), 1)
        points = self.sample(n)
        if from_vertex == self.v:
            points = points[::-1]
        return points

    def closest_point(self, q):
        points = self.sample(self.length_samples)
        return points[int(np.argmin(np.hypot(*(points - np.asarray(q, dtype=float)).T)))]

    def annotated(self, **values):
        edge = copy.copy(self)
        for k, v in values.items():
            setattr(edge, k, v)
        return edge

    def as_dict(self):
        return {
            "kind": self.kind,
            "u": self.u,
            "v": self.v,
            "sites": list(self.sites) if self.sites is not None else None,
            "length": self.length,
            "max_risk": self.max_risk,
            "min_chance": self.min_chance,
        }


class ArcEdge(Edge):
    kind = "arc"

    def __init__(self, u, v, center, radius, theta0, sweep, sites=None):
        super().__init__(u, v, sites)
        if not radius > 0:
            raise ValueError("Arc radius must be positive, got {}".format(radius))
        if not 0 < sweep <= TWO_PI:
            raise ValueError("Arc sweep must lie in (0, 2 pi], got {}".format(sweep))
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.theta0 = float(theta0) % TWO_PI
        self.sweep = float(sweep)
        self.length = self.radius * self.sweep

    @property
    def thetaf(self):
        return (self.theta0 + self.sweep) % TWO_PI

    def point_at(self, s):
        theta = self.theta0 + np.asarray(s, dtype=float) * self.sweep
        return self.center + self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)

    def closest_point(self, q):
        return arc_closest_point(self, q).as_array()

    def as_dict(self):
        return dict(super().as_dict(), center=self.center.tolist(), radius=self.radius, theta0=self.theta0, thetaf=self.thetaf)


class SegmentEdge(Edge):
    kind = "segment"

    def __init__(self, u, v, p0, p1, sites=None, kind=None):
        super().__init__(u, v, sites)
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)
        if kind:
            self.kind = kind
        self.length = float(np.linalg.norm(self.p1 - self.p0))

    def point_at(self, s):
        s = np.asarray(s, dtype=float)
        return self.p0 + s[..., None] * (self.p1 - self.p0)

    def closest_point(self, q):
        return segment_closest_point(self.p0, self.p1, q)

    def as_dict(self):
        return dict(super().as_dict(), p0=self.p0.tolist(), p1=self.p1.tolist())


class SplineEdge(Edge):
    kind = "spline"

    def __init__(self, u, v, trajectory, sites=None):
        super().__init__(u, v, sites)
        self.trajectory = trajectory
        points = self.point_at(np.linspace(0.0, 1.0, self.length_samples + 1))
        self.length = float(np.sum(np.hypot(*np.diff(points, axis=0).T)))

    def point_at(self, s):
        traj = self.trajectory
        return traj.eval(traj.t0 + np.asarray(s, dtype=float) * traj.duration)

    def as_dict(self):
        return dict(super().as_dict(), trajectory=self.trajectory.as_dict())


class RoadmapGraph(object):
    def __init__(self, region, merge_tol=None):
        self.region = region
        self.merge_tol = merge_tol if merge_tol is not None else 1e-6 * region.diagonal
        self.vertices = []
        self.edges = []
        self.raster = None

    @property
    def vertex_array(self):
        return np.array(self.vertices).reshape(-1, 2)

    def add_vertex(self, point):
        point = np.asarray(point, dtype=float)
        if self.vertices:
            distances = np.hypot(*(self.vertex_array - point).T)
            nearest = int(np.argmin(distances))
            if distances[nearest] <= self.merge_tol:
                return nearest
        self.vertices.append(point)
        return len(self.vertices) - 1

    def add_edge(self, edge):
        for vertex in (edge.u, edge.v):
            if not 0 <= vertex < len(self.vertices):
                raise LookupError("Edge references unknown vertex {}".format(vertex))
        if edge.u == edge.v or not edge.length > 0:
            return None
        self.edges.append(edge)
        return len(self.edges) - 1

    def adjacency(self):
        adjacent = {k: [] for k in range(len(self.vertices))}
        for index, edge in enumerate(self.edges):
            adjacent[edge.u].append(index)
            adjacent[edge.v].append(index)
        return adjacent

    def on_boundary(self, point):
        r = self.region
        x, y = point
        return min(abs(x - r.lower.x), abs(x - r.upper.x), abs(y - r.lower.y), abs(y - r.upper.y)) <= self.merge_tol

    def add_boundary_ring(self):
        """Split the region boundary at every boundary vertex and add the pieces as edges."""
        for corner in self.region.corners():
            self.add_vertex(corner)
        ring = [k for k, p in enumerate(self.vertices) if self.on_boundary(p)]
        ring.sort(key=lambda k: (self._perimeter_coordinate(self.vertices[k]), k))
        for a, b in zip(ring, ring[1:] + ring[:1]):
            self.add_edge(SegmentEdge(a, b, self.vertices[a], self.vertices[b], kind="boundary"))

    def _perimeter_coordinate(self, point):
        r = self.region
        x, y = point
        w, h = r.width, r.height
        sides = [
            (abs(y - r.lower.y), x - r.lower.x),
            (abs(x - r.upper.x), w + y - r.lower.y),
            (abs(y - r.upper.y), w + h + r.upper.x - x),
            (abs(x - r.lower.x), 2 * w + h + r.upper.y - y),
        ]
        return min(sides)[1]

    def copy(self):
        graph = RoadmapGraph(self.region, self.merge_tol)
        graph.vertices = list(self.vertices)
        graph.edges = list(self.edges)
        graph.raster = self.raster
        return graph

    def with_edges(self, edges):
        graph = self.copy()
        graph.edges = list(edges)
        return graph

    def as_dict(self):
        return {
            "vertices": [list(map(float, v)) for v in self.vertices],
            "edges": [e.as_dict() for e in self.edges],
        }
