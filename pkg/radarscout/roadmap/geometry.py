import math
from dataclasses import dataclass

import numpy as np

from ..core import Position2

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WeightedSite:
    position: Position2
    weight: float
    site_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "position", Position2.of(self.position))
        if not self.weight > 0:
            raise ValueError("Site weight must be positive, got {}".format(self.weight))


@dataclass(frozen=True, eq=False)
class Circle:
    center: np.ndarray
    radius: float

    def point(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.center + self.radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)


@dataclass(frozen=True, eq=False)
class Line:
    point: np.ndarray
    direction: np.ndarray

    def at(self, s):
        s = np.asarray(s, dtype=float)
        return self.point + s[..., None] * self.direction


def apollonius_circle(site_i, site_j):
    """Locus of points with |x - x_i| / w_i = |x - x_j| / w_j."""
    a = site_i.position.as_array()
    b = site_j.position.as_array()
    separation = np.linalg.norm(a - b)
    if separation == 0:
        raise ValueError("Generators {} and {} coincide".format(site_i.site_id, site_j.site_id))
    k = site_i.weight / site_j.weight
    if abs(k - 1.0) < 1e-12:
        along = (b - a) / separation
        return Line(0.5 * (a + b), np.array([-along[1], along[0]]))
    k_sq = k * k
    center = (a - k_sq * b) / (1.0 - k_sq)
    radius = k * separation / abs(1.0 - k_sq)
    return Circle(center, radius)


def weighted_distances(points, positions, weights):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    delta = points[:, None, :] - np.asarray(positions, dtype=float)[None, :, :]
    return np.hypot(delta[..., 0], delta[..., 1]) / np.asarray(weights, dtype=float)[None, :]


def circle_region_intervals(circle, region):
    """Angular intervals (a, b), a < b, of the circle that lie inside the region."""
    cx, cy = circle.center
    r = circle.radius
    lx, ly, ux, uy = region.lower.x, region.lower.y, region.upper.x, region.upper.y
    angles = []
    for x in (lx, ux):
        dx = x - cx
        if abs(dx) <= r:
            dy = math.sqrt(max(r * r - dx * dx, 0.0))
            for y in (cy - dy, cy + dy):
                if ly <= y <= uy:
                    angles.append(math.atan2(y - cy, dx) % TWO_PI)
    for y in (ly, uy):
        dy = y - cy
        if abs(dy) <= r:
            dx = math.sqrt(max(r * r - dy * dy, 0.0))
            for x in (cx - dx, cx + dx):
                if lx <= x <= ux:
                    angles.append(math.atan2(dy, x - cx) % TWO_PI)
    if not angles:
        if region.contains(circle.point(0.0)):
            return [(0.0, TWO_PI)]
        return []
    angles = sorted(angles)
    unique = [angles[0]]
    for angle in angles[1:]:
        if angle - unique[-1] > 1e-12:
            unique.append(angle)
    if len(unique) > 1 and unique[0] + TWO_PI - unique[-1] <= 1e-12:
        unique.pop()
    intervals = []
    for k, a in enumerate(unique):
        b = unique[k + 1] if k + 1 < len(unique) else unique[0] + TWO_PI
        if b - a <= 1e-12:
            continue
        if region.contains(circle.point(0.5 * (a + b)), tol=1e-9 * region.diagonal):
            intervals.append((a, b))
    return intervals


def line_region_interval(line, region):
    """Parameter range (s0, s1) of the line inside the region, or None."""
    s0, s1 = -math.inf, math.inf
    low = (region.lower.x, region.lower.y)
    high = (region.upper.x, region.upper.y)
    for axis in range(2):
        p, d = line.point[axis], line.direction[axis]
        if abs(d) < 1e-15:
            if p < low[axis] or p > high[axis]:
                return None
            continue
        t0, t1 = (low[axis] - p) / d, (high[axis] - p) / d
        s0, s1 = max(s0, min(t0, t1)), min(s1, max(t0, t1))
    if s1 - s0 <= 0:
        return None
    return s0, s1


def arc_closest_point(edge, q):
    """Closest point of an arc edge to q; ties (q at the center) resolve to theta0."""
    q = Position2.of(q).as_array()
    offset = q - edge.center
    if np.allclose(offset, 0.0):
        return Position2(*edge.point_at(0.0))
    phase = (math.atan2(offset[1], offset[0]) - edge.theta0) % TWO_PI
    if phase <= edge.sweep:
        return Position2(*(edge.center + edge.radius * offset / np.linalg.norm(offset)))
    ends = edge.point_at(np.array([0.0, 1.0]))
    distances = np.hypot(*(ends - q).T)
    return Position2(*ends[int(np.argmin(distances))])


def segment_closest_point(p0, p1, q):
    p0, p1, q = (np.asarray(v, dtype=float) for v in (p0, p1, q))
    d = p1 - p0
    length_sq = d @ d
    if length_sq == 0:
        return p0
    s = np.clip((q - p0) @ d / length_sq, 0.0, 1.0)
    return p0 + s * d
