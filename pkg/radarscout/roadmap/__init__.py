from .generalized import DiagramRaster, build_generalized_diagram, label_points, radar_margins  # noqa: F401
from .geometry import Circle, Line, WeightedSite, apollonius_circle, arc_closest_point  # noqa: F401
from .graph import ArcEdge, Edge, RoadmapGraph, SegmentEdge, SplineEdge  # noqa: F401
from .search import PathResult, astar, shortest_path  # noqa: F401
from .trim import ChanceRisk, DeterministicRisk, EdgeRisk, trim_deterministic, trim_uncertain  # noqa: F401
from .weighted import build_weighted_diagram  # noqa: F401
