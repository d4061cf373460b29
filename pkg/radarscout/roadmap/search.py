import heapq
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..core import Position2
from .graph import SegmentEdge

log = logging.getLogger("radarscout")


@dataclass(eq=False)
class PathResult:
    found: bool
    vertices: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    cost: float = math.inf
    graph: object = None
    reason: str = ""

    def points(self, spacing=100.0):
        """Polyline along the path, oriented from start to goal."""
        if not self.found:
            raise LookupError("No path: {}".format(self.reason))
        pieces = []
        for vertex, edge_index in zip(self.vertices, self.edges):
            piece = self.graph.edges[edge_index].oriented_points(vertex, spacing)
            pieces.append(piece if not pieces else piece[1:])
        if not pieces:
            return np.array([self.graph.vertices[self.vertices[0]]])
        return np.concatenate(pieces)

    def as_dict(self):
        return {
            "found": self.found,
            "vertices": list(self.vertices),
            "edges": list(self.edges),
            "cost": self.cost,
            "reason": self.reason,
        }


def _feasible(feasible, edge):
    return feasible is None or feasible(edge)


def _attach(graph, point, feasible, k, anchors):
    """Vertex index for point, linked by straight checked segments to nearby vertices.

    Only vertices that kept at least one edge after trimming are candidates;
    every feasible one among the k nearest gets a link.
    """
    existing = len(graph.vertices)
    adjacency = graph.adjacency()
    index = graph.add_vertex(point)
    if index < existing:
        return index
    candidates = [v for v in range(existing) if v not in anchors and adjacency[v]]
    if not candidates:
        return index
    distances = np.hypot(*(graph.vertex_array[candidates] - point).T)
    order = sorted(range(len(candidates)), key=lambda n: (distances[n], candidates[n]))
    linked = 0
    for n in order[:k]:
        target = candidates[n]
        edge = SegmentEdge(index, target, point, graph.vertices[target], kind="attachment")
        if _feasible(feasible, edge):
            graph.add_edge(edge)
            linked += 1
    if not linked:
        log.debug("no feasible attachment for {} among {} nearest vertices".format(tuple(point), k))
    return index


def astar(graph, source, target):
    """Vertex and edge index lists from source to target, or None when disconnected.

    Edge lengths are arc lengths; the heuristic is the straight-line distance,
    which never exceeds the length of any edge chain.
    """
    vertices = graph.vertex_array
    goal = vertices[target]
    adjacency = graph.adjacency()
    counter = itertools.count()

    def heuristic(node):
        return float(np.hypot(*(vertices[node] - goal)))

    # The queue stores priority, node, cost to reach, insertion order and parent.
    queue = [(heuristic(source), source, 0.0, next(counter), None)]
    enqueued = {}
    explored = {}
    while queue:
        _, node, cost, _, parent = heapq.heappop(queue)
        if node == target:
            explored[node] = parent
            path, edges = [node], []
            while explored[node] is not None:
                node, edge_index = explored[node]
                path.append(node)
                edges.append(edge_index)
            path.reverse()
            edges.reverse()
            return path, edges, cost
        if node in explored:
            continue
        explored[node] = parent
        for edge_index in adjacency[node]:
            edge = graph.edges[edge_index]
            neighbor = edge.other(node)
            if neighbor in explored:
                continue
            ncost = cost + edge.length
            if neighbor in enqueued:
                qcost, h = enqueued[neighbor]
                if qcost <= ncost:
                    continue
            else:
                h = heuristic(neighbor)
            enqueued[neighbor] = ncost, h
            heapq.heappush(queue, (ncost + h, neighbor, ncost, next(counter), (node, edge_index)))
    return None


def shortest_path(graph, start, goal, feasible=None, k=5, direct=True):
    """Shortest arc-length path from start to goal through the roadmap.

    start and goal are linked to the graph by straight segments that must pass
    feasible; with direct set, the straight start-goal segment is offered too.
    """
    start = Position2.of(start).as_array()
    goal = Position2.of(goal).as_array()
    working = graph.copy()
    base = len(working.vertices)
    source = _attach(working, start, feasible, k, anchors=())
    target = _attach(working, goal, feasible, k, anchors=(source,) if source >= base else ())
    if source == target:
        return PathResult(True, [source], [], 0.0, working)
    if direct:
        shortcut = SegmentEdge(source, target, start, goal, kind="direct")
        if _feasible(feasible, shortcut):
            working.add_edge(shortcut)
    found = astar(working, source, target)
    if found is None:
        log.info("goal is disconnected from start after trimming")
        return PathResult(False, graph=working, reason="disconnected")
    vertices, edges, cost = found
    return PathResult(True, vertices, edges, cost, working)
