import math

import numpy as np
import pytest

from . import geometry
from .geometry import WeightedSite
from .weighted import build_weighted_diagram


def test_edges_follow_weighted_bisectors(sites, region):
    graph = build_weighted_diagram(sites, region)
    positions = np.array([list(s.position) for s in sites])
    weights = np.array([s.weight for s in sites])
    ids = [s.site_id for s in sites]
    interior = [e for e in graph.edges if e.kind != "boundary"]
    assert interior
    for edge in interior:
        i, j = (ids.index(k) for k in edge.sites)
        points = edge.sample(10)
        d = geometry.weighted_distances(points, positions, weights)
        assert d[:, i] == pytest.approx(d[:, j], rel=1e-6)
        assert np.all(d[:, i] <= d.min(axis=1) * (1 + 1e-6))
        assert np.all(region.contains(points, tol=1e-6))


def test_two_equal_sites_split_by_a_line(region):
    graph = build_weighted_diagram([WeightedSite((250, 500), 1.0, 0), WeightedSite((750, 500), 1.0, 1)], region)
    interior = [e for e in graph.edges if e.kind != "boundary"]
    assert len(interior) == 1
    assert interior[0].kind == "segment"
    assert interior[0].length == pytest.approx(1000.0)
    assert sorted(interior[0].point_at(np.array([0.0, 1.0]))[:, 1].tolist()) == pytest.approx([0.0, 1000.0])
    assert len([e for e in graph.edges if e.kind == "boundary"]) == 6


def test_enclosed_circle_becomes_two_arcs(region):
    graph = build_weighted_diagram([WeightedSite((400, 500), 1.0, 0), WeightedSite((600, 500), 2.0, 1)], region)
    arcs = [e for e in graph.edges if e.kind == "arc"]
    assert len(arcs) == 2
    assert all(a.sweep == pytest.approx(math.pi) for a in arcs)
    assert sum(a.length for a in arcs) == pytest.approx(2 * math.pi * 400.0 / 3.0)
    assert len(graph.edges) == 6


def test_single_site_is_only_the_boundary(region):
    graph = build_weighted_diagram([WeightedSite((500, 500), 1.0)], region)
    assert {e.kind for e in graph.edges} == {"boundary"}


def test_rejects_bad_input(region):
    with pytest.raises(ValueError):
        build_weighted_diagram([], region)
    with pytest.raises(ValueError):
        build_weighted_diagram([WeightedSite((5000, 500), 1.0)], region)
