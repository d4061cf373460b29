import numpy as np
import pytest

from ..core import Region
from ..pd_uncertainty import KnownParamBelief, UnknownPrior
from .geometry import WeightedSite
from .graph import RoadmapGraph, SegmentEdge


@pytest.fixture
def region():
    return Region((0.0, 0.0), (1000.0, 1000.0))


@pytest.fixture
def field_region():
    return Region((0.0, 0.0), (2000.0, 2000.0))


@pytest.fixture(
    ids=["two equal", "three weighted", "four weighted"],
    params=[
        [((250, 500), 1.0), ((750, 500), 1.0)],
        [((200, 200), 1.0), ((800, 300), 1.5), ((500, 800), 0.7)],
        [((150, 150), 2.0), ((850, 200), 1.0), ((700, 850), 1.2), ((300, 600), 0.8)],
    ],
)
def sites(request):
    return [WeightedSite(p, w, site_id=k) for k, (p, w) in enumerate(request.param)]


@pytest.fixture
def priors(scenario):
    return UnknownPrior.from_config(scenario)


@pytest.fixture
def known(scenario):
    return KnownParamBelief.at((0.0, 0.0), scenario.rcs, 0.01, 10.0)


@pytest.fixture
def twin_estimates(estimate_factory):
    """Two identical radars either side of x = 1000 in the field region."""
    return [
        estimate_factory(x=700.0, y=1000.0, radar_id=0, position_std=10.0, erp_std=1e3),
        estimate_factory(x=1300.0, y=1000.0, radar_id=1, position_std=10.0, erp_std=1e3),
    ]


@pytest.fixture
def random_graph(region):
    """Graph on scattered vertices, each linked to its three nearest neighbours."""

    def _random_graph(seed, n=30, neighbours=3):
        rng = np.random.default_rng(seed)
        graph = RoadmapGraph(region)
        for point in rng.uniform(0.0, 1000.0, size=(n, 2)):
            graph.add_vertex(point)
        vertices = graph.vertex_array
        linked = set()
        for u in range(n):
            distances = np.hypot(*(vertices - vertices[u]).T)
            for v in np.argsort(distances)[1 : neighbours + 1]:
                key = (min(u, int(v)), max(u, int(v)))
                if key not in linked:
                    linked.add(key)
                    graph.add_edge(SegmentEdge(key[0], key[1], vertices[key[0]], vertices[key[1]]))
        return graph

    return _random_graph
