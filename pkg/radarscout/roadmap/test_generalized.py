import numpy as np
import pytest

from . import generalized
from .generalized import build_generalized_diagram


def test_radar_margins_shape_and_order(twin_estimates, priors, known):
    points = np.array([[650.0, 1000.0], [1350.0, 1000.0]])
    z = generalized.radar_margins(points, twin_estimates, priors, known, 0.15)
    assert z.shape == (2, 2)
    assert z[0, 0] < z[0, 1]
    assert z[1, 1] < z[1, 0]


def test_margins_on_a_radar_are_finite(twin_estimates, priors, known):
    z = generalized.radar_margins([[700.0, 1000.0]], twin_estimates, priors, known, 0.15)
    assert np.all(np.isfinite(z))
    assert generalized.label_points([[700.0, 1000.0]], twin_estimates, priors, known, 0.15).tolist() == [0]


def test_labels_match_nearest_radar_for_twins(twin_estimates, priors, known, field_region):
    graph = build_generalized_diagram(twin_estimates, priors, known, field_region, grid_n=41)
    raster = graph.raster
    assert raster.labels.shape == (41, 41)
    assert raster.margins.shape == (41, 41, 2)
    grid_x, _ = np.meshgrid(raster.xs, raster.ys)
    nearest = np.where(np.abs(grid_x - 700.0) <= np.abs(grid_x - 1300.0), 0, 1)
    off_bisector = grid_x != 1000.0
    assert np.mean(raster.labels[off_bisector] == nearest[off_bisector]) > 0.98
    assert set(raster.as_dict()) == {"xs", "ys", "labels"}


def test_twin_boundary_is_the_bisector(twin_estimates, priors, known, field_region):
    graph = build_generalized_diagram(twin_estimates, priors, known, field_region, grid_n=41)
    interior = [e for e in graph.edges if e.kind != "boundary"]
    assert interior
    step = graph.raster.xs[1] - graph.raster.xs[0]
    for edge in interior:
        assert edge.sites == (0, 1)
        assert np.all(np.abs(edge.sample(20)[:, 0] - 1000.0) <= step)
    assert sum(e.length for e in interior) == pytest.approx(2000.0, rel=0.05)


def test_three_radars_have_three_labels(estimate_factory, priors, known, field_region):
    estimates = [
        estimate_factory(x=500.0, y=500.0, radar_id=4),
        estimate_factory(x=1500.0, y=500.0, radar_id=7),
        estimate_factory(x=1000.0, y=1600.0, radar_id=9),
    ]
    graph = build_generalized_diagram(estimates, priors, known, field_region, grid_n=48)
    assert set(np.unique(graph.raster.labels)) == {0, 1, 2}
    pairs = {e.sites for e in graph.edges if e.kind != "boundary"}
    assert pairs <= {(4, 7), (4, 9), (7, 9)}
    assert len(pairs) >= 2
    assert all(graph.on_boundary(graph.vertices[v]) for e in graph.edges if e.kind == "boundary" for v in (e.u, e.v))


def test_rejects_bad_input(twin_estimates, priors, known, field_region):
    with pytest.raises(ValueError):
        build_generalized_diagram([], priors, known, field_region)
    with pytest.raises(ValueError):
        build_generalized_diagram(twin_estimates, priors, known, field_region, grid_n=16)
