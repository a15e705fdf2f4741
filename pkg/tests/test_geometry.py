import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from dirsinr.errors import DegenerateGeometryError, InvalidParameterError
from dirsinr.geometry import (Point2D, Sector, build_layout, drop_ues, drop_ues_array,
                              relative_polar, ue_bearing, wrap_deg)


@pytest.mark.parametrize("isd, rings, n_sites", [(2000, 0, 1), (2000, 1, 7), (5000, 4, 61),
                                                 (1000, 6, 127)])
def test_site_and_sector_counts(isd, rings, n_sites):
    layout = build_layout(isd, rings)
    assert len(layout.sites) == n_sites == 1 + 3 * rings * (rings + 1)
    assert len(layout.sectors) == 3 * n_sites


@pytest.mark.parametrize("isd", [0, -10.0, float("nan")])
def test_build_layout_rejects_bad_isd(isd):
    with pytest.raises(InvalidParameterError):
        build_layout(isd, 1)


def test_build_layout_rejects_negative_rings():
    with pytest.raises(InvalidParameterError):
        build_layout(1000, -1)


def test_min_site_distance_is_isd():
    layout = build_layout(2000, 4)
    xy = layout.site_xy
    d = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
    d[np.diag_indices_from(d)] = np.inf
    assert_allclose(d.min(), 2000, rtol=1e-6)


def test_neighbour_counts_and_extent():
    rings = 3
    layout = build_layout(1000, rings)
    xy = layout.site_xy
    d = np.hypot(*(xy[:, None, :] - xy[None, :, :]).transpose(2, 0, 1))
    neighbours = np.sum(np.isclose(d, 1000, rtol=1e-9), axis=1)
    radius = np.hypot(xy[:, 0], xy[:, 1])
    inner = radius < 1000 * rings * math.sqrt(3) / 2 - 1e-6
    assert np.all(neighbours[inner] == 6)
    assert np.all(neighbours >= 3)
    assert_allclose(radius.max(), 1000 * rings)


def test_sector_triples_are_120_apart():
    layout = build_layout(2000, 2)
    for s in range(len(layout.sites)):
        trio = layout.sectors[3 * s:3 * s + 3]
        assert len({sec.position for sec in trio}) == 1
        for a, b in [(0, 1), (1, 2), (0, 2)]:
            diff = (trio[b].boresight_deg - trio[a].boresight_deg) % 360
            assert diff in (120.0, 240.0)
    assert [s.boresight_deg for s in layout.sectors[:3]] == [30.0, 150.0, 270.0]


def test_boresight_faces_neighbour_site():
    # With the default offset each sector points at an edge midpoint, i.e. a
    # first-tier neighbour.
    layout = build_layout(1000, 1)
    bearings = {round(math.degrees(math.atan2(p.y, p.x)) % 360, 6) for p in layout.sites[1:]}
    for sec in layout.sectors[:3]:
        assert round(sec.boresight_deg, 6) in bearings


@pytest.mark.parametrize("boresight, p, expected", [
    (0.0, Point2D(1000, 0), (1000, 0.0)),
    (0.0, Point2D(0, 1000), (1000, 90.0)),
    (90.0, Point2D(0, -500), (500, 180.0)),
])
def test_relative_polar_examples(boresight, p, expected):
    sec = Sector(0, 0, Point2D(0, 0), boresight)
    polar = relative_polar(sec, p)
    assert polar.r == pytest.approx(expected[0])
    assert polar.theta_deg == pytest.approx(expected[1], abs=1e-12)


def test_relative_polar_coincident():
    with pytest.raises(DegenerateGeometryError):
        relative_polar(Sector(0, 0, Point2D(5, 5), 0.0), Point2D(5, 5))


@settings(max_examples=200, deadline=None)
@given(st.floats(-5000, 5000), st.floats(-5000, 5000), st.floats(0, 360),
       st.floats(-720, 720))
def test_relative_polar_rotation_invariant(x, y, boresight, alpha):
    if math.hypot(x, y) < 1e-3:
        return
    site = Point2D(100.0, -200.0)
    a = math.radians(alpha)
    xr = x * math.cos(a) - y * math.sin(a)
    yr = x * math.sin(a) + y * math.cos(a)
    p0 = relative_polar(Sector(0, 0, site, boresight), Point2D(site.x + x, site.y + y))
    p1 = relative_polar(Sector(0, 0, site, (boresight + alpha) % 360),
                        Point2D(site.x + xr, site.y + yr))
    assert p1.r == pytest.approx(p0.r, rel=1e-9)
    d = wrap_deg(p1.theta_deg - p0.theta_deg)
    assert abs(d) < 1e-9 or abs(abs(d) - 360) < 1e-9


@pytest.mark.parametrize("ue, target, expected", [
    (Point2D(0, 0), Point2D(1, 0), 0.0),
    (Point2D(0, 0), Point2D(0, 1), 90.0),
    (Point2D(1, 1), Point2D(0, 0), 225.0),
])
def test_ue_bearing(ue, target, expected):
    assert ue_bearing(ue, target) == pytest.approx(expected)


def test_ue_bearing_coincident():
    with pytest.raises(DegenerateGeometryError):
        ue_bearing(Point2D(1, 2), Point2D(1, 2))


def test_ue_bearing_range():
    assert ue_bearing(Point2D(0, 0), Point2D(1, -1e-300)) < 360.0


@given(st.floats(-1e6, 1e6))
def test_wrap_deg_interval(a):
    w = wrap_deg(a)
    assert -180.0 < w <= 180.0


def test_drop_ues_deterministic():
    layout = build_layout(2000, 4)
    assert drop_ues(layout, 1000, seed=42) == drop_ues(layout, 1000, seed=42)
    assert drop_ues(layout, 1000, seed=42) != drop_ues(layout, 1000, seed=43)


def test_drop_ues_within_central_disk():
    layout = build_layout(2000, 4)
    xy = drop_ues_array(layout, 20000, "central_site_disk", seed=1)
    assert np.hypot(xy[:, 0], xy[:, 1]).max() <= 2000 / math.sqrt(3)
    assert 2000 / math.sqrt(3) == pytest.approx(1154.7, abs=0.05)


def test_drop_ues_disk_moments():
    # Uniform disk of radius R: E[x]=E[y]=0, Var[x]=R^2/4, E[rho^2]=R^2/2.
    layout = build_layout(2000, 1)
    n = 100_000
    R = layout.cell_radius
    xy = drop_ues_array(layout, n, "central_site_disk", seed=3)
    se = (R / 2) / math.sqrt(n)
    assert abs(xy[:, 0].mean()) < 3 * se
    assert abs(xy[:, 1].mean()) < 3 * se
    rho2 = (xy ** 2).sum(axis=1)
    # Var[rho^2] = R^4/12 for a uniform disk.
    assert abs(rho2.mean() - R ** 2 / 2) < 3 * R ** 2 / math.sqrt(12 * n)


def test_drop_ues_whole_network_moments():
    layout = build_layout(1000, 2)
    n = 100_000
    xy = drop_ues_array(layout, n, "whole_network", seed=5)
    # Each site hexagon is equally likely; nearest site must be within the
    # hexagon circumradius.
    d = np.hypot(*(xy[:, None, :] - layout.site_xy[None]).transpose(2, 0, 1)).min(axis=1)
    assert d.max() <= layout.cell_radius + 1e-9
    spread = np.sqrt((xy ** 2).sum(axis=1).mean() / 2)
    assert abs(xy[:, 0].mean()) < 3 * spread / math.sqrt(n)
    assert abs(xy[:, 1].mean()) < 3 * spread / math.sqrt(n)


def test_drop_ues_rejects_nonpositive_count():
    with pytest.raises(InvalidParameterError):
        drop_ues(build_layout(1000, 0), 0)
