import math

import numpy as np
import pytest

from rissim.geometry import (
    Position3D,
    build_hex_layout,
    drop_users,
    in_sector_footprint,
    nearest_image_offsets,
    place_ris,
    placement_coverage_scan,
    wrap_distance,
)


@pytest.fixture(scope="module")
def layout():
    return place_ris(build_hex_layout(500.0, 1))


@pytest.mark.parametrize("rings,sites", [(0, 1), (1, 7), (2, 19)])
def test_site_and_sector_counts(rings, sites):
    lay = place_ris(build_hex_layout(500.0, rings))
    assert lay.num_sites == sites
    assert lay.num_sectors == 3 * sites
    assert len(lay.ris) == 3 * sites


def test_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_hex_layout(0.0, 1)
    with pytest.raises(ValueError):
        build_hex_layout(500.0, -1)
    with pytest.raises(ValueError):
        Position3D(0, 0, -1)


def test_nearest_neighbours_at_isd(layout):
    d = np.hypot(*layout.site_xy[1:].T)
    np.testing.assert_allclose(d, 500.0)


def test_boresights(layout):
    assert {s.boresight_azimuth for s in layout.sectors} == {30.0, 150.0, 270.0}


def test_ris_placement(layout):
    ris = {r.sector_ref: r for r in layout.ris}
    np.testing.assert_allclose([ris[(0, 0)].position.x, ris[(0, 0)].position.y], [216.50635094610965, 125.0])
    np.testing.assert_allclose([ris[(0, 2)].position.x, ris[(0, 2)].position.y], [0.0, -250.0], atol=1e-9)
    for s, r in zip(layout.sectors, layout.ris):
        d = math.hypot(r.position.x - s.bs_position.x, r.position.y - s.bs_position.y)
        assert abs(d - 250.0) < 1e-9
        assert (r.boresight_azimuth - s.boresight_azimuth) % 360.0 == pytest.approx(180.0)


def test_wrap_offsets_shape(layout):
    assert layout.wrap_offsets.shape == (7, 2)
    assert np.all(layout.wrap_offsets[0] == 0)
    assert not layout.wrap_offsets.flags.writeable


def test_wrap_distance_identity(layout):
    a = Position3D(10.0, 20.0, 1.5)
    b = Position3D(10.0, 20.0, 25.0)
    d2, d3, off = wrap_distance(layout, a, b)
    assert d2 == 0.0 and d3 == pytest.approx(23.5)
    assert np.all(off == 0)


def test_wrap_distance_shorter_across_cluster(layout):
    # two sites on opposite sides of the cluster are close through the wraparound
    a = Position3D(*layout.site_xy[1], 25.0)
    b = Position3D(*layout.site_xy[4], 25.0)
    direct = math.hypot(a.x - b.x, a.y - b.y)
    d2, _, off = wrap_distance(layout, a, b)
    assert d2 < direct
    assert np.any(off != 0)


def test_wrap_distance_symmetric(layout):
    rng = np.random.default_rng(3)
    for _ in range(50):
        p, q = rng.uniform(-900, 900, (2, 2))
        d_ab = wrap_distance(layout, Position3D(*p), Position3D(*q))[0]
        d_ba = wrap_distance(layout, Position3D(*q), Position3D(*p))[0]
        assert d_ab == pytest.approx(d_ba, abs=1e-9)
        assert d_ab <= math.dist(p, q) + 1e-9


def test_wrap_inside_own_cell_uses_zero_offset(layout):
    off = nearest_image_offsets(layout, layout.site_xy[:1], [[100.0, 50.0]])
    assert np.all(off == 0)


def test_drop_users(layout):
    drop = drop_users(layout, 10, 35.0, np.random.default_rng(1))
    assert len(drop) == 210
    assert np.all(drop.positions[:, 2] == 1.5)
    for s in layout.sectors:
        mine = drop.positions[drop.drop_sector == s.index]
        assert len(mine) == 10
        assert np.all(in_sector_footprint(layout, s, mine[:, :2]))
        d = np.hypot(mine[:, 0] - s.bs_position.x, mine[:, 1] - s.bs_position.y)
        assert np.all(d >= 35.0)


def test_drop_users_deterministic(layout):
    a = drop_users(layout, 4, 35.0, np.random.default_rng(9))
    b = drop_users(layout, 4, 35.0, np.random.default_rng(9))
    np.testing.assert_array_equal(a.positions, b.positions)


def test_drop_users_scales_with_isd():
    small = build_hex_layout(500.0, 1)
    big = build_hex_layout(1000.0, 1)
    a = drop_users(small, 3, 35.0, np.random.default_rng(2))
    b = drop_users(big, 3, 70.0, np.random.default_rng(2))
    np.testing.assert_allclose(b.positions[:, :2], 2 * a.positions[:, :2], rtol=1e-12, atol=1e-9)


def test_drop_users_rejects_impossible_radius(layout):
    with pytest.raises(ValueError):
        drop_users(layout, 1, 300.0, np.random.default_rng(0))


def test_placement_scan_minimum_on_boresight(layout):
    scan = placement_coverage_scan(layout, range(-40, 41, 10))
    offsets, dist = zip(*scan)
    assert offsets[int(np.argmin(dist))] == 0
    assert dist[offsets.index(0)] == pytest.approx(250.0, rel=1e-9)
    assert dist[offsets.index(20)] > 250.0
