"""Hexagonal multi-site layout, RIS placement, wraparound and user dropping.

Sites sit on a hexagonal lattice whose nearest neighbours lie along the
sector boresights (30, 90, 150, ... degrees), so every sector boresight points
at the midpoint of a cell edge, ``ISD / 2`` away from the site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

SECTOR_BORESIGHTS = (30.0, 150.0, 270.0)
SECTOR_HALF_WIDTH = 60.0

# unit vectors towards the six nearest neighbour sites
_NEIGHBOUR_DIRS = np.array(
    [[math.cos(math.radians(30.0 + 60.0 * i)), math.sin(math.radians(30.0 + 60.0 * i))] for i in range(6)]
)
_SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class Position3D:
    x: float
    y: float
    z: float = 0.0

    def __post_init__(self):
        if self.z < 0:
            raise ValueError(f"height must be non-negative, got z={self.z}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class Sector:
    site_id: int
    sector_id: int
    bs_position: Position3D
    boresight_azimuth: float
    downtilt: float

    @property
    def index(self) -> int:
        return 3 * self.site_id + self.sector_id


@dataclass(frozen=True)
class RisPlacement:
    sector_ref: tuple[int, int]
    position: Position3D
    boresight_azimuth: float

    @property
    def height(self) -> float:
        return self.position.z


@dataclass(frozen=True)
class NetworkLayout:
    """Immutable site/sector/RIS description of the simulated cluster.

    ``site_xy`` and ``wrap_offsets`` are read-only arrays; ``wrap_offsets``
    always holds the zero vector first followed by the six cluster
    translations.
    """

    isd: float
    num_rings: int
    bs_height: float
    site_xy: np.ndarray
    sectors: tuple[Sector, ...]
    ris: tuple[RisPlacement, ...]
    wrap_offsets: np.ndarray

    @property
    def num_sites(self) -> int:
        return len(self.site_xy)

    @property
    def num_sectors(self) -> int:
        return len(self.sectors)

    @property
    def cell_radius(self) -> float:
        """Hexagon circumradius, the farthest any footprint point gets from its site."""
        return self.isd / _SQRT3

    def sector_bs_xyz(self) -> np.ndarray:
        return np.array([s.bs_position.as_array() for s in self.sectors])

    def ris_xyz(self) -> np.ndarray:
        return np.array([r.position.as_array() for r in self.ris])


@dataclass
class UserDrop:
    positions: np.ndarray  # (U, 3)
    drop_sector: np.ndarray  # (U,) sector whose footprint the user was dropped in
    per_sector_count: int
    serving_sector: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.positions)

    def position(self, i: int) -> Position3D:
        x, y, z = self.positions[i]
        return Position3D(float(x), float(y), float(z))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def _lattice_angle(q: int, r: int) -> float:
    x, y = q * _NEIGHBOUR_DIRS[0] + r * _NEIGHBOUR_DIRS[1]
    return math.atan2(y, x) % (2 * math.pi)


def hex_ring_coords(num_rings: int) -> list[tuple[int, int]]:
    """Lattice coordinates (q, r) of all sites within ``num_rings`` hops, centre first."""
    coords = [(0, 0)]
    for k in range(1, num_rings + 1):
        ring = [
            (q, r)
            for q in range(-k, k + 1)
            for r in range(-k, k + 1)
            if max(abs(q), abs(r), abs(q + r)) == k
        ]
        ring.sort(key=lambda c: _lattice_angle(*c))
        coords.extend(ring)
    return coords


def cluster_translations(isd: float, num_rings: int) -> np.ndarray:
    """Zero vector plus the six lattice translations that tile the plane with the cluster."""
    n = num_rings
    shifts = [np.zeros(2)]
    for i in range(6):
        shifts.append(isd * ((n + 1) * _NEIGHBOUR_DIRS[i] + n * _NEIGHBOUR_DIRS[(i + 1) % 6]))
    return np.array(shifts)


def build_hex_layout(isd: float, num_rings: int, bs_height: float = 25.0, downtilt: float = 12.0) -> NetworkLayout:
    if not isd > 0:
        raise ValueError(f"isd must be positive, got {isd}")
    if num_rings < 0:
        raise ValueError(f"num_rings must be >= 0, got {num_rings}")
    a1, a2 = _NEIGHBOUR_DIRS[0], _NEIGHBOUR_DIRS[1]
    site_xy = np.array([isd * (q * a1 + r * a2) for q, r in hex_ring_coords(num_rings)])
    sectors = []
    for site_id, (x, y) in enumerate(site_xy):
        for sector_id, b in enumerate(SECTOR_BORESIGHTS):
            sectors.append(Sector(site_id, sector_id, Position3D(float(x), float(y), bs_height), b, downtilt))
    return NetworkLayout(
        isd=float(isd),
        num_rings=int(num_rings),
        bs_height=float(bs_height),
        site_xy=_readonly(site_xy),
        sectors=tuple(sectors),
        ris=(),
        wrap_offsets=_readonly(cluster_translations(isd, num_rings)),
    )


def place_ris(layout: NetworkLayout, ris_height: float = 10.0) -> NetworkLayout:
    """One RIS per sector, ``ISD / 2`` out along the boresight and facing back at the BS."""
    half = layout.isd / 2.0
    ris = []
    for s in layout.sectors:
        b = math.radians(s.boresight_azimuth)
        pos = Position3D(s.bs_position.x + half * math.cos(b), s.bs_position.y + half * math.sin(b), ris_height)
        ris.append(RisPlacement((s.site_id, s.sector_id), pos, (s.boresight_azimuth + 180.0) % 360.0))
    return replace(layout, ris=tuple(ris))


def nearest_image_offsets(layout: NetworkLayout, src_xy, dst_xy) -> np.ndarray:
    """Wraparound offset to add to each source so it is nearest each destination.

    ``src_xy`` is (K, 2), ``dst_xy`` is (L, 2); returns (K, L, 2). Ties go to the
    lowest-index image (the zero offset first).
    """
    src = np.asarray(src_xy, dtype=float).reshape(-1, 2)
    dst = np.asarray(dst_xy, dtype=float).reshape(-1, 2)
    cand = src[:, None, None, :] + layout.wrap_offsets[None, None, :, :]  # (K, 1, 7, 2)
    d2 = np.sum((cand - dst[None, :, None, :]) ** 2, axis=-1)  # (K, L, 7)
    k = np.argmin(d2, axis=-1)
    return layout.wrap_offsets[k]


def wrap_distance(layout: NetworkLayout, a: Position3D, b: Position3D) -> tuple[float, float, np.ndarray]:
    """Minimum distance from ``a`` to the wraparound images of ``b``.

    Returns ``(distance_2d, distance_3d, offset_used)`` where ``offset_used``
    is the translation applied to ``b``.
    """
    pa, pb = a.as_array(), b.as_array()
    off = nearest_image_offsets(layout, pb[None, :2], pa[None, :2])[0, 0]
    d2d = float(np.hypot(*(pb[:2] + off - pa[:2])))
    d3d = math.hypot(d2d, pb[2] - pa[2])
    return d2d, d3d, off.copy()


def _in_hexagon(rel_xy: np.ndarray, apothem: float) -> np.ndarray:
    proj = rel_xy @ _NEIGHBOUR_DIRS.T
    return np.all(proj <= apothem * (1 + 1e-12), axis=-1)


def _angle_diff_deg(az: np.ndarray, ref: float) -> np.ndarray:
    return (az - ref + 180.0) % 360.0 - 180.0


def in_sector_footprint(layout: NetworkLayout, sector: Sector, xy) -> np.ndarray:
    """True where points lie in the sector's third of its site hexagon."""
    rel = np.atleast_2d(np.asarray(xy, dtype=float)) - np.array([sector.bs_position.x, sector.bs_position.y])
    az = np.degrees(np.arctan2(rel[:, 1], rel[:, 0]))
    inside = _in_hexagon(rel, layout.isd / 2.0)
    return inside & (np.abs(_angle_diff_deg(az, sector.boresight_azimuth)) <= SECTOR_HALF_WIDTH)


def drop_users(
    layout: NetworkLayout,
    per_sector: int,
    min_bs_dist: float,
    rng: np.random.Generator,
    ue_height: float = 1.5,
) -> UserDrop:
    """Uniform user drop over each sector footprint with a minimum BS distance.

    Candidates are drawn in ISD-normalised coordinates and scaled afterwards,
    so scaling ISD and ``min_bs_dist`` together scales the drop exactly.
    """
    if per_sector < 1:
        raise ValueError(f"per_sector must be >= 1, got {per_sector}")
    if min_bs_dist >= layout.cell_radius:
        raise ValueError(f"min_bs_dist={min_bs_dist} is not below the footprint radius {layout.cell_radius:.3f}")
    rad = 1.0 / _SQRT3
    rmin = min_bs_dist / layout.isd
    positions, owner = [], []
    for s in layout.sectors:
        b = s.boresight_azimuth
        got = []
        while len(got) < per_sector:
            cand = rng.uniform((-rad, -0.5), (rad, 0.5), size=(8 * per_sector, 2))
            az = np.degrees(np.arctan2(cand[:, 1], cand[:, 0]))
            ok = (
                _in_hexagon(cand, 0.5)
                & (np.abs(_angle_diff_deg(az, b)) <= SECTOR_HALF_WIDTH)
                & (np.hypot(cand[:, 0], cand[:, 1]) >= rmin)
            )
            got.extend(cand[ok][: per_sector - len(got)])
        xy = np.array([s.bs_position.x, s.bs_position.y]) + layout.isd * np.array(got)
        positions.append(np.column_stack([xy, np.full(per_sector, ue_height)]))
        owner.append(np.full(per_sector, s.index))
    return UserDrop(np.vstack(positions), np.concatenate(owner), per_sector)


def sector_boundary_points(layout: NetworkLayout, sector: Sector, resolution_deg: float = 1.0) -> np.ndarray:
    """Sector boundary sampled by casting rays from the site every ``resolution_deg``.

    Includes the site itself; the sector is convex, so these points bound the
    farthest-point search.
    """
    b = sector.boresight_azimuth
    n = int(round(2 * SECTOR_HALF_WIDTH / resolution_deg))
    ang = b - SECTOR_HALF_WIDTH + resolution_deg * np.arange(n + 1)
    # distance to the hexagon edge along each ray: apothem / cos(offset to nearest edge normal)
    off = ang % 60.0 - 30.0
    dist = (layout.isd / 2.0) / np.cos(np.radians(off))
    site = np.array([sector.bs_position.x, sector.bs_position.y])
    pts = site + dist[:, None] * np.column_stack([np.cos(np.radians(ang)), np.sin(np.radians(ang))])
    return np.vstack([site, pts])


def placement_coverage_scan(
    layout: NetworkLayout, arc_offsets, sector_index: int = 0
) -> list[tuple[float, float]]:
    """Worst-case RIS-to-user distance for RIS positions along the ``ISD / 2`` arc.

    Each candidate sits at angular offset ``delta`` (degrees) from the sector
    boresight; the result pairs ``delta`` with the largest distance from that
    candidate to any sampled point of the sector.
    """
    sector = layout.sectors[sector_index]
    pts = sector_boundary_points(layout, sector)
    site = np.array([sector.bs_position.x, sector.bs_position.y])
    out = []
    for delta in arc_offsets:
        if abs(delta) > SECTOR_HALF_WIDTH:
            raise ValueError(f"arc offset {delta} outside the sector span")
        a = math.radians(sector.boresight_azimuth + delta)
        ris = site + layout.isd / 2.0 * np.array([math.cos(a), math.sin(a)])
        out.append((float(delta), float(np.max(np.hypot(*(pts - ris).T)))))
    return out
