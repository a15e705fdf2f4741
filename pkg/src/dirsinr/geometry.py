"""Hexagonal tri-sector network layout and per-sector polar coordinates.

Sites sit on a hexagonal lattice centred on the origin.  The lattice is
oriented so that the six first-tier neighbours lie at bearings
30, 90, ..., 330 degrees; with the default 30 degree boresight offset each
sector therefore faces the midpoint of one edge of its site's hexagon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateGeometryError, InvalidParameterError

DropRegion = Literal["central_site_disk", "whole_network"]

DEFAULT_BORESIGHT_OFFSET_DEG = 30.0

# RNG stream labels; mixed into SeedSequence entropy so that UE positions and
# shadowing never share a stream.
STREAM_DROP = 0
STREAM_SHADOW = 1

# UEs are generated in fixed-size blocks, each from its own substream.  The
# block size is part of the reproducibility contract: changing it changes
# every result for a given seed.
BLOCK_SIZE = 4096


@dataclass(frozen=True)
class Point2D:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidParameterError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True)
class Sector:
    site_index: int
    sector_index: int
    position: Point2D
    boresight_deg: float


@dataclass(frozen=True)
class PolarOffset:
    r: float
    theta_deg: float


@dataclass(frozen=True)
class NetworkLayout:
    isd: float
    rings: int
    sites: tuple[Point2D, ...]
    sectors: tuple[Sector, ...]
    boresight_offset_deg: float = DEFAULT_BORESIGHT_OFFSET_DEG

    @property
    def site_xy(self) -> np.ndarray:
        """Site coordinates as an (n_sites, 2) array."""
        return np.array([(p.x, p.y) for p in self.sites], dtype=float)

    @property
    def sector_xy(self) -> np.ndarray:
        return np.array([(s.position.x, s.position.y) for s in self.sectors], dtype=float)

    @property
    def sector_boresight_deg(self) -> np.ndarray:
        return np.array([s.boresight_deg for s in self.sectors], dtype=float)

    @property
    def sector_site(self) -> np.ndarray:
        return np.array([s.site_index for s in self.sectors], dtype=int)

    @property
    def cell_radius(self) -> float:
        """Circumradius of one site hexagon, isd / sqrt(3)."""
        return self.isd / math.sqrt(3.0)


def wrap_deg(angle):
    """Map angles (scalar or array) to the interval (-180, 180]."""
    wrapped = 180.0 - np.mod(180.0 - np.asarray(angle, dtype=float), 360.0)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def _lattice_coords(rings: int) -> list[tuple[int, int]]:
    coords = []
    for q in range(-rings, rings + 1):
        for r in range(-rings, rings + 1):
            if abs(q) <= rings and abs(r) <= rings and abs(q + r) <= rings:
                coords.append((q, r))
    return coords


def build_layout(isd: float, rings: int,
                 boresight_offset_deg: float = DEFAULT_BORESIGHT_OFFSET_DEG) -> NetworkLayout:
    """Build a hexagonal network of ``1 + 3*rings*(rings+1)`` tri-sector sites.

    Sites are ordered by ring, then counter-clockwise by bearing, with the
    central site first.  Sector ``k`` of site ``s`` has ordinal ``3*s + k``
    and boresight ``offset + 120*k`` degrees.
    """
    if not (isd > 0 and math.isfinite(isd)):
        raise InvalidParameterError(f"isd must be positive, got {isd}")
    if rings < 0 or int(rings) != rings:
        raise InvalidParameterError(f"rings must be a non-negative integer, got {rings}")
    rings = int(rings)

    a1 = np.array([math.cos(math.radians(30.0)), math.sin(math.radians(30.0))]) * isd
    a2 = np.array([0.0, 1.0]) * isd

    entries = []
    for q, r in _lattice_coords(rings):
        ring = max(abs(q), abs(r), abs(q + r))
        xy = q * a1 + r * a2
        bearing = math.degrees(math.atan2(xy[1], xy[0])) % 360.0 if ring else 0.0
        entries.append((ring, round(bearing, 9), xy))
    entries.sort(key=lambda e: (e[0], e[1]))

    sites = tuple(Point2D(float(xy[0]), float(xy[1])) for _, _, xy in entries)
    sectors = []
    for s, site in enumerate(sites):
        for k in range(3):
            boresight = (boresight_offset_deg + 120.0 * k) % 360.0
            sectors.append(Sector(s, k, site, boresight))
    return NetworkLayout(isd=float(isd), rings=rings, sites=sites, sectors=tuple(sectors),
                         boresight_offset_deg=float(boresight_offset_deg))


def relative_polar(sector: Sector, p: Point2D) -> PolarOffset:
    """Distance and signed boresight offset of ``p`` as seen from ``sector``."""
    dx = p.x - sector.position.x
    dy = p.y - sector.position.y
    r = math.hypot(dx, dy)
    if r == 0.0:
        raise DegenerateGeometryError("point coincides with the sector position")
    bearing = math.degrees(math.atan2(dy, dx))
    return PolarOffset(r=r, theta_deg=wrap_deg(bearing - sector.boresight_deg))


def ue_bearing(ue: Point2D, target: Point2D) -> float:
    """Bearing of ``target`` from ``ue`` in the global frame, in [0, 360)."""
    dx = target.x - ue.x
    dy = target.y - ue.y
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometryError("ue and target coincide")
    bearing = math.degrees(math.atan2(dy, dx)) % 360.0
    # -tiny % 360 rounds to 360.0
    return 0.0 if bearing == 360.0 else bearing


def _uniform_disk(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    u = rng.random(n)
    v = rng.random(n)
    rho = radius * np.sqrt(u)
    ang = 2.0 * np.pi * v
    return np.column_stack([rho * np.cos(ang), rho * np.sin(ang)])


def _uniform_hexagons(rng: np.random.Generator, n: int, centres: np.ndarray,
                      radius: float) -> np.ndarray:
    # Pick a site, one of its six equilateral triangles, then a uniform
    # point in that triangle (reflection trick).
    site = rng.integers(0, len(centres), size=n)
    tri = rng.integers(0, 6, size=n)
    u = rng.random(n)
    v = rng.random(n)
    flip = u + v > 1.0
    u = np.where(flip, 1.0 - u, u)
    v = np.where(flip, 1.0 - v, v)
    a0 = np.radians(60.0 * tri)
    a1 = a0 + np.pi / 3.0
    x = radius * (u * np.cos(a0) + v * np.cos(a1))
    y = radius * (u * np.sin(a0) + v * np.sin(a1))
    return centres[site] + np.column_stack([x, y])


def block_rng(seed: int, block: int, stream: int) -> np.random.Generator:
    """Generator for one UE block; independent of how blocks are scheduled."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(block), int(stream)]))


def drop_block(layout: NetworkLayout, n: int, region: DropRegion, seed: int,
               block: int) -> np.ndarray:
    rng = block_rng(seed, block, STREAM_DROP)
    if region == "central_site_disk":
        return _uniform_disk(rng, n, layout.cell_radius)
    if region == "whole_network":
        return _uniform_hexagons(rng, n, layout.site_xy, layout.cell_radius)
    raise InvalidParameterError(f"unknown drop region {region!r}")


def drop_ues_array(layout: NetworkLayout, count: int, region: DropRegion = "central_site_disk",
                   seed: int = 0) -> np.ndarray:
    """Uniform UE positions as an (count, 2) array; see :func:`drop_ues`."""
    if count <= 0:
        raise InvalidParameterError(f"count must be positive, got {count}")
    parts = []
    for block, start in enumerate(range(0, count, BLOCK_SIZE)):
        n = min(BLOCK_SIZE, count - start)
        parts.append(drop_block(layout, n, region, seed, block))
    return np.concatenate(parts)


def drop_ues(layout: NetworkLayout, count: int, region: DropRegion = "central_site_disk",
             seed: int = 0) -> list[Point2D]:
    """Drop ``count`` UEs uniformly over ``region``.

    ``central_site_disk`` is the disk of radius ``isd/sqrt(3)`` around the
    origin site; ``whole_network`` is the union of all site hexagons.
    """
    xy = drop_ues_array(layout, count, region, seed)
    return [Point2D(float(x), float(y)) for x, y in xy]
