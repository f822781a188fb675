import math
import random

import numpy as np
import pytest

from shadecast.geo import BuildingFootprint, GeoPoint, LocalFrame, from_local


def rect_footprint(fid, x0, y0, x1, y1, height_m, frame):
    """Axis-aligned rectangle in local meters, converted to lon/lat."""
    corners = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    ring = tuple(from_local(x, y, frame) for x, y in corners)
    return BuildingFootprint(id=fid, ring=ring, height_m=height_m)


def rotated_rect_footprint(fid, cx, cy, w, h, angle_deg, height_m, frame):
    a = math.radians(angle_deg)
    ca, sa = math.cos(a), math.sin(a)
    ring = []
    for dx, dy in ((-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)):
        ring.append(from_local(cx + dx * ca - dy * sa, cy + dx * sa + dy * ca, frame))
    return BuildingFootprint(id=fid, ring=tuple(ring), height_m=height_m)


def random_scene(rng: random.Random, frame, n_buildings, extent_m=160.0):
    buildings = []
    for i in range(n_buildings):
        cx = rng.uniform(-extent_m / 2, extent_m / 2)
        cy = rng.uniform(-extent_m / 2, extent_m / 2)
        w = rng.uniform(8.0, 40.0)
        h = rng.uniform(8.0, 40.0)
        angle = rng.uniform(0.0, 90.0)
        height = rng.uniform(5.0, 30.0)
        buildings.append(
            rotated_rect_footprint(f"b{i}", cx, cy, w, h, angle, height, frame)
        )
    return buildings


@pytest.fixture
def local_frame():
    return LocalFrame.at(GeoPoint(lon=-111.93, lat=33.42))


def bounds_around(frame, half_extent_m):
    sw = from_local(-half_extent_m, -half_extent_m, frame)
    ne = from_local(half_extent_m, half_extent_m, frame)
    return (sw.lon, sw.lat, ne.lon, ne.lat)


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    union = np.count_nonzero(a | b)
    return 1.0 if union == 0 else np.count_nonzero(a & b) / union
