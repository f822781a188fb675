"""Analytic shadow casting of extruded footprints and snapshot rasterization.

A building is a flat-roofed prism; under parallel sunlight its ground
shadow is the union of the footprint with one quad per footprint edge,
each edge swept along the shadow offset vector. Rasterization is
pixel-center even-odd scanline fill, no anti-aliasing, fully deterministic.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, asdict

import numpy as np
from PIL import Image
from scipy import ndimage
from shapely.geometry import Polygon as _ShapelyPolygon
from shapely.ops import unary_union

from shadecast.geo import BuildingFootprint, GeoPoint, LocalFrame, TileBBox, to_local
from shadecast.solar import SunPosition

KIND_SHADED = "shaded_snapshot"
KIND_SKELETON = "skeleton"
KIND_GROUND_TRUTH = "ground_truth"
KIND_EDGE = "edge"
RASTER_KINDS = (KIND_SHADED, KIND_SKELETON, KIND_GROUND_TRUTH, KIND_EDGE)


class NightTimeError(ValueError):
    """Sun at or below the horizon; no shadow geometry exists."""

    def __init__(self, elevation_deg: float):
        super().__init__(f"sun elevation {elevation_deg:.2f} deg is not above horizon")
        self.elevation_deg = elevation_deg


@dataclass(frozen=True)
class SimConfig:
    raster_px: int = 1024
    alpha: int = 10           # noise threshold for ground-truth extraction
    shade_gray: int = 90
    building_gray: int = 200
    side_gray: int = 140

    def __post_init__(self):
        if not (0 < self.alpha < self.shade_gray < self.side_gray < self.building_gray <= 255):
            raise ValueError(
                "gray levels must satisfy 0 < alpha < shade < side < building <= 255"
            )
        if self.raster_px < 8:
            raise ValueError("raster_px too small")

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:12]


@dataclass
class ShadeRaster:
    pixels: np.ndarray  # (height, width) uint8, row 0 = north edge
    bounds: tuple       # (min_lon, min_lat, max_lon, max_lat)
    kind: str

    def __post_init__(self):
        if self.kind not in RASTER_KINDS:
            raise ValueError(f"unknown raster kind {self.kind!r}")
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 2:
            raise ValueError("pixels must be a 2-D array")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def pixel_at(self, point: GeoPoint):
        """Value at a geographic point, or None if outside the bounds."""
        min_lon, min_lat, max_lon, max_lat = self.bounds
        if not (min_lon <= point.lon <= max_lon and min_lat <= point.lat <= max_lat):
            return None
        fx = (point.lon - min_lon) / (max_lon - min_lon) * self.width
        fy = (max_lat - point.lat) / (max_lat - min_lat) * self.height
        col = min(int(fx), self.width - 1)
        row = min(int(fy), self.height - 1)
        return int(self.pixels[row, col])


def shadow_offset_m(height_m: float, sun: SunPosition):
    """Ground displacement (east, north) of the roof edge shadow, meters."""
    if sun.elevation_deg <= 0.0:
        raise NightTimeError(sun.elevation_deg)
    length = height_m / math.tan(math.radians(sun.elevation_deg))
    az = math.radians(sun.azimuth_deg)
    return (-length * math.sin(az), -length * math.cos(az))


def _footprint_local(b: BuildingFootprint, frame: LocalFrame):
    return [to_local(p, frame) for p in b.ring]


def shadow_quads(b: BuildingFootprint, sun: SunPosition, frame: LocalFrame):
    """Footprint polygon plus one swept quad per edge, in local meters.

    The union of the returned polygons is the full shadow region
    (footprint included).
    """
    dx, dy = shadow_offset_m(b.height_m, sun)
    ring = _footprint_local(b, frame)
    polys = [ring]
    n = len(ring)
    for i in range(n):
        (x0, y0), (x1, y1) = ring[i], ring[(i + 1) % n]
        polys.append([(x0, y0), (x1, y1), (x1 + dx, y1 + dy), (x0 + dx, y0 + dy)])
    return polys


def shadow_polygon(b: BuildingFootprint, sun: SunPosition, frame: LocalFrame):
    """Merged shadow region as a list of simple polygons (local meters)."""
    parts = [_ShapelyPolygon(p) for p in shadow_quads(b, sun, frame)]
    merged = unary_union([p.buffer(0) for p in parts])
    geoms = getattr(merged, "geoms", [merged])
    return [list(g.exterior.coords)[:-1] for g in geoms]


def fill_polygon_mask(poly_px, width: int, height: int) -> np.ndarray:
    """Even-odd scanline fill of a polygon given in pixel coordinates.

    A pixel is inside iff its center (col+0.5, row+0.5) is inside under the
    half-open edge convention, which makes ties deterministic.
    """
    inside = np.zeros((height, width), dtype=bool)
    if len(poly_px) < 3:
        return inside
    xs = np.array([p[0] for p in poly_px])
    ys = np.array([p[1] for p in poly_px])
    yc = np.arange(height) + 0.5
    diff = np.zeros((height, width + 1), dtype=np.int32)
    n = len(xs)
    for i in range(n):
        x0, y0 = xs[i], ys[i]
        x1, y1 = xs[(i + 1) % n], ys[(i + 1) % n]
        if y0 == y1:
            continue
        crosses = (y0 <= yc) != (y1 <= yc)
        if not crosses.any():
            continue
        t = (yc[crosses] - y0) / (y1 - y0)
        x_int = x0 + t * (x1 - x0)
        # first pixel center >= the crossing abscissa
        ic = np.ceil(x_int - 0.5).astype(np.int64)
        ic = np.clip(ic, 0, width)
        np.add.at(diff, (np.nonzero(crosses)[0], ic), 1)
    counts = np.cumsum(diff[:, :width], axis=1)
    return (counts % 2).astype(bool)


class _RasterGrid:
    """Affine mapping between local-frame meters and pixel coordinates."""

    def __init__(self, bounds, frame: LocalFrame, width: int, height: int):
        self.bounds = bounds
        self.frame = frame
        self.width = width
        self.height = height
        min_lon, min_lat, max_lon, max_lat = bounds
        x0, y0 = to_local(GeoPoint(min_lon, min_lat), frame)
        x1, y1 = to_local(GeoPoint(max_lon, max_lat), frame)
        self.x_min, self.x_max = x0, x1
        self.y_min, self.y_max = y0, y1

    def to_px(self, xy):
        x, y = xy
        px = (x - self.x_min) / (self.x_max - self.x_min) * self.width
        py = (self.y_max - y) / (self.y_max - self.y_min) * self.height
        return (px, py)

    def poly_to_px(self, poly):
        return [self.to_px(p) for p in poly]


def _bounds_of(tile_or_bounds):
    if isinstance(tile_or_bounds, TileBBox):
        return tile_or_bounds.geo_bounds
    return tuple(tile_or_bounds)


def _grid_for(tile_or_bounds, cfg: SimConfig) -> _RasterGrid:
    bounds = _bounds_of(tile_or_bounds)
    min_lon, min_lat, max_lon, max_lat = bounds
    center = GeoPoint((min_lon + max_lon) / 2.0, (min_lat + max_lat) / 2.0)
    frame = LocalFrame.at(center)
    return _RasterGrid(bounds, frame, cfg.raster_px, cfg.raster_px)


def render(scene, sun, tile_or_bounds, cfg: SimConfig = SimConfig(), kind=KIND_SKELETON):
    """Rasterize a scene as a skeleton or shaded snapshot.

    Skeleton: footprints at building_gray on background 0. Shaded adds
    shadow quads at shade_gray and the near-boundary band of those quads
    at side_gray; overlaps resolve by max gray value.
    """
    if kind not in (KIND_SHADED, KIND_SKELETON):
        raise ValueError(f"render kind must be shaded or skeleton, got {kind!r}")
    if kind == KIND_SHADED and sun is None:
        raise ValueError("shaded snapshot requires a sun position")
    grid = _grid_for(tile_or_bounds, cfg)
    h = w = cfg.raster_px
    out = np.zeros((h, w), dtype=np.uint8)

    fp_mask = np.zeros((h, w), dtype=bool)
    for b in scene:
        ring = _footprint_local(b, grid.frame)
        fp_mask |= fill_polygon_mask(grid.poly_to_px(ring), w, h)

    if kind == KIND_SHADED:
        if sun.elevation_deg <= 0.0:
            raise NightTimeError(sun.elevation_deg)
        quad_mask = np.zeros((h, w), dtype=bool)
        for b in scene:
            for quad in shadow_quads(b, sun, grid.frame)[1:]:
                quad_mask |= fill_polygon_mask(grid.poly_to_px(quad), w, h)
        struct = np.ones((3, 3), dtype=bool)
        near_boundary = ndimage.binary_dilation(fp_mask, struct) & ~ndimage.binary_erosion(
            fp_mask, struct, border_value=0
        )
        out = np.maximum(out, np.where(quad_mask, cfg.shade_gray, 0).astype(np.uint8))
        side_mask = quad_mask & near_boundary
        out = np.maximum(out, np.where(side_mask, cfg.side_gray, 0).astype(np.uint8))

    out = np.maximum(out, np.where(fp_mask, cfg.building_gray, 0).astype(np.uint8))
    return ShadeRaster(pixels=out, bounds=grid.bounds, kind=kind)


def extract_ground_truth(
    x_shade: ShadeRaster, x_sk: ShadeRaster, cfg: SimConfig = SimConfig()
) -> ShadeRaster:
    """Binary shade mask: structure pixels and low-intensity noise removed."""
    if x_shade.pixels.shape != x_sk.pixels.shape:
        raise ValueError("shaded and skeleton rasters differ in dimensions")
    if x_shade.bounds != x_sk.bounds:
        raise ValueError("shaded and skeleton rasters differ in bounds")
    shade = x_shade.pixels
    sk = x_sk.pixels
    gt = np.where((sk > 0) | (shade <= cfg.alpha), 0, 255).astype(np.uint8)
    return ShadeRaster(pixels=gt, bounds=x_shade.bounds, kind=KIND_GROUND_TRUTH)


def save_raster(raster: ShadeRaster, png_path, sidecar: dict | None = None):
    """Write the raster as 8-bit grayscale PNG plus a sidecar JSON."""
    png_path = str(png_path)
    Image.fromarray(raster.pixels, mode="L").save(png_path, format="PNG")
    meta = {"bounds": list(raster.bounds), "kind": raster.kind,
            "width": raster.width, "height": raster.height}
    if sidecar:
        meta.update(sidecar)
    with open(_sidecar_path(png_path), "w") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_raster(png_path) -> tuple:
    """Read a PNG + sidecar pair; returns (ShadeRaster, sidecar dict)."""
    png_path = str(png_path)
    pixels = np.asarray(Image.open(png_path).convert("L"), dtype=np.uint8)
    with open(_sidecar_path(png_path)) as fh:
        meta = json.load(fh)
    raster = ShadeRaster(pixels=pixels, bounds=tuple(meta["bounds"]), kind=meta["kind"])
    return raster, meta


def _sidecar_path(png_path: str) -> str:
    return png_path[:-4] + ".json" if png_path.endswith(".png") else png_path + ".json"
