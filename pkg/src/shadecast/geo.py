"""Geographic primitives: GeoJSON ingestion, slippy tiles, local metric frames."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from shapely.geometry import Polygon as _ShapelyPolygon

EARTH_RADIUS_M = 6378137.0  # WGS84 equatorial; consistent with the 111320 m/deg frame constant
METERS_PER_DEG_LAT = 111320.0
WEB_MERCATOR_LAT_LIMIT = 85.05113

DEFAULT_STOREY_HEIGHT_M = 3.0
DEFAULT_BUILDING_HEIGHT_M = 8.0


class GeoJSONError(ValueError):
    """Malformed GeoJSON input; carries the byte offset when known."""

    def __init__(self, message, byte_offset=None):
        super().__init__(message)
        self.byte_offset = byte_offset


class OutOfRangeError(ValueError):
    pass


@dataclass(frozen=True)
class GeoPoint:
    lon: float
    lat: float

    def __post_init__(self):
        if not (-180.0 <= self.lon <= 180.0):
            raise OutOfRangeError(f"lon {self.lon} outside [-180, 180]")
        if not (-90.0 <= self.lat <= 90.0):
            raise OutOfRangeError(f"lat {self.lat} outside [-90, 90]")


@dataclass(frozen=True)
class BuildingFootprint:
    """A ground polygon with height. The ring stores distinct vertices;
    closure is implicit (last vertex connects back to the first)."""

    id: str
    ring: tuple  # tuple of GeoPoint, >= 3 distinct vertices, not repeated
    height_m: float
    source_tags: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.ring) < 3:
            raise ValueError(f"footprint {self.id}: ring needs >= 3 vertices")
        if self.height_m <= 0:
            raise ValueError(f"footprint {self.id}: height_m must be > 0")


@dataclass(frozen=True)
class TileBBox:
    zoom: int
    x: int
    y: int

    @property
    def geo_bounds(self):
        """(min_lon, min_lat, max_lon, max_lat) of this slippy tile."""
        n = 2 ** self.zoom
        min_lon = self.x / n * 360.0 - 180.0
        max_lon = (self.x + 1) / n * 360.0 - 180.0
        max_lat = math.degrees(math.atan(math.sinh(math.pi * (1 - 2 * self.y / n))))
        min_lat = math.degrees(math.atan(math.sinh(math.pi * (1 - 2 * (self.y + 1) / n))))
        return (min_lon, min_lat, max_lon, max_lat)


@dataclass(frozen=True)
class LocalFrame:
    """Equirectangular tangent plane: meters east/north of an origin point.

    Good to <0.1% over tile-sized areas; not meant for large extents.
    """

    origin: GeoPoint
    meters_per_deg_lon: float
    meters_per_deg_lat: float = METERS_PER_DEG_LAT

    @classmethod
    def at(cls, origin: GeoPoint) -> "LocalFrame":
        return cls(
            origin=origin,
            meters_per_deg_lon=METERS_PER_DEG_LAT * math.cos(math.radians(origin.lat)),
        )


def to_local(point: GeoPoint, frame: LocalFrame):
    x_m = (point.lon - frame.origin.lon) * frame.meters_per_deg_lon
    y_m = (point.lat - frame.origin.lat) * frame.meters_per_deg_lat
    return (x_m, y_m)


def from_local(x_m: float, y_m: float, frame: LocalFrame) -> GeoPoint:
    return GeoPoint(
        lon=frame.origin.lon + x_m / frame.meters_per_deg_lon,
        lat=frame.origin.lat + y_m / frame.meters_per_deg_lat,
    )


def tile_for(point: GeoPoint, zoom: int) -> TileBBox:
    """Slippy-map tile containing the point."""
    if not (0 <= zoom <= 22):
        raise OutOfRangeError(f"zoom {zoom} outside [0, 22]")
    if abs(point.lat) > WEB_MERCATOR_LAT_LIMIT:
        raise OutOfRangeError(
            f"lat {point.lat} outside web-mercator range +/-{WEB_MERCATOR_LAT_LIMIT}"
        )
    n = 2 ** zoom
    x = int((point.lon + 180.0) / 360.0 * n)
    lat_r = math.radians(point.lat)
    y = int((1.0 - math.asinh(math.tan(lat_r)) / math.pi) / 2.0 * n)
    # points exactly on the antimeridian / pole edge clamp into the last tile
    x = min(max(x, 0), n - 1)
    y = min(max(y, 0), n - 1)
    return TileBBox(zoom=zoom, x=x, y=y)


def tile_bounds(tile: TileBBox):
    return tile.geo_bounds


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    lat1, lat2 = math.radians(a.lat), math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(math.sqrt(h))


def polyline_length_m(points) -> float:
    return sum(haversine_m(points[i], points[i + 1]) for i in range(len(points) - 1))


_HEIGHT_RE = re.compile(r"^\s*([0-9]+(?:\.[0-9]+)?)\s*(?:m|meters?)?\s*$", re.IGNORECASE)


def _parse_height_value(raw):
    if raw is None:
        return None
    if isinstance(raw, (int, float)):
        return float(raw) if raw > 0 else None
    m = _HEIGHT_RE.match(str(raw))
    if m:
        v = float(m.group(1))
        return v if v > 0 else None
    return None


def resolve_height(
    properties: dict,
    storey_height_m: float = DEFAULT_STOREY_HEIGHT_M,
    default_height_m: float = DEFAULT_BUILDING_HEIGHT_M,
) -> float:
    """Explicit height wins; else levels * storey height; else the default."""
    h = _parse_height_value(properties.get("height"))
    if h is not None:
        return h
    levels = _parse_height_value(properties.get("building:levels"))
    if levels is not None:
        return levels * storey_height_m
    return default_height_m


def _load_feature_collection(data: bytes) -> dict:
    if isinstance(data, (bytes, bytearray)):
        text = data.decode("utf-8")
    else:
        text = data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GeoJSONError(
            f"malformed JSON at byte offset {exc.pos}: {exc.msg}", byte_offset=exc.pos
        ) from exc
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise GeoJSONError("expected a GeoJSON FeatureCollection")
    return doc


def _clean_ring(coords):
    """Distinct-vertex ring from GeoJSON coordinates (closing vertex dropped)."""
    pts = []
    for lon, lat in ((c[0], c[1]) for c in coords):
        if not pts or (lon, lat) != (pts[-1].lon, pts[-1].lat):
            pts.append(GeoPoint(lon=lon, lat=lat))
    if len(pts) > 1 and (pts[0].lon, pts[0].lat) == (pts[-1].lon, pts[-1].lat):
        pts.pop()
    return pts


def _ring_is_simple(ring) -> bool:
    coords = [(p.lon, p.lat) for p in ring] + [(ring[0].lon, ring[0].lat)]
    try:
        return _ShapelyPolygon(coords).is_valid
    except Exception:
        return False


def parse_buildings(
    data,
    storey_height_m: float = DEFAULT_STOREY_HEIGHT_M,
    default_height_m: float = DEFAULT_BUILDING_HEIGHT_M,
):
    """Parse building footprints from a GeoJSON FeatureCollection.

    Polygons keep only the outer ring; MultiPolygons split into one
    footprint per outer ring. Degenerate rings (<3 distinct vertices,
    self-intersecting) are skipped and counted, not fatal.

    Returns (footprints, skipped_count).
    """
    doc = _load_feature_collection(data)
    footprints = []
    skipped = 0
    for idx, feature in enumerate(doc.get("features", [])):
        geom = feature.get("geometry") or {}
        props = feature.get("properties") or {}
        gtype = geom.get("type")
        if gtype == "Polygon":
            outer_rings = [geom.get("coordinates", [[]])[0]]
        elif gtype == "MultiPolygon":
            outer_rings = [poly[0] for poly in geom.get("coordinates", []) if poly]
        else:
            continue
        fid = str(feature.get("id") or props.get("@id") or props.get("id") or f"feature-{idx}")
        height = resolve_height(props, storey_height_m, default_height_m)
        for part, raw_ring in enumerate(outer_rings):
            ring = _clean_ring(raw_ring)
            if len(ring) < 3 or not _ring_is_simple(ring):
                skipped += 1
                continue
            part_id = fid if len(outer_rings) == 1 else f"{fid}#{part}"
            footprints.append(
                BuildingFootprint(
                    id=part_id, ring=tuple(ring), height_m=height, source_tags=dict(props)
                )
            )
    return footprints, skipped


def parse_roads(data, snap_tolerance_m: float = 0.5):
    """Parse LineString/MultiLineString features into a RoadGraph.

    Endpoints within snap_tolerance_m share a node. Zero-length segments
    are dropped and counted. Returns (graph, dropped_count).
    """
    from shadecast.routing import RoadEdge, RoadGraph

    doc = _load_feature_collection(data)
    graph = RoadGraph()
    dropped = 0

    # spatial hash on a local frame anchored at the first coordinate seen
    frame = None
    cells = {}  # (cx, cy) -> list of node ids
    cell_m = max(snap_tolerance_m, 0.25)

    def node_for(p: GeoPoint):
        nonlocal frame
        if frame is None:
            frame = LocalFrame.at(p)
        x, y = to_local(p, frame)
        cx, cy = int(math.floor(x / cell_m)), int(math.floor(y / cell_m))
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for nid in cells.get((cx + dx, cy + dy), ()):
                    nx, ny = to_local(graph.nodes[nid], frame)
                    if math.hypot(nx - x, ny - y) <= snap_tolerance_m:
                        return nid
        nid = graph.add_node(p)
        cells.setdefault((cx, cy), []).append(nid)
        return nid

    def add_line(coords):
        nonlocal dropped
        pts = _clean_ring_open(coords)
        if len(pts) < 2:
            dropped += 1
            return
        length = polyline_length_m(pts)
        if length <= 0.0:
            dropped += 1
            return
        u = node_for(pts[0])
        v = node_for(pts[-1])
        if u == v and length <= snap_tolerance_m:
            dropped += 1
            return
        graph.add_edge(u, v, polyline=tuple(pts), length_m=length)

    for feature in doc.get("features", []):
        geom = feature.get("geometry") or {}
        gtype = geom.get("type")
        if gtype == "LineString":
            add_line(geom.get("coordinates", []))
        elif gtype == "MultiLineString":
            for part in geom.get("coordinates", []):
                add_line(part)
    return graph, dropped


def _clean_ring_open(coords):
    pts = []
    for lon, lat in ((c[0], c[1]) for c in coords):
        if not pts or (lon, lat) != (pts[-1].lon, pts[-1].lat):
            pts.append(GeoPoint(lon=lon, lat=lat))
    return pts
