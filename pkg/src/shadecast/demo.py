"""Bundled synthetic campus scene for the end-to-end route demo.

A small grid near Tempe, AZ: a straight east-west road, a southern detour
running beside a row of tall buildings (shaded around noon, when shadows
point north), and a few campus blocks north of the direct road.
"""

from __future__ import annotations

import json
from pathlib import Path

from shadecast.geo import GeoPoint, LocalFrame, from_local

CAMPUS_CENTER = GeoPoint(lon=-111.93, lat=33.42)
CAMPUS_UTC_OFFSET = -7.0
DEMO_DATE = (2024, 3, 20)
DEMO_HOUR = 12.0

_FRAME = LocalFrame.at(CAMPUS_CENTER)


def _ll(x_m: float, y_m: float):
    p = from_local(x_m, y_m, _FRAME)
    return [round(p.lon, 8), round(p.lat, 8)]


def _rect(x0, y0, x1, y1):
    return [[_ll(x0, y0), _ll(x1, y0), _ll(x1, y1), _ll(x0, y1), _ll(x0, y0)]]


def campus_buildings_geojson() -> dict:
    features = []

    # tall row south of the detour road: shades the detour around noon
    for i in range(6):
        x0 = i * 100.0
        features.append({
            "type": "Feature",
            "id": f"tower-{i}",
            "properties": {"building": "yes", "height": "40 m", "name": f"South Tower {i}"},
            "geometry": {"type": "Polygon", "coordinates": _rect(x0, -120.0, x0 + 90.0, -95.0)},
        })

    # campus blocks north of the direct road (shadows fall away from it)
    for i, levels in enumerate((2, 4, 3)):
        x0 = 80.0 + i * 180.0
        features.append({
            "type": "Feature",
            "id": f"block-{i}",
            "properties": {"building": "university", "building:levels": levels},
            "geometry": {"type": "Polygon", "coordinates": _rect(x0, 40.0, x0 + 120.0, 100.0)},
        })

    return {"type": "FeatureCollection", "features": features}


def campus_roads_geojson() -> dict:
    def line(points):
        return {
            "type": "Feature",
            "properties": {"highway": "footway"},
            "geometry": {"type": "LineString", "coordinates": points},
        }

    features = [
        # direct east-west road, never shaded at noon (noded at the connector)
        line([_ll(0.0, 0.0), _ll(300.0, 0.0)]),
        line([_ll(300.0, 0.0), _ll(600.0, 0.0)]),
        # detour through the shaded corridor at y = -80
        line([_ll(0.0, 0.0), _ll(0.0, -80.0)]),
        line([_ll(0.0, -80.0), _ll(300.0, -80.0)]),
        line([_ll(300.0, -80.0), _ll(600.0, -80.0)]),
        line([_ll(600.0, -80.0), _ll(600.0, 0.0)]),
        # connector in the middle for route variety
        line([_ll(300.0, 0.0), _ll(300.0, -80.0)]),
    ]
    return {"type": "FeatureCollection", "features": features}


def demo_endpoints():
    """(origin, destination) of the demo request: west end to east end."""
    west = _ll(0.0, 0.0)
    east = _ll(600.0, 0.0)
    return GeoPoint(*west), GeoPoint(*east)


def write_demo_scene(out_dir) -> tuple:
    """Write buildings.geojson and roads.geojson; returns the two paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    b_path = out / "campus_buildings.geojson"
    r_path = out / "campus_roads.geojson"
    b_path.write_text(json.dumps(campus_buildings_geojson(), sort_keys=True, indent=2) + "\n")
    r_path.write_text(json.dumps(campus_roads_geojson(), sort_keys=True, indent=2) + "\n")
    return b_path, r_path
