"""Scene file: parsed buildings + road graph, persisted as versioned JSON."""

from __future__ import annotations

import json
from dataclasses import dataclass

from shadecast.geo import BuildingFootprint, GeoPoint, parse_buildings, parse_roads
from shadecast.routing import RoadGraph

SCHEMA_VERSION = 1


@dataclass
class Scene:
    buildings: list
    graph: RoadGraph

    def bounds(self, pad_fraction: float = 0.15):
        """Geo bounds covering buildings and roads, padded on each side."""
        lons, lats = [], []
        for b in self.buildings:
            for p in b.ring:
                lons.append(p.lon)
                lats.append(p.lat)
        for p in self.graph.nodes.values():
            lons.append(p.lon)
            lats.append(p.lat)
        if not lons:
            raise ValueError("empty scene has no bounds")
        min_lon, max_lon = min(lons), max(lons)
        min_lat, max_lat = min(lats), max(lats)
        pad_lon = max((max_lon - min_lon) * pad_fraction, 1e-5)
        pad_lat = max((max_lat - min_lat) * pad_fraction, 1e-5)
        return (min_lon - pad_lon, min_lat - pad_lat, max_lon + pad_lon, max_lat + pad_lat)


def build_scene(buildings_geojson, roads_geojson) -> Scene:
    buildings, _ = parse_buildings(buildings_geojson)
    graph, _ = parse_roads(roads_geojson)
    return Scene(buildings=buildings, graph=graph)


def scene_to_dict(scene: Scene) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "buildings": [
            {
                "id": b.id,
                "ring": [[p.lon, p.lat] for p in b.ring],
                "height_m": b.height_m,
                "source_tags": b.source_tags,
            }
            for b in scene.buildings
        ],
        "roads": {
            "nodes": {str(nid): [p.lon, p.lat] for nid, p in scene.graph.nodes.items()},
            "edges": [
                {
                    "id": eid,
                    "u": e.u,
                    "v": e.v,
                    "polyline": [[p.lon, p.lat] for p in e.polyline],
                    "length_m": e.length_m,
                }
                for eid, e in scene.graph.edges.items()
            ],
        },
    }


def scene_from_dict(doc: dict) -> Scene:
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported scene schema_version {version!r}")
    buildings = [
        BuildingFootprint(
            id=b["id"],
            ring=tuple(GeoPoint(lon, lat) for lon, lat in b["ring"]),
            height_m=b["height_m"],
            source_tags=b.get("source_tags", {}),
        )
        for b in doc["buildings"]
    ]
    graph = RoadGraph()
    for nid in sorted(doc["roads"]["nodes"], key=int):
        lon, lat = doc["roads"]["nodes"][nid]
        graph.add_node(GeoPoint(lon, lat))
    for e in doc["roads"]["edges"]:
        graph.add_edge(
            e["u"], e["v"],
            polyline=tuple(GeoPoint(lon, lat) for lon, lat in e["polyline"]),
            length_m=e["length_m"],
        )
    return Scene(buildings=buildings, graph=graph)


def save_scene(scene: Scene, path):
    with open(path, "w") as fh:
        json.dump(scene_to_dict(scene), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_scene(path) -> Scene:
    with open(path) as fh:
        return scene_from_dict(json.load(fh))
