"""shadecast: analytic building-shade simulation, dataset math, and routing."""

from shadecast.geo import (
    BuildingFootprint,
    GeoPoint,
    LocalFrame,
    TileBBox,
    parse_buildings,
    parse_roads,
    tile_bounds,
    tile_for,
)
from shadecast.solar import SunPosition, TextPrompt, TimeStamp, declination, format_prompt, sun_position
from shadecast.shadow import (
    NightTimeError,
    ShadeRaster,
    SimConfig,
    extract_ground_truth,
    render,
    shadow_polygon,
)
from shadecast.routing import RoadGraph, RouteRequest, RouteResult, plan_route

__version__ = "0.1.0"

__all__ = [
    "BuildingFootprint",
    "GeoPoint",
    "LocalFrame",
    "NightTimeError",
    "RoadGraph",
    "RouteRequest",
    "RouteResult",
    "ShadeRaster",
    "SimConfig",
    "SunPosition",
    "TextPrompt",
    "TileBBox",
    "TimeStamp",
    "declination",
    "extract_ground_truth",
    "format_prompt",
    "parse_buildings",
    "parse_roads",
    "plan_route",
    "render",
    "shadow_polygon",
    "sun_position",
    "tile_bounds",
    "tile_for",
]
