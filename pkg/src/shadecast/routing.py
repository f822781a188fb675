"""Road graph, shade-ratio overlay, and shade-weighted shortest paths."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace

from shadecast.geo import (
    GeoPoint,
    LocalFrame,
    from_local,
    haversine_m,
    to_local,
)


class NoRouteError(RuntimeError):
    pass


class SnapError(ValueError):
    def __init__(self, point: GeoPoint, nearest_m: float):
        super().__init__(
            f"no graph node within snap tolerance of ({point.lon}, {point.lat}); "
            f"nearest is {nearest_m:.1f} m away"
        )
        self.nearest_m = nearest_m


class ShadeNotComputedError(RuntimeError):
    def __init__(self):
        super().__init__("edge has no shade_ratio; run overlay_shade first")


@dataclass
class RoadEdge:
    u: int
    v: int
    polyline: tuple  # tuple of GeoPoint from u to v
    length_m: float
    shade_ratio: float | None = None

    def __post_init__(self):
        if self.length_m <= 0:
            raise ValueError("edge length must be > 0")
        if self.shade_ratio is not None and not (0.0 <= self.shade_ratio <= 1.0):
            raise ValueError("shade_ratio must be in [0, 1]")


@dataclass
class RoadGraph:
    """Undirected road network; nodes are numbered in insertion order."""

    nodes: dict = field(default_factory=dict)   # node id -> GeoPoint
    edges: dict = field(default_factory=dict)   # edge id -> RoadEdge
    adjacency: dict = field(default_factory=dict)  # node id -> [(edge id, other node)]

    def add_node(self, point: GeoPoint) -> int:
        nid = len(self.nodes)
        self.nodes[nid] = point
        self.adjacency[nid] = []
        return nid

    def add_edge(self, u: int, v: int, polyline, length_m: float) -> int:
        eid = len(self.edges)
        self.edges[eid] = RoadEdge(u=u, v=v, polyline=tuple(polyline), length_m=length_m)
        self.adjacency[u].append((eid, v))
        self.adjacency[v].append((eid, u))
        return eid

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @property
    def num_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class RouteRequest:
    origin: GeoPoint
    destination: GeoPoint
    shade_weight: float = 0.5
    snap_tolerance_m: float = 100.0

    def __post_init__(self):
        if not (0.0 <= self.shade_weight <= 1.0):
            raise ValueError("shade_weight must be in [0, 1]")


@dataclass
class RouteResult:
    node_path: list
    polyline: list            # list of GeoPoint
    total_length_m: float
    total_exposure_m: float   # unshaded meters
    mean_shade_ratio: float
    cost: float
    shade_weight: float
    shortest: "RouteResult | None" = None  # w=0 comparison route when w > 0


def edge_shade_ratio(edge: RoadEdge, raster, sample_step_m: float = 2.0) -> float:
    """Fraction of points sampled every sample_step_m along the edge whose
    raster pixel is full shade (255). Points outside the raster count as
    unshaded."""
    pts = _resample_polyline(edge.polyline, sample_step_m)
    shaded = 0
    for p in pts:
        value = raster.pixel_at(p)
        if value == 255:
            shaded += 1
    return shaded / len(pts)


def _resample_polyline(polyline, step_m: float):
    """Points every step_m meters along the polyline, endpoints included."""
    frame = LocalFrame.at(polyline[0])
    local = [to_local(p, frame) for p in polyline]
    seg_lengths = [
        math.hypot(local[i + 1][0] - local[i][0], local[i + 1][1] - local[i][1])
        for i in range(len(local) - 1)
    ]
    total = sum(seg_lengths)
    if total == 0.0:
        return [polyline[0]]
    n_samples = max(int(math.floor(total / step_m)), 1)
    targets = [i * step_m for i in range(n_samples + 1)]
    if targets[-1] < total:
        targets.append(total)
    out = []
    seg, seg_start = 0, 0.0
    for d in targets:
        d = min(d, total)
        while seg < len(seg_lengths) - 1 and d > seg_start + seg_lengths[seg]:
            seg_start += seg_lengths[seg]
            seg += 1
        t = 0.0 if seg_lengths[seg] == 0 else (d - seg_start) / seg_lengths[seg]
        x0, y0 = local[seg]
        x1, y1 = local[seg + 1]
        out.append(from_local(x0 + t * (x1 - x0), y0 + t * (y1 - y0), frame))
    return out


def overlay_shade(graph: RoadGraph, raster, sample_step_m: float = 2.0) -> RoadGraph:
    """New graph version with shade_ratio set on every edge."""
    out = RoadGraph(nodes=dict(graph.nodes), edges={}, adjacency={n: [] for n in graph.nodes})
    for nid in graph.nodes:
        out.adjacency[nid] = []
    for eid, e in graph.edges.items():
        ratio = edge_shade_ratio(e, raster, sample_step_m)
        out.edges[eid] = replace(e, shade_ratio=ratio)
        out.adjacency[e.u].append((eid, e.v))
        out.adjacency[e.v].append((eid, e.u))
    return out


def edge_cost(edge: RoadEdge, w: float) -> float:
    """Blend of distance and sun exposure: (1-w)*length + w*length*(1-ratio).

    w=0 is pure distance, w=1 pure unshaded meters; nonnegative for all w.
    """
    if not (0.0 <= w <= 1.0):
        raise ValueError("w must be in [0, 1]")
    if edge.shade_ratio is None:
        raise ShadeNotComputedError()
    return (1.0 - w) * edge.length_m + w * edge.length_m * (1.0 - edge.shade_ratio)


def snap_to_node(graph: RoadGraph, point: GeoPoint, tolerance_m: float = 100.0) -> int:
    best, best_d = None, math.inf
    for nid in sorted(graph.nodes):
        d = haversine_m(point, graph.nodes[nid])
        if d < best_d:
            best, best_d = nid, d
    if best is None or best_d > tolerance_m:
        raise SnapError(point, best_d if best is not None else math.inf)
    return best


def _dijkstra(graph: RoadGraph, source: int, target: int, w: float):
    """Least-cost path under edge_cost; ties broken by smallest node id."""
    dist = {source: 0.0}
    prev = {}
    heap = [(0.0, source)]
    done = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        if node == target:
            break
        for eid, other in sorted(graph.adjacency[node], key=lambda t: (t[1], t[0])):
            nd = d + edge_cost(graph.edges[eid], w)
            if nd < dist.get(other, math.inf) or (
                nd == dist.get(other, math.inf) and node < prev.get(other, (math.inf,))[0]
            ):
                dist[other] = nd
                prev[other] = (node, eid)
                heapq.heappush(heap, (nd, other))
    if target not in dist or target not in done:
        raise NoRouteError(f"no path from node {source} to node {target}")
    path, edge_ids = [target], []
    node = target
    while node != source:
        node, eid = prev[node]
        path.append(node)
        edge_ids.append(eid)
    path.reverse()
    edge_ids.reverse()
    return path, edge_ids, dist[target]


def _result_for(graph: RoadGraph, path, edge_ids, w: float) -> RouteResult:
    total_len = 0.0
    exposure = 0.0
    shaded_len = 0.0
    cost = 0.0
    polyline = [graph.nodes[path[0]]]
    for node_from, eid in zip(path[:-1], edge_ids):
        e = graph.edges[eid]
        pts = list(e.polyline)
        if e.u != node_from:
            pts.reverse()
        polyline.extend(pts[1:])
        total_len += e.length_m
        exposure += e.length_m * (1.0 - (e.shade_ratio or 0.0))
        shaded_len += e.length_m * (e.shade_ratio or 0.0)
        cost += edge_cost(e, w)
    mean_ratio = shaded_len / total_len if total_len > 0 else 0.0
    return RouteResult(
        node_path=path,
        polyline=polyline,
        total_length_m=total_len,
        total_exposure_m=exposure,
        mean_shade_ratio=mean_ratio,
        cost=cost,
        shade_weight=w,
    )


def plan_route(graph: RoadGraph, req: RouteRequest) -> RouteResult:
    """Exact least-cost route for the requested shade weight. When w > 0 the
    result also carries the plain shortest-by-distance route for comparison."""
    if graph.num_edges == 0:
        raise NoRouteError("graph has no edges")
    source = snap_to_node(graph, req.origin, req.snap_tolerance_m)
    target = snap_to_node(graph, req.destination, req.snap_tolerance_m)
    if source == target:
        p = graph.nodes[source]
        empty = RouteResult([source], [p], 0.0, 0.0, 0.0, 0.0, req.shade_weight)
        return empty
    w = req.shade_weight
    path, edge_ids, _ = _dijkstra(graph, source, target, w)
    result = _result_for(graph, path, edge_ids, w)
    if w > 0.0:
        s_path, s_edges, _ = _dijkstra(graph, source, target, 0.0)
        result.shortest = _result_for(graph, s_path, s_edges, 0.0)
    return result


def route_to_geojson(result: RouteResult, extra: dict | None = None) -> dict:
    """GeoJSON FeatureCollection: the chosen (shaded) route plus, when
    present, the w=0 shortest route."""
    features = [_route_feature(result, "shaded" if result.shade_weight > 0 else "shortest",
                               extra)]
    if result.shortest is not None:
        features.append(_route_feature(result.shortest, "shortest", extra))
    return {"type": "FeatureCollection", "features": features}


def _route_feature(r: RouteResult, kind: str, extra: dict | None) -> dict:
    props = {
        "kind": kind,
        "length_m": round(r.total_length_m, 3),
        "exposure_m": round(r.total_exposure_m, 3),
        "mean_shade_ratio": round(r.mean_shade_ratio, 6),
        "cost": round(r.cost, 6),
        "w": r.shade_weight,
    }
    if extra:
        props.update(extra)
    return {
        "type": "Feature",
        "properties": props,
        "geometry": {
            "type": "LineString",
            "coordinates": [[p.lon, p.lat] for p in r.polyline],
        },
    }
