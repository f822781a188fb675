"""HTTP facade: scene upload, lazy shade rendering with caching, routing."""

from __future__ import annotations

import hashlib
import io
import json
import threading
from collections import OrderedDict
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from PIL import Image

from shadecast.geo import GeoJSONError, GeoPoint
from shadecast.routing import (
    NoRouteError,
    RouteRequest,
    SnapError,
    overlay_shade,
    plan_route,
    route_to_geojson,
)
from shadecast.scene import Scene, build_scene, load_scene, save_scene
from shadecast.shadow import SimConfig, extract_ground_truth, render, save_raster
from shadecast.solar import TimeStamp, format_prompt, sun_position


def _canonical_json_bytes(raw: bytes) -> bytes:
    return json.dumps(json.loads(raw.decode("utf-8")), sort_keys=True,
                      separators=(",", ":")).encode()


def scene_id_for(buildings: bytes, roads: bytes) -> str:
    digest = hashlib.sha256()
    digest.update(_canonical_json_bytes(buildings))
    digest.update(b"\x00")
    digest.update(_canonical_json_bytes(roads))
    return digest.hexdigest()[:16]


class _LruCache:
    def __init__(self, capacity: int):
        self.capacity = capacity
        self._data = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key):
        with self._lock:
            if key in self._data:
                self._data.move_to_end(key)
                return self._data[key]
        return None

    def put(self, key, value):
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            while len(self._data) > self.capacity:
                self._data.popitem(last=False)


class SceneStore:
    """Flat content-addressed directory store: scenes/<id>/..."""

    def __init__(self, data_dir, cache_size: int = 256, sim_config: SimConfig | None = None):
        self.root = Path(data_dir)
        self.root.mkdir(parents=True, exist_ok=True)
        self.sim_config = sim_config or SimConfig()
        self._scenes = {}
        self._raster_cache = _LruCache(cache_size)
        self._flight_locks = {}
        self._lock = threading.Lock()

    def ingest(self, buildings: bytes, roads: bytes) -> str:
        scene_id = scene_id_for(buildings, roads)
        scene_dir = self.root / scene_id
        if not scene_dir.exists():
            scene = build_scene(buildings, roads)  # validates before persisting
            scene_dir.mkdir(parents=True)
            (scene_dir / "buildings.geojson").write_bytes(buildings)
            (scene_dir / "roads.geojson").write_bytes(roads)
            save_scene(scene, scene_dir / "scene.json")
        return scene_id

    def scene(self, scene_id: str) -> Scene:
        with self._lock:
            if scene_id in self._scenes:
                return self._scenes[scene_id]
        path = self.root / scene_id / "scene.json"
        if not path.exists():
            raise KeyError(scene_id)
        scene = load_scene(path)
        with self._lock:
            self._scenes[scene_id] = scene
        return scene

    def list_rasters(self, scene_id: str):
        d = self.root / scene_id / "rasters"
        return sorted(p.name for p in d.glob("*.png")) if d.exists() else []

    def shade_raster(self, scene_id: str, date: str, hour: int, utc_offset: float | None):
        """Ground-truth shade raster for a local time, computed lazily and
        cached (memory LRU + on-disk PNG). Single-flight per key."""
        scene = self.scene(scene_id)
        offset = utc_offset if utc_offset is not None else self._default_offset(scene)
        key = (scene_id, date, hour, offset)
        cached = self._raster_cache.get(key)
        if cached is not None:
            return cached
        with self._lock:
            lock = self._flight_locks.setdefault(key, threading.Lock())
        with lock:
            cached = self._raster_cache.get(key)
            if cached is not None:
                return cached
            result = self._compute_shade(scene_id, scene, date, hour, offset)
            self._raster_cache.put(key, result)
            return result

    def _default_offset(self, scene: Scene) -> float:
        min_lon, _, max_lon, _ = scene.bounds()
        return round((min_lon + max_lon) / 2.0 / 15.0)

    def _compute_shade(self, scene_id, scene, date, hour, offset):
        year, month, day = (int(x) for x in date.split("-"))
        t = TimeStamp(year=year, month=month, day=day, local_hour=float(hour),
                      utc_offset_hours=offset)
        bounds = scene.bounds()
        center = GeoPoint((bounds[0] + bounds[2]) / 2.0, (bounds[1] + bounds[3]) / 2.0)
        sun = sun_position(center, t)
        if sun.elevation_deg <= 0.0:
            raise NightTime(sun.elevation_deg)
        cfg = self.sim_config
        x_shade = render(scene.buildings, sun, bounds, cfg, kind="shaded_snapshot")
        x_sk = render(scene.buildings, None, bounds, cfg, kind="skeleton")
        gt = extract_ground_truth(x_shade, x_sk, cfg)
        sidecar = {
            "scene_id": scene_id,
            "date": date,
            "hour": hour,
            "utc_offset_hours": offset,
            "sun": {
                "declination_deg": sun.declination_deg,
                "elevation_deg": sun.elevation_deg,
                "azimuth_deg": sun.azimuth_deg,
                "hour_angle_deg": sun.hour_angle_deg,
            },
            "prompts": [format_prompt(sun, t, tid).text
                        for tid in ("declination", "angle", "time_of_day")],
            "config_hash": cfg.config_hash(),
        }
        raster_dir = self.root / scene_id / "rasters"
        raster_dir.mkdir(exist_ok=True)
        png_path = raster_dir / f"gt_{date}_{hour:02d}.png"
        save_raster(gt, png_path, sidecar)
        png_bytes = _png_bytes(gt.pixels)
        meta = dict(sidecar)
        meta["bounds"] = list(gt.bounds)
        return gt, png_bytes, meta


class NightTime(Exception):
    def __init__(self, elevation_deg: float):
        super().__init__("sun below horizon")
        self.elevation_deg = elevation_deg


def _png_bytes(pixels) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(pixels, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def create_app(data_dir, cache_size: int = 256, sim_config: SimConfig | None = None) -> FastAPI:
    store = SceneStore(data_dir, cache_size=cache_size, sim_config=sim_config)
    app = FastAPI(title="shadecast")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/scenes")
    async def upload_scene(buildings: UploadFile, roads: UploadFile):
        b_bytes = await buildings.read()
        r_bytes = await roads.read()
        try:
            scene_id = store.ingest(b_bytes, r_bytes)
        except GeoJSONError as exc:
            raise HTTPException(status_code=400, detail={
                "message": str(exc), "byte_offset": exc.byte_offset})
        except json.JSONDecodeError as exc:
            raise HTTPException(status_code=400, detail={
                "message": str(exc), "byte_offset": exc.pos})
        except ValueError as exc:
            raise HTTPException(status_code=400, detail={"message": str(exc)})
        scene = store.scene(scene_id)
        return {
            "scene_id": scene_id,
            "buildings": len(scene.buildings),
            "road_nodes": scene.graph.num_nodes,
            "road_edges": scene.graph.num_edges,
            "bounds": list(scene.bounds()),
        }

    @app.get("/scenes/{scene_id}")
    def scene_info(scene_id: str):
        scene = _get_scene(store, scene_id)
        return {
            "scene_id": scene_id,
            "buildings": len(scene.buildings),
            "road_nodes": scene.graph.num_nodes,
            "road_edges": scene.graph.num_edges,
            "bounds": list(scene.bounds()),
            "rasters": store.list_rasters(scene_id),
        }

    @app.get("/scenes/{scene_id}/shade")
    def shade(scene_id: str, date: str, hour: int, utc_offset: float | None = None):
        _get_scene(store, scene_id)
        _, png, _ = _shade_or_422(store, scene_id, date, hour, utc_offset)
        etag = hashlib.sha256(png).hexdigest()[:16]
        return Response(content=png, media_type="image/png",
                        headers={"ETag": etag, "Cache-Control": "max-age=86400"})

    @app.get("/scenes/{scene_id}/shade/sidecar")
    def shade_sidecar(scene_id: str, date: str, hour: int, utc_offset: float | None = None):
        _get_scene(store, scene_id)
        _, _, meta = _shade_or_422(store, scene_id, date, hour, utc_offset)
        return JSONResponse(meta)

    @app.post("/scenes/{scene_id}/route")
    async def route(scene_id: str, request: Request):
        body = await request.json()
        scene = _get_scene(store, scene_id)
        if scene.graph.num_edges == 0:
            raise HTTPException(status_code=409, detail={"message": "NoGraph: scene has no roads"})
        try:
            w = float(body["w"])
            if not (0.0 <= w <= 1.0):
                raise ValueError
        except (KeyError, TypeError, ValueError):
            raise HTTPException(status_code=400, detail={"message": "w must be a number in [0, 1]"})
        try:
            origin = GeoPoint(*map(float, body["from"]))
            destination = GeoPoint(*map(float, body["to"]))
            date = str(body["date"])
            hour = int(body["hour"])
        except (KeyError, TypeError, ValueError) as exc:
            raise HTTPException(status_code=400, detail={"message": f"invalid request: {exc}"})
        utc_offset = body.get("utc_offset")
        raster, _, meta = _shade_or_422(store, scene_id, date, hour, utc_offset)
        graph = overlay_shade(scene.graph, raster)
        try:
            result = plan_route(graph, RouteRequest(origin=origin, destination=destination,
                                                    shade_weight=w))
        except SnapError as exc:
            raise HTTPException(status_code=422, detail={
                "message": str(exc), "nearest_m": exc.nearest_m})
        except NoRouteError as exc:
            raise HTTPException(status_code=422, detail={"message": f"NoRoute: {exc}"})
        return route_to_geojson(result, extra={"date": date, "hour": hour,
                                               "scene_id": scene_id})

    return app


def _get_scene(store: SceneStore, scene_id: str) -> Scene:
    try:
        return store.scene(scene_id)
    except KeyError:
        raise HTTPException(status_code=404, detail={"message": f"unknown scene {scene_id}"})


def _shade_or_422(store, scene_id, date, hour, utc_offset):
    try:
        return store.shade_raster(scene_id, date, hour, utc_offset)
    except NightTime as exc:
        raise HTTPException(status_code=422, detail={
            "message": "sun below horizon", "elevation_deg": exc.elevation_deg})
    except ValueError as exc:
        raise HTTPException(status_code=400, detail={"message": str(exc)})
