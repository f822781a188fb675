import json

import pytest
from fastapi.testclient import TestClient

from shadecast.demo import CAMPUS_UTC_OFFSET, demo_endpoints, write_demo_scene
from shadecast.service import create_app, scene_id_for
from shadecast.shadow import SimConfig


@pytest.fixture(scope="module")
def demo_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("demo_scene")
    b_path, r_path = write_demo_scene(d)
    return b_path.read_bytes(), r_path.read_bytes()


@pytest.fixture()
def client(tmp_path):
    app = create_app(tmp_path / "data", cache_size=8,
                     sim_config=SimConfig(raster_px=256))
    with TestClient(app) as c:
        yield c


def upload(client, demo_files):
    buildings, roads = demo_files
    resp = client.post("/scenes", files={
        "buildings": ("buildings.geojson", buildings, "application/geo+json"),
        "roads": ("roads.geojson", roads, "application/geo+json"),
    })
    assert resp.status_code == 200, resp.text
    return resp.json()


def test_healthz(client):
    resp = client.get("/healthz")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_upload_reports_scene_stats(client, demo_files):
    body = upload(client, demo_files)
    assert body["scene_id"] == scene_id_for(*demo_files)
    assert body["buildings"] == 9
    assert body["road_nodes"] >= 4
    assert body["road_edges"] >= 4
    assert len(body["bounds"]) == 4


def test_upload_idempotent(client, demo_files):
    first = upload(client, demo_files)
    second = upload(client, demo_files)
    assert first == second


def test_upload_whitespace_variant_same_id(client, demo_files):
    buildings, roads = demo_files
    reformatted = json.dumps(json.loads(buildings), indent=4).encode()
    a = upload(client, demo_files)
    resp = client.post("/scenes", files={
        "buildings": ("b.geojson", reformatted),
        "roads": ("r.geojson", roads),
    })
    assert resp.json()["scene_id"] == a["scene_id"]


def test_upload_malformed_json_400_with_offset(client, demo_files):
    _, roads = demo_files
    broken = b'{"type": "FeatureCollection", "features": [}'
    resp = client.post("/scenes", files={
        "buildings": ("b.geojson", broken),
        "roads": ("r.geojson", roads),
    })
    assert resp.status_code == 400
    detail = resp.json()["detail"]
    assert "byte_offset" in detail
    assert detail["byte_offset"] == 43


def test_scene_info_and_404(client, demo_files):
    body = upload(client, demo_files)
    info = client.get(f"/scenes/{body['scene_id']}").json()
    assert info["buildings"] == body["buildings"]
    assert info["rasters"] == []
    resp = client.get("/scenes/deadbeefdeadbeef")
    assert resp.status_code == 404


def test_shade_png_cached_byte_identical(client, demo_files):
    sid = upload(client, demo_files)["scene_id"]
    params = {"date": "2024-03-20", "hour": 12, "utc_offset": CAMPUS_UTC_OFFSET}
    r1 = client.get(f"/scenes/{sid}/shade", params=params)
    assert r1.status_code == 200
    assert r1.headers["content-type"] == "image/png"
    r2 = client.get(f"/scenes/{sid}/shade", params=params)
    assert r2.content == r1.content
    assert r2.headers["etag"] == r1.headers["etag"]
    # raster persisted on disk
    info = client.get(f"/scenes/{sid}").json()
    assert info["rasters"] == ["gt_2024-03-20_12.png"]


def test_shade_sidecar_noon_sun(client, demo_files):
    sid = upload(client, demo_files)["scene_id"]
    resp = client.get(f"/scenes/{sid}/shade/sidecar", params={
        "date": "2024-03-20", "hour": 12, "utc_offset": CAMPUS_UTC_OFFSET})
    meta = resp.json()
    assert meta["scene_id"] == sid
    assert 30.0 < meta["sun"]["elevation_deg"] < 90.0
    assert 90.0 < meta["sun"]["azimuth_deg"] < 270.0
    assert len(meta["prompts"]) == 3
    assert meta["prompts"][0].startswith("Solar declination: ")
    assert len(meta["bounds"]) == 4


def test_shade_at_night_422_with_elevation(client, demo_files):
    sid = upload(client, demo_files)["scene_id"]
    resp = client.get(f"/scenes/{sid}/shade", params={
        "date": "2024-03-20", "hour": 2, "utc_offset": CAMPUS_UTC_OFFSET})
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert detail["elevation_deg"] < 0.0


def route_body(w, hour=12):
    start, end = demo_endpoints()
    return {
        "from": [start.lon, start.lat],
        "to": [end.lon, end.lat],
        "w": w,
        "date": "2024-03-20",
        "hour": hour,
        "utc_offset": CAMPUS_UTC_OFFSET,
    }


def test_route_shaded_vs_shortest(client, demo_files):
    sid = upload(client, demo_files)["scene_id"]
    resp = client.post(f"/scenes/{sid}/route", json=route_body(0.5))
    assert resp.status_code == 200, resp.text
    doc = resp.json()
    kinds = {f["properties"]["kind"]: f for f in doc["features"]}
    assert set(kinds) == {"shaded", "shortest"}
    shaded, shortest = kinds["shaded"]["properties"], kinds["shortest"]["properties"]
    assert shaded["exposure_m"] < shortest["exposure_m"]
    assert shaded["length_m"] >= shortest["length_m"]


def test_route_w0_matches_shortest_geometry(client, demo_files):
    sid = upload(client, demo_files)["scene_id"]
    resp = client.post(f"/scenes/{sid}/route", json=route_body(0.0))
    doc = resp.json()
    assert [f["properties"]["kind"] for f in doc["features"]] == ["shortest"]


def test_route_invalid_w_400(client, demo_files):
    sid = upload(client, demo_files)["scene_id"]
    resp = client.post(f"/scenes/{sid}/route", json=route_body(1.3))
    assert resp.status_code == 400


def test_route_snap_failure_422(client, demo_files):
    sid = upload(client, demo_files)["scene_id"]
    body = route_body(0.5)
    body["from"] = [0.0, 0.0]
    resp = client.post(f"/scenes/{sid}/route", json=body)
    assert resp.status_code == 422
    assert "nearest_m" in resp.json()["detail"]


def test_route_at_night_422(client, demo_files):
    sid = upload(client, demo_files)["scene_id"]
    resp = client.post(f"/scenes/{sid}/route", json=route_body(0.5, hour=2))
    assert resp.status_code == 422


def test_route_no_roads_409(client, demo_files):
    buildings, _ = demo_files
    empty_roads = json.dumps({"type": "FeatureCollection", "features": []}).encode()
    resp = client.post("/scenes", files={
        "buildings": ("b.geojson", buildings),
        "roads": ("r.geojson", empty_roads),
    })
    sid = resp.json()["scene_id"]
    resp = client.post(f"/scenes/{sid}/route", json=route_body(0.5))
    assert resp.status_code == 409


def test_route_unknown_scene_404(client):
    resp = client.post("/scenes/deadbeefdeadbeef/route", json=route_body(0.5))
    assert resp.status_code == 404


def test_store_survives_restart(tmp_path, demo_files):
    data_dir = tmp_path / "data"
    app = create_app(data_dir, sim_config=SimConfig(raster_px=256))
    with TestClient(app) as c:
        sid = upload(c, demo_files)["scene_id"]
    app2 = create_app(data_dir, sim_config=SimConfig(raster_px=256))
    with TestClient(app2) as c:
        info = c.get(f"/scenes/{sid}")
        assert info.status_code == 200
        assert info.json()["buildings"] == 9
