import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from shadecast.cli import main
from shadecast.demo import CAMPUS_UTC_OFFSET, demo_endpoints, write_demo_scene


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Demo GeoJSON + ingested scene, shared across CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    runner = CliRunner()
    res = runner.invoke(main, ["demo", "--out", str(root / "geo")])
    assert res.exit_code == 0, res.output
    paths = json.loads(res.output)
    res = runner.invoke(main, ["ingest", "--buildings", paths["buildings"],
                               "--roads", paths["roads"],
                               "--out", str(root / "scene")])
    assert res.exit_code == 0, res.output
    info = json.loads(res.output)
    return root, info


def test_demo_writes_geojson(tmp_path):
    runner = CliRunner()
    res = runner.invoke(main, ["demo", "--out", str(tmp_path)])
    assert res.exit_code == 0
    paths = json.loads(res.output)
    doc = json.loads(Path(paths["buildings"]).read_text())
    assert doc["type"] == "FeatureCollection"
    assert len(doc["features"]) == 9


def test_ingest_reports_counts(workspace):
    _, info = workspace
    assert info["buildings"] == 9
    assert info["road_nodes"] >= 4
    assert Path(info["scene"]).exists()


def test_sun_json_output():
    runner = CliRunner()
    res = runner.invoke(main, ["sun", "--lat", "0", "--lon", "0",
                               "--date", "2024-03-20", "--time", "12:00"])
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["elevation"] > 85.0
    assert abs(out["declination"]) < 1.5


def test_cast_writes_three_rasters(workspace):
    root, info = workspace
    runner = CliRunner()
    out_dir = root / "cast"
    res = runner.invoke(main, [
        "cast", "--scene", info["scene"], "--date", "2024-03-20",
        "--time", "12:00", "--utc-offset", str(CAMPUS_UTC_OFFSET),
        "--raster-px", "256", "--out", str(out_dir)])
    assert res.exit_code == 0, res.output
    for name in ("x_shade.png", "x_sk.png", "x_gt.png"):
        assert (out_dir / name).exists()
        assert (out_dir / name).with_suffix(".json").exists()
    sidecar = json.loads((out_dir / "x_gt.json").read_text())
    assert sidecar["sun"]["elevation_deg"] > 0.0


def test_cast_at_night_exits_2(workspace):
    root, info = workspace
    runner = CliRunner()
    res = runner.invoke(main, [
        "cast", "--scene", info["scene"], "--date", "2024-03-20",
        "--time", "02:00", "--utc-offset", str(CAMPUS_UTC_OFFSET),
        "--out", str(root / "night")])
    assert res.exit_code == 2
    assert "night" in res.output


def test_route_cli_geojson(workspace):
    root, info = workspace
    runner = CliRunner()
    cast_dir = root / "cast"
    if not (cast_dir / "x_gt.png").exists():
        res = runner.invoke(main, [
            "cast", "--scene", info["scene"], "--date", "2024-03-20",
            "--time", "12:00", "--utc-offset", str(CAMPUS_UTC_OFFSET),
            "--raster-px", "256", "--out", str(cast_dir)])
        assert res.exit_code == 0, res.output
    start, end = demo_endpoints()
    res = runner.invoke(main, [
        "route", "--graph", info["scene"], "--shade", str(cast_dir / "x_gt.png"),
        "--from", f"{start.lon},{start.lat}", "--to", f"{end.lon},{end.lat}",
        "--w", "0.5"])
    assert res.exit_code == 0, res.output
    doc = json.loads(res.output)
    kinds = {f["properties"]["kind"]: f["properties"] for f in doc["features"]}
    assert kinds["shaded"]["exposure_m"] < kinds["shortest"]["exposure_m"]


def test_build_dataset_and_evaluate(tmp_path):
    runner = CliRunner()
    geo = tmp_path / "geo"
    runner.invoke(main, ["demo", "--out", str(geo)])
    paths = {p.stem: p for p in geo.glob("*.geojson")}
    scenes = tmp_path / "scenes"
    # two locations from the same demo geometry (distinct ids suffice here)
    for loc in ("alpha", "beta"):
        res = runner.invoke(main, [
            "ingest", "--buildings", str(paths["campus_buildings"]),
            "--roads", str(paths["campus_roads"]), "--out", str(tmp_path / loc)])
        assert res.exit_code == 0, res.output
        scenes.mkdir(exist_ok=True)
        (tmp_path / loc / "scene.json").replace(scenes / f"{loc}.json")
    out_dir = tmp_path / "ds"
    res = runner.invoke(main, [
        "build-dataset", "--scenes", str(scenes), "--dates", "2024-03-20",
        "--hours", "10,11,12", "--utc-offset", str(CAMPUS_UTC_OFFSET),
        "--out", str(out_dir), "--raster-px", "128", "--seed", "7"])
    assert res.exit_code == 0, res.output
    summary = json.loads(res.output)
    assert summary["records"] == 6
    assert summary["pairs"] > 0
    lines = (out_dir / "dataset.jsonl").read_text().splitlines()
    assert len(lines) == 6
    splits = {json.loads(l)["split"] for l in lines}
    assert splits <= {"train", "test"}

    # evaluate ground truth against itself: perfect scores
    gt_dir = tmp_path / "gt_only"
    gt_dir.mkdir()
    for p in (out_dir / "rasters").glob("*_gt.png"):
        (gt_dir / p.name).write_bytes(p.read_bytes())
        sidecar = p.with_suffix(".json")
        (gt_dir / sidecar.name).write_bytes(sidecar.read_bytes())
    report_path = tmp_path / "report.json"
    res = runner.invoke(main, ["evaluate", "--pred-dir", str(gt_dir),
                               "--gt-dir", str(gt_dir), "--out", str(report_path)])
    assert res.exit_code == 0, res.output
    report = json.loads(report_path.read_text())
    assert report["aggregate"]["mse"]["mean"] == 0.0
    assert report["aggregate"]["ssim"]["mean"] == pytest.approx(1.0)
    assert report["aggregate"]["miou"]["mean"] == 1.0
    assert report["aggregate"]["b_iou"]["mean"] == 1.0


def test_evaluate_no_overlap_fails(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    a.mkdir()
    b.mkdir()
    runner = CliRunner()
    res = runner.invoke(main, ["evaluate", "--pred-dir", str(a), "--gt-dir", str(b),
                               "--out", str(tmp_path / "r.json")])
    assert res.exit_code != 0
