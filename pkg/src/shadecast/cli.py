"""Unified command line: ingest, sun, cast, build-dataset, evaluate, route, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from shadecast import demo as demo_mod
from shadecast.dataset import (
    ContrastiveConfig,
    DatasetRecord,
    build_pair_buffer,
    canny_edges,
    split_dataset,
    write_manifest,
    write_pairs,
)
from shadecast.geo import GeoPoint, TileBBox
from shadecast.metrics import b_iou, binarize, miou, mse, ssim
from shadecast.routing import RouteRequest, overlay_shade, plan_route, route_to_geojson
from shadecast.scene import build_scene, load_scene, save_scene
from shadecast.shadow import (
    SimConfig,
    extract_ground_truth,
    load_raster,
    render,
    save_raster,
)
from shadecast.solar import TimeStamp, format_prompt, sun_position


def _parse_time(value: str) -> float:
    if ":" in value:
        hh, mm = value.split(":", 1)
        return int(hh) + int(mm) / 60.0
    return float(value)


def _timestamp(date: str, time_str: str, utc_offset: float) -> TimeStamp:
    year, month, day = (int(x) for x in date.split("-"))
    return TimeStamp(year=year, month=month, day=day,
                     local_hour=_parse_time(time_str), utc_offset_hours=utc_offset)


def _scene_sun(scene, t: TimeStamp):
    bounds = scene.bounds()
    center = GeoPoint((bounds[0] + bounds[2]) / 2.0, (bounds[1] + bounds[3]) / 2.0)
    return sun_position(center, t), bounds


@click.group()
def main():
    """Analytic building-shade simulation and shade-aware routing."""


@main.command()
@click.option("--buildings", type=click.Path(exists=True), required=True)
@click.option("--roads", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def ingest(buildings, roads, out):
    """Parse GeoJSON inputs into a versioned scene file."""
    scene = build_scene(Path(buildings).read_bytes(), Path(roads).read_bytes())
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "scene.json"
    save_scene(scene, path)
    click.echo(json.dumps({
        "scene": str(path),
        "buildings": len(scene.buildings),
        "road_nodes": scene.graph.num_nodes,
        "road_edges": scene.graph.num_edges,
    }))


@main.command()
@click.option("--lat", type=float, required=True)
@click.option("--lon", type=float, required=True)
@click.option("--date", required=True, help="YYYY-MM-DD")
@click.option("--time", "time_str", required=True, help="HH:MM or fractional hours")
@click.option("--utc-offset", type=float, default=0.0)
def sun(lat, lon, date, time_str, utc_offset):
    """Print solar declination/elevation/azimuth as JSON."""
    t = _timestamp(date, time_str, utc_offset)
    pos = sun_position(GeoPoint(lon=lon, lat=lat), t)
    click.echo(json.dumps({
        "declination": round(pos.declination_deg, 4),
        "elevation": round(pos.elevation_deg, 4),
        "azimuth": round(pos.azimuth_deg, 4),
    }))


@main.command()
@click.option("--scene", "scene_path", type=click.Path(exists=True), required=True)
@click.option("--date", required=True)
@click.option("--time", "time_str", required=True)
@click.option("--utc-offset", type=float, default=0.0)
@click.option("--tile", default=None, help="z/x/y slippy tile; defaults to scene bounds")
@click.option("--raster-px", type=int, default=1024)
@click.option("--out", type=click.Path(), required=True)
def cast(scene_path, date, time_str, utc_offset, tile, raster_px, out):
    """Render shaded, skeleton, and ground-truth rasters for one time."""
    scene = load_scene(scene_path)
    t = _timestamp(date, time_str, utc_offset)
    cfg = SimConfig(raster_px=raster_px)
    sun_pos, bounds = _scene_sun(scene, t)
    if tile:
        z, x, y = (int(v) for v in tile.split("/"))
        bounds = TileBBox(zoom=z, x=x, y=y).geo_bounds
    if sun_pos.elevation_deg <= 0.0:
        click.echo(f"night time: sun elevation {sun_pos.elevation_deg:.2f}", err=True)
        sys.exit(2)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    x_shade = render(scene.buildings, sun_pos, bounds, cfg, kind="shaded_snapshot")
    x_sk = render(scene.buildings, None, bounds, cfg, kind="skeleton")
    x_gt = extract_ground_truth(x_shade, x_sk, cfg)
    sidecar = {
        "date": date,
        "local_hour": _parse_time(time_str),
        "utc_offset_hours": utc_offset,
        "sun": {
            "declination_deg": sun_pos.declination_deg,
            "elevation_deg": sun_pos.elevation_deg,
            "azimuth_deg": sun_pos.azimuth_deg,
            "hour_angle_deg": sun_pos.hour_angle_deg,
        },
        "config_hash": cfg.config_hash(),
    }
    save_raster(x_shade, out_dir / "x_shade.png", sidecar)
    save_raster(x_sk, out_dir / "x_sk.png", sidecar)
    save_raster(x_gt, out_dir / "x_gt.png", sidecar)
    click.echo(json.dumps({"out": str(out_dir), "elevation": round(sun_pos.elevation_deg, 3)}))


@main.command("build-dataset")
@click.option("--scenes", "scenes_dir", type=click.Path(exists=True), required=True,
              help="directory of <location>.json scene files")
@click.option("--dates", required=True, help="comma-separated YYYY-MM-DD list")
@click.option("--hours", required=True, help="comma-separated local hours")
@click.option("--utc-offset", type=float, default=0.0)
@click.option("--out", type=click.Path(), required=True)
@click.option("--h", "gap_h", type=float, default=1.0)
@click.option("--k-plus", type=int, default=5)
@click.option("--k-minus", type=int, default=5)
@click.option("--seed", type=int, default=42)
@click.option("--raster-px", type=int, default=256)
@click.option("--train-fraction", type=float, default=0.7)
def build_dataset(scenes_dir, dates, hours, utc_offset, out, gap_h, k_plus, k_minus,
                  seed, raster_px, train_fraction):
    """Render every (scene, date, hour), write rasters, edges, manifest, pairs."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = SimConfig(raster_px=raster_px)
    date_list = [d.strip() for d in dates.split(",") if d.strip()]
    hour_list = [float(h) for h in hours.split(",") if h.strip()]
    scene_files = sorted(Path(scenes_dir).glob("*.json"))
    if not scene_files:
        raise click.ClickException(f"no scene files in {scenes_dir}")

    records = []
    skipped_night = 0
    for scene_file in scene_files:
        location_id = scene_file.stem
        scene = load_scene(scene_file)
        for date in date_list:
            for hour in hour_list:
                t = _timestamp(date, str(hour), utc_offset)
                sun_pos, bounds = _scene_sun(scene, t)
                if sun_pos.elevation_deg <= 0.0:
                    skipped_night += 1
                    continue
                rid = f"{location_id}_{date}_{hour:04.1f}"
                rec_dir = out_dir / "rasters"
                rec_dir.mkdir(exist_ok=True)
                x_shade = render(scene.buildings, sun_pos, bounds, cfg, kind="shaded_snapshot")
                x_sk = render(scene.buildings, None, bounds, cfg, kind="skeleton")
                x_gt = extract_ground_truth(x_shade, x_sk, cfg)
                x_edge = canny_edges(x_sk)
                sidecar = {
                    "date": date, "local_hour": hour, "utc_offset_hours": utc_offset,
                    "sun": {
                        "declination_deg": sun_pos.declination_deg,
                        "elevation_deg": sun_pos.elevation_deg,
                        "azimuth_deg": sun_pos.azimuth_deg,
                        "hour_angle_deg": sun_pos.hour_angle_deg,
                    },
                    "config_hash": cfg.config_hash(),
                }
                paths = {}
                for tag, raster in (("shade", x_shade), ("sk", x_sk),
                                    ("gt", x_gt), ("edge", x_edge)):
                    rel = f"rasters/{rid}_{tag}.png"
                    save_raster(raster, out_dir / rel, sidecar)
                    paths[tag] = rel
                prompt = format_prompt(sun_pos, t, "time_of_day")
                records.append(DatasetRecord(
                    record_id=rid,
                    location_id=location_id,
                    x_shade_path=paths["shade"],
                    x_sk_path=paths["sk"],
                    x_gt_path=paths["gt"],
                    x_edge_path=paths["edge"],
                    prompt=prompt,
                    theta_sun=sun_pos,
                    t_day=t,
                ))

    ccfg = ContrastiveConfig(h=gap_h, k_plus=k_plus, k_minus=k_minus, seed=seed)
    pairs = build_pair_buffer(records, ccfg)
    if len({r.location_id for r in records}) >= 2:
        records = split_dataset(records, train_fraction=train_fraction, seed=seed)
    write_manifest(records, out_dir / "dataset.jsonl")
    write_pairs(pairs, out_dir / "pairs.jsonl")
    click.echo(json.dumps({
        "records": len(records),
        "pairs": len(pairs),
        "skipped_night": skipped_night,
        "manifest": str(out_dir / "dataset.jsonl"),
    }))


@main.command()
@click.option("--pred-dir", type=click.Path(exists=True), required=True)
@click.option("--gt-dir", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), required=True)
def evaluate(pred_dir, gt_dir, out):
    """Score matching PNGs in two directories; write per-record + aggregate JSON."""
    import numpy as np

    preds = {p.name: p for p in Path(pred_dir).glob("*.png")}
    gts = {p.name: p for p in Path(gt_dir).glob("*.png")}
    names = sorted(set(preds) & set(gts))
    if not names:
        raise click.ClickException("no matching PNG names between the two directories")
    per_record = {}
    for name in names:
        a, _ = load_raster(preds[name])
        b, _ = load_raster(gts[name])
        per_record[name] = {
            "ssim": ssim(a, b),
            "mse": mse(a, b),
            "miou": miou(binarize(a), binarize(b)),
            "b_iou": b_iou(binarize(a), binarize(b)),
        }
    aggregate = {}
    for key in ("ssim", "mse", "miou", "b_iou"):
        vals = np.array([r[key] for r in per_record.values()])
        aggregate[key] = {"mean": float(vals.mean()), "std": float(vals.std())}
    report = {"records": per_record, "aggregate": aggregate, "count": len(names)}
    Path(out).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    click.echo(json.dumps(aggregate))


@main.command()
@click.option("--graph", "scene_path", type=click.Path(exists=True), required=True,
              help="scene.json containing the road graph")
@click.option("--shade", "shade_png", type=click.Path(exists=True), required=True,
              help="ground-truth shade PNG (sidecar JSON alongside)")
@click.option("--from", "from_str", required=True, help="lon,lat")
@click.option("--to", "to_str", required=True, help="lon,lat")
@click.option("--w", type=float, default=0.5)
@click.option("--out", type=click.Path(), default=None)
def route(scene_path, shade_png, from_str, to_str, w, out):
    """Plan a shade-weighted route; emits GeoJSON."""
    scene = load_scene(scene_path)
    raster, _ = load_raster(shade_png)
    graph = overlay_shade(scene.graph, raster)
    origin = GeoPoint(*(float(v) for v in from_str.split(",")))
    destination = GeoPoint(*(float(v) for v in to_str.split(",")))
    result = plan_route(graph, RouteRequest(origin=origin, destination=destination,
                                            shade_weight=w))
    doc = route_to_geojson(result)
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
        click.echo(json.dumps({"out": out, "cost": result.cost}))
    else:
        click.echo(text)


@main.command()
@click.option("--out", type=click.Path(), required=True)
def demo(out):
    """Write the bundled synthetic campus GeoJSON files."""
    b_path, r_path = demo_mod.write_demo_scene(out)
    click.echo(json.dumps({"buildings": str(b_path), "roads": str(r_path)}))


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", type=click.Path(), default="./shadecast-data")
@click.option("--cache-size", type=int, default=256)
@click.option("--raster-px", type=int, default=512)
def serve(port, host, data_dir, cache_size, raster_px):
    """Run the HTTP service."""
    import uvicorn

    from shadecast.service import create_app

    app = create_app(data_dir, cache_size=cache_size,
                     sim_config=SimConfig(raster_px=raster_px))
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
