import itertools
import random

import numpy as np
import pytest

from shadecast.dataset import (
    ContrastiveConfig,
    ContrastivePair,
    DatasetRecord,
    build_conditioning,
    build_pair_buffer,
    canny_edges,
    label_pair,
    read_manifest,
    read_pairs,
    split_conditioning,
    split_dataset,
    write_manifest,
    write_pairs,
)
from shadecast.shadow import KIND_SKELETON, ShadeRaster
from shadecast.solar import SunPosition, TextPrompt, TimeStamp

from conftest import bounds_around, random_scene


def sk_raster(pixels):
    return ShadeRaster(pixels=np.asarray(pixels, dtype=np.uint8),
                       bounds=(0.0, 0.0, 1.0, 1.0), kind=KIND_SKELETON)


def record(rid, loc, hour, date=(2024, 6, 20)):
    t = TimeStamp(*date, float(hour))
    sun = SunPosition(declination_deg=23.4, elevation_deg=50.0,
                      azimuth_deg=180.0, hour_angle_deg=0.0)
    return DatasetRecord(
        record_id=rid, location_id=loc,
        x_shade_path=f"{rid}_shade.png", x_sk_path=f"{rid}_sk.png",
        x_gt_path=f"{rid}_gt.png",
        prompt=TextPrompt(text="Angle: 50°", template_id="angle"),
        theta_sun=sun, t_day=t,
    )


class TestCanny:
    def test_all_zero_input(self):
        edge = canny_edges(sk_raster(np.zeros((64, 64))))
        assert edge.pixels.max() == 0
        assert edge.kind == "edge"

    def test_rectangle_ring(self):
        img = np.zeros((96, 96))
        img[30:70, 25:75] = 200
        edge = canny_edges(sk_raster(img))
        ys, xs = np.nonzero(edge.pixels)
        assert len(ys) > 0
        # every edge pixel lies within 2 px of the analytic rectangle boundary
        def dist_to_boundary(y, x):
            dy = max(30 - y, y - 69, 0)
            dx = max(25 - x, x - 74, 0)
            inside_dy = min(abs(y - 30), abs(y - 69))
            inside_dx = min(abs(x - 25), abs(x - 74))
            if 30 <= y <= 69 and 25 <= x <= 74:
                return min(inside_dy, inside_dx)
            return np.hypot(dy, dx)
        assert max(dist_to_boundary(y, x) for y, x in zip(ys, xs)) <= 2.0
        # and the ring surrounds the rectangle on all four sides
        assert ys.min() <= 31 and ys.max() >= 68
        assert xs.min() <= 26 and xs.max() >= 73

    def test_binary_output(self):
        rng = np.random.RandomState(0)
        img = (rng.rand(64, 64) * 255).astype(np.uint8)
        edge = canny_edges(sk_raster(img))
        assert set(np.unique(edge.pixels)) <= {0, 255}

    def test_threshold_order_enforced(self):
        with pytest.raises(ValueError):
            canny_edges(sk_raster(np.zeros((32, 32))), low=150, high=50)

    def test_edges_near_footprint_boundary_on_synthetic_skeleton(self, local_frame):
        from scipy import ndimage

        from shadecast.shadow import SimConfig, render

        cfg = SimConfig(raster_px=128)
        scene = random_scene(random.Random(21), local_frame, 3)
        sk = render(scene, None, bounds_around(local_frame, 120.0), cfg, kind=KIND_SKELETON)
        edge = canny_edges(sk)
        fp = sk.pixels > 0
        boundary = ndimage.binary_dilation(fp) & ~ndimage.binary_erosion(fp)
        fat = ndimage.binary_dilation(boundary, iterations=2)
        assert np.all(fat[edge.pixels > 0])


class TestConditioning:
    def test_channel_layout(self):
        sk = sk_raster([[0, 200], [0, 0]])
        edge = sk_raster([[0, 255], [0, 0]])
        tensor = build_conditioning(sk, edge)
        assert tensor.shape == (2, 2, 4)
        assert tensor[0, 1].tolist() == [200, 200, 200, 255]

    def test_round_trip(self):
        rng = np.random.RandomState(1)
        sk = sk_raster((rng.rand(8, 8) * 255).astype(np.uint8))
        edge = sk_raster(np.where(rng.rand(8, 8) > 0.5, 255, 0))
        tensor = build_conditioning(sk, edge)
        sk2, edge2 = split_conditioning(tensor)
        assert np.array_equal(sk2.pixels, sk.pixels)
        assert np.array_equal(edge2.pixels, edge.pixels)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            build_conditioning(sk_raster(np.zeros((4, 4))), sk_raster(np.zeros((5, 5))))

    def test_always_four_channels(self):
        t = build_conditioning(sk_raster(np.zeros((4, 4))), sk_raster(np.zeros((4, 4))))
        assert t.shape[-1] == 4
        with pytest.raises(ValueError):
            split_conditioning(np.zeros((4, 4, 3)))


class TestLabelPair:
    cfg = ContrastiveConfig(h=1.0)

    def test_positive_same_location_one_hour(self):
        assert label_pair(record("a", "L1", 10), record("b", "L1", 11), self.cfg) == 1

    def test_negative_large_gap(self):
        assert label_pair(record("a", "L1", 10), record("b", "L1", 14), self.cfg) == 0

    def test_negative_different_location(self):
        assert label_pair(record("a", "L1", 10), record("b", "L2", 11), self.cfg) == 0

    def test_self_pair_rejected(self):
        with pytest.raises(ValueError):
            label_pair(record("a", "L1", 10), record("a", "L1", 10), self.cfg)

    def test_exhaustive_grid(self):
        # 3 locations x 6 hourly timestamps: label must equal the rule for
        # every unordered pair
        records = [record(f"{loc}-{h}", loc, h)
                   for loc in ("L1", "L2", "L3") for h in range(8, 14)]
        assert len(records) == 18
        for r1, r2 in itertools.combinations(records, 2):
            expected = int(r1.location_id == r2.location_id
                           and round(r1.t_day.hours_between(r2.t_day)) == 1)
            assert label_pair(r1, r2, self.cfg) == expected
            assert label_pair(r2, r1, self.cfg) == expected  # symmetric


class TestPairBuffer:
    def grid(self):
        return [record(f"L1-{h}", "L1", h) for h in range(8, 19)]

    def test_interior_records_get_two_positives(self):
        records = self.grid()
        cfg = ContrastiveConfig(h=1.0, k_plus=5, k_minus=5, seed=1)
        pairs = build_pair_buffer(records, cfg)
        positives = [p for p in pairs if p.label == 1]
        # all 10 adjacent-hour pairs appear: interior records have exactly
        # two positive candidates, k_plus=5 caps nothing
        expected = {(f"L1-{h}", f"L1-{h+1}") for h in range(8, 18)}
        got = {tuple(sorted((p.i, p.j))) for p in positives}
        assert got == {tuple(sorted(t)) for t in expected}

    def test_deterministic(self):
        records = self.grid() + [record(f"L2-{h}", "L2", h) for h in range(8, 19)]
        cfg = ContrastiveConfig(seed=7)
        a = build_pair_buffer(records, cfg)
        b = build_pair_buffer(records, cfg)
        assert a == b

    def test_no_self_pairs_no_duplicates(self):
        records = self.grid()
        pairs = build_pair_buffer(records, ContrastiveConfig(seed=3))
        keys = [tuple(sorted((p.i, p.j))) for p in pairs]
        assert all(p.i != p.j for p in pairs)
        assert len(keys) == len(set(keys))

    def test_k_plus_respected(self):
        records = [record(f"L1-{h}", "L1", h) for h in range(6, 20)]
        cfg = ContrastiveConfig(h=1.0, k_plus=1, k_minus=2, seed=5)
        pairs = build_pair_buffer(records, cfg)
        from collections import Counter

        # each record anchors at most k_plus positive picks of its own
        anchored_pos = Counter(p.i for p in pairs if p.label == 1)
        assert max(anchored_pos.values()) <= 1

    def test_balance_on_grid(self):
        records = [record(f"{loc}-{h}", loc, h)
                   for loc in ("L1", "L2", "L3") for h in range(8, 14)]
        pairs = build_pair_buffer(records, ContrastiveConfig(seed=2))
        n_pos = sum(p.label for p in pairs)
        n_neg = len(pairs) - n_pos
        assert abs(n_pos - n_neg) <= len(records) * 4  # k-capped, grid-limited

    def test_record_without_positives_contributes_negatives(self):
        records = [record("a", "L1", 8), record("b", "L2", 14)]
        pairs = build_pair_buffer(records, ContrastiveConfig(seed=1))
        assert len(pairs) == 1
        assert pairs[0].label == 0

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            build_pair_buffer([], ContrastiveConfig())


class TestSplit:
    def records_for(self, n_locations, per_loc=3):
        return [record(f"{loc}-{h}", f"loc{loc}", 8 + h)
                for loc in range(n_locations) for h in range(per_loc)]

    def test_ten_locations_seven_three(self):
        records = self.records_for(10)
        out = split_dataset(records, train_fraction=0.7, seed=42)
        train_locs = {r.location_id for r in out if r.split == "train"}
        test_locs = {r.location_id for r in out if r.split == "test"}
        assert len(train_locs) == 7
        assert len(test_locs) == 3
        assert not (train_locs & test_locs)

    def test_deterministic(self):
        records = self.records_for(10)
        a = split_dataset(records, seed=9)
        b = split_dataset(records, seed=9)
        assert [(r.record_id, r.split) for r in a] == [(r.record_id, r.split) for r in b]

    def test_single_location_rejected(self):
        with pytest.raises(ValueError):
            split_dataset(self.records_for(1))

    def test_input_not_mutated(self):
        records = self.records_for(4)
        split_dataset(records)
        assert all(r.split is None for r in records)


class TestManifestIO:
    def test_round_trip(self, tmp_path):
        records = [record("a", "L1", 9), record("b", "L1", 10)]
        records = [r for r in records]
        path = tmp_path / "dataset.jsonl"
        write_manifest(records, path)
        loaded = read_manifest(path)
        assert loaded == records

    def test_pairs_round_trip(self, tmp_path):
        pairs = [ContrastivePair("a", "b", 1), ContrastivePair("a", "c", 0)]
        path = tmp_path / "pairs.jsonl"
        write_pairs(pairs, path)
        assert read_pairs(path) == pairs

    def test_manifest_bytes_deterministic(self, tmp_path):
        records = [record("a", "L1", 9), record("b", "L2", 10)]
        p1, p2 = tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"
        write_manifest(records, p1)
        write_manifest(records, p2)
        assert p1.read_bytes() == p2.read_bytes()


def test_contrastive_config_validation():
    with pytest.raises(ValueError):
        ContrastiveConfig(h=0)
    with pytest.raises(ValueError):
        ContrastiveConfig(k_plus=0)
