"""Dataset assembly: Canny edges, conditioning tensors, contrastive pairs, splits."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import ndimage

from shadecast.shadow import KIND_EDGE, ShadeRaster
from shadecast.solar import SunPosition, TextPrompt, TimeStamp

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Canny edge extraction

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)


def canny_edges(
    x_sk: ShadeRaster,
    low: float = 50.0,
    high: float = 150.0,
    sigma: float = 1.4,
) -> ShadeRaster:
    """Canny edge map of a grayscale raster: blur, Sobel, non-maximum
    suppression, double threshold, hysteresis. Output is binary {0, 255}.

    Thresholds apply to the Sobel gradient magnitude clipped to the
    8-bit scale.
    """
    if low >= high:
        raise ValueError("low threshold must be < high threshold")
    img = x_sk.pixels.astype(np.float64)
    blurred = ndimage.gaussian_filter(img, sigma=sigma, mode="nearest")
    gx = ndimage.convolve(blurred, _SOBEL_X, mode="nearest")
    gy = ndimage.convolve(blurred, _SOBEL_Y, mode="nearest")
    mag = np.clip(np.hypot(gx, gy), 0.0, 255.0)

    suppressed = _non_maximum_suppression(mag, gx, gy)

    strong = suppressed >= high
    weak = suppressed >= low
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep = np.zeros(n + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    edges = keep[labels]

    out = np.where(edges, 255, 0).astype(np.uint8)
    return ShadeRaster(pixels=out, bounds=x_sk.bounds, kind=KIND_EDGE)


def _non_maximum_suppression(mag, gx, gy):
    """Thin gradient magnitude to local maxima along the gradient direction,
    quantized to 4 sectors."""
    h, w = mag.shape
    padded = np.pad(mag, 1, mode="constant")
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0

    sector = np.zeros_like(mag, dtype=np.int8)
    sector[(angle >= 22.5) & (angle < 67.5)] = 1
    sector[(angle >= 67.5) & (angle < 112.5)] = 2
    sector[(angle >= 112.5) & (angle < 157.5)] = 3

    # neighbor offsets per sector: along the gradient direction
    offsets = {0: ((0, 1), (0, -1)), 1: ((1, 1), (-1, -1)),
               2: ((1, 0), (-1, 0)), 3: ((1, -1), (-1, 1))}
    rows = np.arange(1, h + 1)[:, None]
    cols = np.arange(1, w + 1)[None, :]
    result = np.zeros_like(mag)
    for s, ((dy1, dx1), (dy2, dx2)) in offsets.items():
        m = sector == s
        n1 = padded[rows + dy1, cols + dx1]
        n2 = padded[rows + dy2, cols + dx2]
        local_max = (mag >= n1) & (mag >= n2)
        result[m & local_max] = mag[m & local_max]
    return result


# ---------------------------------------------------------------------------
# Conditioning tensor

def build_conditioning(x_sk: ShadeRaster, x_edge: ShadeRaster) -> np.ndarray:
    """Four-channel conditioning array (H, W, 4): skeleton gray replicated
    into R, G, B, plus the binary edge map as the fourth channel."""
    if x_sk.pixels.shape != x_edge.pixels.shape:
        raise ValueError("skeleton and edge rasters differ in dimensions")
    gray = x_sk.pixels
    return np.stack([gray, gray, gray, x_edge.pixels], axis=-1)


def split_conditioning(tensor: np.ndarray, bounds=None):
    """Inverse of build_conditioning; returns (skeleton, edge) rasters."""
    if tensor.ndim != 3 or tensor.shape[-1] != 4:
        raise ValueError("conditioning tensor must have exactly 4 channels")
    from shadecast.shadow import KIND_SKELETON

    b = bounds if bounds is not None else (0.0, 0.0, 1.0, 1.0)
    sk = ShadeRaster(pixels=tensor[..., 0], bounds=b, kind=KIND_SKELETON)
    edge = ShadeRaster(pixels=tensor[..., 3], bounds=b, kind=KIND_EDGE)
    return sk, edge


# ---------------------------------------------------------------------------
# Records, contrastive pairs, split

@dataclass
class DatasetRecord:
    record_id: str
    location_id: str
    x_shade_path: str
    x_sk_path: str
    x_gt_path: str
    prompt: TextPrompt
    theta_sun: SunPosition
    t_day: TimeStamp
    x_sat_path: str | None = None
    x_edge_path: str | None = None
    split: str | None = None

    def to_json_dict(self) -> dict:
        d = asdict(self)
        d["prompt"] = {"text": self.prompt.text, "template_id": self.prompt.template_id}
        return d

    @classmethod
    def from_json_dict(cls, d: dict) -> "DatasetRecord":
        d = dict(d)
        d["prompt"] = TextPrompt(**d["prompt"])
        d["theta_sun"] = SunPosition(**d["theta_sun"])
        d["t_day"] = TimeStamp(**d["t_day"])
        return cls(**d)


@dataclass(frozen=True)
class ContrastiveConfig:
    h: float = 1.0        # hour gap defining a positive pair
    k_plus: int = 5
    k_minus: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("h must be > 0")
        if self.k_plus < 1 or self.k_minus < 1:
            raise ValueError("k_plus and k_minus must be >= 1")


@dataclass(frozen=True)
class ContrastivePair:
    i: str
    j: str
    label: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError("pair members must differ")
        if self.label not in (0, 1):
            raise ValueError("label must be 0 or 1")


def label_pair(r_i: DatasetRecord, r_j: DatasetRecord, cfg: ContrastiveConfig) -> int:
    """1 iff same location and the timestamps differ by exactly h hours
    (whole-hour resolution); 0 otherwise."""
    if r_i.record_id == r_j.record_id:
        raise ValueError("cannot label a record against itself")
    if r_i.location_id != r_j.location_id:
        return 0
    gap = round(r_i.t_day.hours_between(r_j.t_day))
    return 1 if gap == round(cfg.h) else 0


def build_pair_buffer(records, cfg: ContrastiveConfig = ContrastiveConfig()):
    """Sample up to k_plus positive and k_minus negative pairs per record.

    Unordered pairs are never duplicated; the result is deterministic for
    a given record order and seed.
    """
    if not records:
        raise ValueError("records must be non-empty")
    rng = random.Random(cfg.seed)
    seen = set()
    buffer = []

    def take(candidates, k, label, anchor):
        picked = candidates if len(candidates) <= k else rng.sample(candidates, k)
        for other in picked:
            key = tuple(sorted((anchor.record_id, other.record_id)))
            if key in seen:
                continue
            seen.add(key)
            buffer.append(ContrastivePair(i=anchor.record_id, j=other.record_id, label=label))

    for rec in records:
        positives = [o for o in records
                     if o.record_id != rec.record_id and label_pair(rec, o, cfg) == 1]
        negatives = [o for o in records
                     if o.record_id != rec.record_id and label_pair(rec, o, cfg) == 0]
        if not positives:
            log.info("record %s has no positive candidates", rec.record_id)
        take(positives, cfg.k_plus, 1, rec)
        take(negatives, cfg.k_minus, 0, rec)
    return buffer


def split_dataset(records, train_fraction: float = 0.7, seed: int = 42):
    """Assign train/test split grouped by location (no location straddles
    the split). Returns a new list; input records are not mutated."""
    if not (0.0 < train_fraction < 1.0):
        raise ValueError("train_fraction must be in (0, 1)")
    locations = sorted({r.location_id for r in records})
    if len(locations) < 2:
        raise ValueError("need at least 2 locations for a grouped split")
    rng = random.Random(seed)
    rng.shuffle(locations)
    n_train = int(round(train_fraction * len(locations)))
    n_train = min(max(n_train, 1), len(locations) - 1)
    train_locs = set(locations[:n_train])
    out = []
    for r in records:
        d = r.to_json_dict()
        rec = DatasetRecord.from_json_dict(d)
        rec.split = "train" if r.location_id in train_locs else "test"
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# Manifest I/O (JSONL)

def write_manifest(records, path):
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json_dict(), sort_keys=True) + "\n")


def read_manifest(path):
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(DatasetRecord.from_json_dict(json.loads(line)))
    return records


def write_pairs(pairs, path):
    with open(path, "w") as fh:
        for p in pairs:
            fh.write(json.dumps({"i": p.i, "j": p.j, "label": p.label}, sort_keys=True) + "\n")


def read_pairs(path):
    pairs = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                d = json.loads(line)
                pairs.append(ContrastivePair(i=d["i"], j=d["j"], label=d["label"]))
    return pairs
