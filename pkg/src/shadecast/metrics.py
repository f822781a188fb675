"""Evaluation and loss mathematics: MSE, SSIM, mIoU, B-IoU, cosine similarity,
InfoNCE, and total-loss composition. All functions are pure."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.special import logsumexp

_FULL_3X3 = np.ones((3, 3), dtype=bool)


def _as_gray(a) -> np.ndarray:
    arr = a.pixels if hasattr(a, "pixels") else np.asarray(a)
    return arr.astype(np.float64)


def binarize(a, threshold: int = 127) -> np.ndarray:
    """Boolean mask from an 8-bit raster: gray value strictly above threshold."""
    arr = a.pixels if hasattr(a, "pixels") else np.asarray(a)
    return arr > threshold


def _check_shapes(a, b):
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")


def mse(a, b) -> float:
    x, y = _as_gray(a), _as_gray(b)
    _check_shapes(x, y)
    return float(np.mean((x - y) ** 2))


def ssim(a, b, window: int = 11, sigma: float = 1.5, data_range: float = 255.0) -> float:
    """Gaussian-windowed structural similarity, averaged over the image.

    C1 = (0.01 L)^2, C2 = (0.03 L)^2; the border of half a window is
    excluded from the average.
    """
    x, y = _as_gray(a), _as_gray(b)
    _check_shapes(x, y)
    if min(x.shape) < window:
        raise ValueError(f"image smaller than the {window}x{window} window")
    truncate = ((window - 1) / 2.0) / sigma

    def filt(img):
        return ndimage.gaussian_filter(img, sigma=sigma, truncate=truncate)

    ux, uy = filt(x), filt(y)
    uxx, uyy, uxy = filt(x * x), filt(y * y), filt(x * y)
    vx = uxx - ux * ux
    vy = uyy - uy * uy
    cov = uxy - ux * uy

    c1 = (0.01 * data_range) ** 2
    c2 = (0.03 * data_range) ** 2
    num = (2 * ux * uy + c1) * (2 * cov + c2)
    den = (ux * ux + uy * uy + c1) * (vx + vy + c2)
    s = num / den
    pad = (window - 1) // 2
    return float(np.mean(s[pad:-pad, pad:-pad]))


def miou(pred: np.ndarray, gt: np.ndarray) -> float:
    """Mean IoU over the two classes {shade, background}. A class empty in
    both masks contributes IoU 1."""
    pred, gt = np.asarray(pred, bool), np.asarray(gt, bool)
    _check_shapes(pred, gt)
    ious = []
    for cls_pred, cls_gt in ((pred, gt), (~pred, ~gt)):
        union = np.count_nonzero(cls_pred | cls_gt)
        inter = np.count_nonzero(cls_pred & cls_gt)
        ious.append(1.0 if union == 0 else inter / union)
    return float(np.mean(ious))


def boundary(mask: np.ndarray) -> np.ndarray:
    """Morphological boundary: dilate(M) minus erode(M) with the full 3x3
    kernel; pixels outside the image count as background."""
    m = np.asarray(mask, bool)
    dil = ndimage.binary_dilation(m, structure=_FULL_3X3)
    ero = ndimage.binary_erosion(m, structure=_FULL_3X3, border_value=0)
    return dil & ~ero


def b_iou(pred: np.ndarray, gt: np.ndarray) -> float:
    """IoU of the morphological boundaries of the two masks.

    Both boundaries empty scores 1; exactly one empty scores 0.
    """
    pred, gt = np.asarray(pred, bool), np.asarray(gt, bool)
    _check_shapes(pred, gt)
    bp, bg = boundary(pred), boundary(gt)
    union = np.count_nonzero(bp | bg)
    if union == 0:
        return 1.0
    return float(np.count_nonzero(bp & bg) / union)


def similarity_matrix(vectors: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarity of row vectors; symmetric, unit diagonal."""
    v = np.asarray(vectors, dtype=np.float64)
    if v.ndim != 2:
        raise ValueError("expected an (n, dim) array")
    if not np.all(np.isfinite(v)):
        raise ValueError("embeddings contain non-finite values")
    norms = np.linalg.norm(v, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero vector has no cosine direction")
    unit = v / norms[:, None]
    s = unit @ unit.T
    return np.clip(s, -1.0, 1.0)


def info_nce(s: np.ndarray, tau: float = 0.1) -> float:
    """Softmax contrastive loss over a similarity matrix whose diagonal
    holds each item's positive. Stable via max subtraction; >= 0."""
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("similarity matrix must be square")
    n = s.shape[0]
    if n < 2:
        raise ValueError("need at least 2 embeddings")
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if not np.all(np.isfinite(s)):
        raise ValueError("similarity matrix has non-finite entries")
    logits = s / tau
    log_denoms = logsumexp(logits, axis=1)
    return float(np.mean(log_denoms - np.diag(logits)))


@dataclass(frozen=True)
class LossTerms:
    l_controlnet: float          # opaque, supplied externally
    l_contrastive: float
    lambda1: float = 0.1

    def __post_init__(self):
        if self.l_controlnet < 0:
            raise ValueError("l_controlnet must be nonnegative")
        if self.lambda1 < 0:
            raise ValueError("lambda1 must be nonnegative")


def total_loss(t: LossTerms) -> float:
    return t.l_controlnet + t.lambda1 * t.l_contrastive


# ---------------------------------------------------------------------------
# Plug-in perceptual metrics (no built-in implementation)

_PERCEPTUAL = {}


def register_perceptual(name: str, fn):
    """Register an external perceptual metric fn(a, b) -> float."""
    _PERCEPTUAL[name] = fn


def perceptual(name: str, a, b) -> float:
    if name not in _PERCEPTUAL:
        raise KeyError(f"no perceptual metric registered under {name!r}")
    return float(_PERCEPTUAL[name](a, b))


def embed_rasters(rasters, pool: int = 16) -> np.ndarray:
    """Non-neural stand-in embedder: pool x pool average pooling of each
    raster, flattened and mean-centered. Lets the contrastive loss run on
    real pipeline data without a pretrained network."""
    vecs = []
    for r in rasters:
        img = _as_gray(r)
        h, w = img.shape
        ys = np.linspace(0, h, pool + 1).astype(int)
        xs = np.linspace(0, w, pool + 1).astype(int)
        pooled = np.array([
            [img[ys[i]:ys[i + 1], xs[j]:xs[j + 1]].mean() for j in range(pool)]
            for i in range(pool)
        ])
        v = pooled.ravel()
        vecs.append(v - v.mean())
    return np.stack(vecs)
