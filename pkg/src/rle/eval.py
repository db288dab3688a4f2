"""Attribution evaluation: superpixel segmentation and removal curves.

Images are segmented into superpixels (k-means in combined CIELAB + xy
space over a regular seed grid), segments are removed most-important-first
according to the attribution under test, and the resulting class-score
decay curve is summarized as area over the curve.  Faster decay means the
attribution found the pixels the model actually relies on.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .decompose import IMAGE, ImageBuffer, SampleDecomposition
from .errors import ModalityMismatch, TooManySegments, ZeroOriginalScore
from .explain import LocalExplanation
from .models import Model, ScoreInput


@dataclass(frozen=True)
class Segmentation:
    """Per-pixel segment ids, 0..segment_count-1, each segment 4-connected."""

    labels: np.ndarray  # (H, W) int
    segment_count: int


@dataclass(frozen=True)
class IrofReport:
    irof: float
    curve: list  # length L+1, curve[0] == 1.0
    segments_removed_order: list
    segment_count: int


# -- color conversion --------------------------------------------------------

_SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_D65 = np.array([0.95047, 1.0, 1.08883])


def rgb_to_lab(arr: np.ndarray) -> np.ndarray:
    """(H, W, 3) uint8 sRGB -> CIELAB float64, D65 white point."""
    rgb = arr.astype(np.float64) / 255.0
    linear = np.where(rgb <= 0.04045, rgb / 12.92,
                      ((rgb + 0.055) / 1.055) ** 2.4)
    xyz = linear @ _SRGB_TO_XYZ.T / _D65
    f = np.where(xyz > (6 / 29) ** 3, np.cbrt(xyz),
                 xyz / (3 * (6 / 29) ** 2) + 4 / 29)
    lab = np.empty_like(xyz)
    lab[..., 0] = 116 * f[..., 1] - 16
    lab[..., 1] = 500 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200 * (f[..., 1] - f[..., 2])
    return lab


# -- superpixel segmentation -------------------------------------------------

def slic_segment(image: ImageBuffer, k: int, compactness: float = 10.0,
                 iters: int = 10) -> Segmentation:
    """Superpixel segmentation with a regular seed grid.

    Seeds start on a grid with spacing S = sqrt(WH/k), are nudged to the
    lowest-gradient spot in their 3x3 neighborhood, then `iters` rounds of
    windowed assignment and center updates run with distance
    sqrt(d_lab^2 + (compactness/S)^2 * d_xy^2).  Connectivity enforcement
    merges stray fragments into the largest adjacent segment.  Fully
    deterministic.
    """
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    h, w = image.height, image.width
    if k > h * w:
        raise TooManySegments(f"k={k} exceeds {h * w} pixels")
    lab = rgb_to_lab(image.to_array())
    step = np.sqrt(w * h / k)

    cols = max(1, int(np.ceil(np.sqrt(k * w / h))))
    rows = max(1, int(round(k / cols)))
    centers = []  # (y, x) float, plus lab color
    grad = _gradient_map(lab)
    for r in range(rows):
        for c in range(cols):
            cy = int((r + 0.5) * h / rows)
            cx = int((c + 0.5) * w / cols)
            cy, cx = _lowest_gradient(grad, cy, cx)
            centers.append([cy, cx, *lab[cy, cx]])
    centers = np.array(centers, dtype=np.float64)

    window = int(np.ceil(step))
    ratio2 = (compactness / step) ** 2
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    labels = np.zeros((h, w), dtype=np.int64)
    for _ in range(max(1, iters)):
        best = np.full((h, w), np.inf)
        labels.fill(-1)
        for i, (cy, cx, cl, ca, cb) in enumerate(centers):
            y0, y1 = max(0, int(cy) - window), min(h, int(cy) + window + 1)
            x0, x1 = max(0, int(cx) - window), min(w, int(cx) + window + 1)
            patch = lab[y0:y1, x0:x1]
            d_lab = ((patch[..., 0] - cl) ** 2
                     + (patch[..., 1] - ca) ** 2
                     + (patch[..., 2] - cb) ** 2)
            d_xy = ((yy[y0:y1, x0:x1] - cy) ** 2
                    + (xx[y0:y1, x0:x1] - cx) ** 2)
            dist = d_lab + ratio2 * d_xy
            closer = dist < best[y0:y1, x0:x1]
            best[y0:y1, x0:x1][closer] = dist[closer]
            labels[y0:y1, x0:x1][closer] = i
        # pixels outside every window: claim by nearest center spatially
        orphan = labels < 0
        if orphan.any():
            oy, ox = np.nonzero(orphan)
            d = ((oy[:, None] - centers[None, :, 0]) ** 2
                 + (ox[:, None] - centers[None, :, 1]) ** 2)
            labels[oy, ox] = d.argmin(axis=1)
        for i in range(len(centers)):
            mask = labels == i
            if mask.any():
                centers[i, 0] = yy[mask].mean()
                centers[i, 1] = xx[mask].mean()
                centers[i, 2:] = lab[mask].mean(axis=0)

    return _enforce_connectivity(labels)


def _gradient_map(lab: np.ndarray) -> np.ndarray:
    g = np.full(lab.shape[:2], np.inf)
    dx = lab[1:-1, 2:] - lab[1:-1, :-2]
    dy = lab[2:, 1:-1] - lab[:-2, 1:-1]
    g[1:-1, 1:-1] = (dx ** 2).sum(axis=-1) + (dy ** 2).sum(axis=-1)
    return g


def _lowest_gradient(grad: np.ndarray, cy: int, cx: int):
    h, w = grad.shape
    cy = min(max(cy, 1), h - 2) if h > 2 else cy
    cx = min(max(cx, 1), w - 2) if w > 2 else cx
    window = grad[max(0, cy - 1):cy + 2, max(0, cx - 1):cx + 2]
    dy, dx = np.unravel_index(int(window.argmin()), window.shape)
    return max(0, cy - 1) + dy, max(0, cx - 1) + dx


_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def _enforce_connectivity(labels: np.ndarray) -> Segmentation:
    """Split disconnected label fragments and merge the small ones away.

    The largest 4-connected component of each label keeps its identity; every
    other fragment joins the largest adjacent kept segment.
    """
    h, w = labels.shape
    kept = np.full((h, w), -1, dtype=np.int64)
    orphans = []
    next_id = 0
    for value in np.unique(labels):
        comps, n_comps = ndimage.label(labels == value, structure=_FOUR_CONN)
        if n_comps == 0:
            continue
        sizes = ndimage.sum_labels(np.ones_like(comps), comps,
                                   index=range(1, n_comps + 1))
        main = int(np.argmax(sizes)) + 1
        kept[comps == main] = next_id
        next_id += 1
        for c in range(1, n_comps + 1):
            if c != main:
                orphans.append(comps == c)

    while orphans:
        remaining = []
        progressed = False
        for mask in orphans:
            dilated = ndimage.binary_dilation(mask, structure=_FOUR_CONN)
            border = kept[dilated & ~mask]
            border = border[border >= 0]
            if border.size == 0:
                remaining.append(mask)
                continue
            neighbor_ids, _counts = np.unique(border, return_counts=True)
            sizes = [(kept == nid).sum() for nid in neighbor_ids]
            kept[mask] = int(neighbor_ids[int(np.argmax(sizes))])
            progressed = True
        if not progressed and remaining:
            # isolated island of orphans: promote the first to its own segment
            kept[remaining.pop(0)] = next_id
            next_id += 1
        orphans = remaining

    # compact ids (merges may have removed some)
    ids = np.unique(kept)
    remap = {int(old): new for new, old in enumerate(ids)}
    compact = np.vectorize(remap.get, otypes=[np.int64])(kept)
    return Segmentation(labels=compact, segment_count=len(ids))


def grid_segmentation(width: int, height: int, rows: int, cols: int) -> Segmentation:
    """Equal rectangular segments in row-major order (for controlled tests)."""
    if width % cols or height % rows:
        raise ValueError("dimensions must divide evenly into the grid")
    labels = np.empty((height, width), dtype=np.int64)
    ph, pw = height // rows, width // cols
    for r in range(rows):
        for c in range(cols):
            labels[r * ph:(r + 1) * ph, c * pw:(c + 1) * pw] = r * cols + c
    return Segmentation(labels=labels, segment_count=rows * cols)


# -- removal curve -----------------------------------------------------------

def mean_fill_color(image: ImageBuffer) -> np.ndarray:
    """Per-channel mean of the image, rounded to uint8 (the removal fill)."""
    arr = image.to_array()
    return np.round(arr.reshape(-1, 3).mean(axis=0)).astype(np.uint8)


def irof(model: Model, image: ImageBuffer, pixel_attribution: np.ndarray,
         segmentation: Segmentation, target_class: int = 0) -> IrofReport:
    """Removal curve and its area for one image and one attribution map.

    Segments are ranked by mean per-pixel attribution (descending, ties by
    segment id); at step l the l most important segments are replaced by the
    image's per-channel mean color.  curve[l] is the class-score ratio
    against the unmodified image; the score is the mean height of the area
    over the curve (trapezoidal, drop clipped at 0).
    """
    arr = image.to_array()
    h, w = arr.shape[:2]
    if pixel_attribution.shape != (h, w):
        raise ValueError(
            f"attribution map {pixel_attribution.shape} does not match "
            f"image {(h, w)}"
        )
    labels = segmentation.labels
    L = segmentation.segment_count
    seg_means = ndimage.mean(pixel_attribution, labels=labels,
                             index=range(L))
    order = np.argsort(-np.asarray(seg_means), kind="stable")

    fill = mean_fill_color(image)
    variants = [image]
    work = arr.copy()
    for seg in order:
        work[labels == seg] = fill
        variants.append(ImageBuffer.from_array(work))
    scores = np.asarray(model.score_all(
        [ScoreInput(IMAGE, v) for v in variants], target_class
    ))
    if scores[0] == 0:
        raise ZeroOriginalScore("original class score is zero")
    curve = scores / scores[0]
    curve[0] = 1.0
    drop = 1.0 - np.minimum(curve, 1.0)
    aoc = float(np.trapezoid(drop)) / (L + 1)
    return IrofReport(
        irof=aoc,
        curve=[float(x) for x in curve],
        segments_removed_order=[int(s) for s in order],
        segment_count=L,
    )


def random_attribution(n: int, seed: int) -> LocalExplanation:
    """i.i.d. uniform(-1, 1) importance values, deterministic per seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    return LocalExplanation(n=n, values=rng.uniform(-1.0, 1.0, size=n))


def attribution_to_pixels(decomp: SampleDecomposition,
                          local: LocalExplanation) -> np.ndarray:
    """Broadcast per-patch values onto an (H, W) pixel map."""
    if decomp.modality != IMAGE:
        raise ModalityMismatch("per-pixel attribution requires image modality")
    side = decomp.grid_side
    ph, pw = decomp.patch_height, decomp.patch_width
    out = np.empty((side * ph, side * pw), dtype=np.float64)
    for e, value in zip(decomp.elements, local.values):
        out[e.row * ph:(e.row + 1) * ph, e.col * pw:(e.col + 1) * pw] = value
    return out


# -- reporting ---------------------------------------------------------------

def report_to_json(report: IrofReport, image_id: str, method: str,
                   seed: int) -> str:
    doc = {
        "image_id": image_id,
        "method": method,
        "seed": seed,
        "segment_count": report.segment_count,
        "curve": report.curve,
        "irof": report.irof,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def summarize(rows: list) -> list:
    """Mean and population std of irof per method, from parsed report rows."""
    by_method = {}
    for row in rows:
        by_method.setdefault(row["method"], []).append(row["irof"])
    out = []
    for method in sorted(by_method):
        vals = np.asarray(by_method[method])
        out.append({
            "summary": True,
            "method": method,
            "count": int(vals.size),
            "irof_mean": float(vals.mean()),
            "irof_std": float(vals.std()),
        })
    return out
