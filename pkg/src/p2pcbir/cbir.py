"""Color-histogram feature extraction and exact k-NN retrieval.

Features are 166-bin HSV histograms: an 18 (hue) x 3 (saturation) x 3
(value) chromatic grid plus 4 achromatic bins over value. Distances are
plain Euclidean or histogram intersection; retrieval is an exact full scan.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HISTOGRAM_BINS = 166

HUE_BINS = 18
SAT_BINS = 3
VAL_BINS = 3
GREY_BINS = 4
# A pixel counts as achromatic below these saturation / value cutoffs.
GREY_SAT_MAX = 0.05
GREY_VAL_MAX = 0.08

METRIC_EUCLIDEAN = "euclidean"
METRIC_INTERSECTION = "histogram-intersection"
METRICS = (METRIC_EUCLIDEAN, METRIC_INTERSECTION)


@dataclass
class Collection:
    """Ordered, immutable set of (item_id, histogram) pairs.

    Vectors are stacked into one matrix so scans stay vectorized; ids must
    be unique and mutually orderable (used for deterministic tie-breaks).
    """

    ids: list
    vectors: np.ndarray  # shape (n, HISTOGRAM_BINS)

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2:
            self.vectors = self.vectors.reshape(len(self.ids), -1) if len(self.ids) \
                else self.vectors.reshape(0, HISTOGRAM_BINS)
        if len(self.ids) != len(self.vectors):
            raise ValueError("ids and vectors differ in length")
        if len(set(self.ids)) != len(self.ids):
            raise ValueError("item ids must be unique")

    def __len__(self) -> int:
        return len(self.ids)

    def vector_of(self, item_id) -> np.ndarray:
        return self.vectors[self.ids.index(item_id)]


def rgb_to_hsv(image: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hexcone HSV from 8-bit RGB. Hue in degrees [0, 360), S and V in [0, 1]."""
    rgb = np.asarray(image, dtype=np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    h = np.zeros_like(v)
    mask = c > 0
    safe_c = np.where(mask, c, 1.0)
    hr = np.mod((g - b) / safe_c, 6.0)
    hg = (b - r) / safe_c + 2.0
    hb = (r - g) / safe_c + 4.0
    h = np.where(mask & (v == r), hr, h)
    h = np.where(mask & (v == g) & (v != r), hg, h)
    h = np.where(mask & (v == b) & (v != r) & (v != g), hb, h)
    return h * 60.0, s, v


def extract_histogram(image: np.ndarray) -> np.ndarray:
    """Quantize an RGB raster into the 166-bin HSV histogram.

    Bins hold the fraction of pixels falling in each color region, so the
    result sums to 1. Hue intervals are half-open with 360 wrapping to the
    first bin; pixels below the grey cutoffs land in one of 4 value bins.
    """
    image = np.asarray(image)
    if image.size == 0:
        raise ValueError("empty input")
    if image.ndim == 2:
        image = image[None, ...]
    if image.ndim != 3 or image.shape[-1] != 3:
        raise ValueError("expected an RGB raster of shape (h, w, 3)")

    h, s, v = rgb_to_hsv(image)
    h, s, v = h.ravel(), s.ravel(), v.ravel()

    grey = (s < GREY_SAT_MAX) | (v < GREY_VAL_MAX)
    h_bin = (h / (360.0 / HUE_BINS)).astype(np.intp) % HUE_BINS
    s_bin = np.minimum((s * SAT_BINS).astype(np.intp), SAT_BINS - 1)
    v_bin = np.minimum((v * VAL_BINS).astype(np.intp), VAL_BINS - 1)
    grey_bin = np.minimum((v * GREY_BINS).astype(np.intp), GREY_BINS - 1)

    chroma_base = HUE_BINS * SAT_BINS * VAL_BINS
    idx = np.where(grey, chroma_base + grey_bin,
                   h_bin * (SAT_BINS * VAL_BINS) + s_bin * VAL_BINS + v_bin)
    counts = np.bincount(idx, minlength=HISTOGRAM_BINS)
    return counts / counts.sum()


def read_ppm(path: str | Path) -> np.ndarray:
    """Read a binary (P6) PPM with 8-bit channels into an (h, w, 3) array."""
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        if pos >= len(data):
            raise ValueError("truncated PPM header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            pos = data.index(b"\n", pos) + 1
        elif ch.isspace():
            pos += 1
        else:
            end = pos
            while end < len(data) and not data[end:end + 1].isspace():
                end += 1
            fields.append(data[pos:end])
            pos = end
    magic, width, height, maxval = fields
    if magic != b"P6":
        raise ValueError("not a binary PPM (P6) file")
    if int(maxval) != 255:
        raise ValueError("only 8-bit PPM supported")
    w, hgt = int(width), int(height)
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, count=w * hgt * 3, offset=pos)
    return pixels.reshape(hgt, w, 3)


def save_histogram(hist: np.ndarray, path: str | Path) -> None:
    Path(path).write_text(json.dumps([float(x) for x in hist]))


def load_histogram(path: str | Path) -> np.ndarray:
    bins = np.asarray(json.loads(Path(path).read_text()), dtype=np.float64)
    if bins.shape != (HISTOGRAM_BINS,):
        raise ValueError(f"expected {HISTOGRAM_BINS} bins, got {bins.shape}")
    return bins


def histogram_intersection(x: np.ndarray, y: np.ndarray) -> float:
    """Sum of per-bin minima; symmetric, equals 1 for identical normalized inputs."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("histogram length mismatch")
    return float(np.minimum(x, y).sum())


def euclidean_distance(x: np.ndarray, y: np.ndarray) -> float:
    """Plain L2 distance; the squared form costs 2n FlOp for n-bin vectors."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("histogram length mismatch")
    return float(np.sqrt(((x - y) ** 2).sum()))


def _distances(query: np.ndarray, vectors: np.ndarray, metric: str) -> np.ndarray:
    if metric == METRIC_EUCLIDEAN:
        return np.sqrt(((vectors - query) ** 2).sum(axis=1))
    if metric == METRIC_INTERSECTION:
        return 1.0 - np.minimum(vectors, query).sum(axis=1)
    raise ValueError(f"unknown metric {metric!r}")


def knn_full_scan(query: np.ndarray, coll: Collection, k: int,
                  metric: str = METRIC_EUCLIDEAN) -> list[tuple[object, float]]:
    """Exact k nearest neighbors by scanning every stored vector.

    Histogram intersection is turned into the distance 1 - similarity so
    smaller is always better. Ties are broken by ascending item id, which
    makes the result independent of collection order.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(coll) == 0:
        return []
    query = np.asarray(query, dtype=np.float64)
    d = _distances(query, coll.vectors, metric)
    k = min(k, len(coll))
    kth = np.partition(d, k - 1)[k - 1]
    cand = np.flatnonzero(d <= kth)
    ranked = sorted(cand, key=lambda i: (d[i], coll.ids[i]))[:k]
    return [(coll.ids[i], float(d[i])) for i in ranked]


def synth_collection(n: int, n_clusters: int, spread: float, seed: int) -> Collection:
    """Clustered synthetic stand-in for a crawled image collection.

    Cluster centers are drawn uniformly on the probability simplex; each
    item perturbs its center with bounded uniform noise of half-width
    `spread`, clips at zero and renormalizes. Deterministic per seed.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n_clusters < 1:
        raise ValueError("n_clusters must be at least 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    centers = rng.dirichlet(np.ones(HISTOGRAM_BINS), size=n_clusters)
    if n == 0:
        return Collection(ids=[], vectors=np.empty((0, HISTOGRAM_BINS)))
    assign = rng.integers(n_clusters, size=n)
    vectors = centers[assign]
    if spread > 0:
        vectors = vectors + rng.uniform(-spread, spread, size=(n, HISTOGRAM_BINS))
        vectors = np.clip(vectors, 0.0, None)
    sums = vectors.sum(axis=1)
    sums[sums == 0] = 1.0
    vectors = vectors / sums[:, None]
    return Collection(ids=list(range(n)), vectors=vectors)
