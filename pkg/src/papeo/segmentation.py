"""Video segment-boundary proposers and boundary-to-segment conversion.

Three techniques, mirroring how authors actually cut their talks:

* punctuation — a boundary at the end of every transcript line containing a
  terminal punctuation character (no tunable hyperparameters);
* hsv — mean absolute per-pixel change between adjacent frames in HSV space;
* template — normalized cross-correlation of each frame against the last
  key frame, re-anchoring the key frame on every detected cut.

The hsv/template detectors share two hyperparameters: a detection threshold
and a minimum segment length applied between consecutive *emitted*
boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .ingest import TERMINAL_PUNCTUATION
from .model import TranscriptLine, VideoSegment

__all__ = [
    "SegmenterConfig",
    "segment_by_punctuation",
    "segment_by_hsv",
    "segment_by_template",
    "hsv_channels",
    "hsv_frame_delta",
    "grayscale",
    "ncc",
    "boundaries_to_segments",
]


@dataclass(frozen=True)
class SegmenterConfig:
    """Knobs for the frame-based detectors.

    ``threshold`` is in per-technique units: mean per-pixel HSV delta on a
    0–255 scale for hsv (boundary when delta > threshold), correlation in
    [-1, 1] for template (boundary when similarity < threshold).
    """

    threshold: float = 30.0
    min_segment_s: float = 0.0
    punctuation_set: str = TERMINAL_PUNCTUATION

    def __post_init__(self):
        if self.min_segment_s < 0:
            raise InputError("min_segment_s must be >= 0")
        if self.threshold < 0:
            raise InputError("threshold must be >= 0")


def segment_by_punctuation(lines, punctuation_set: str = TERMINAL_PUNCTUATION) -> list[float]:
    """Boundary at the end of every line containing a terminal character.

    Containment is plain substring containment ("v1.2" counts), so the
    technique over-segments by design; merging suggested segments is cheaper
    for authors than splitting them. Returns sorted, deduplicated times; the
    video start/end are implicit.
    """
    times = {
        ln.end_s for ln in lines
        if any(c in ln.text for c in punctuation_set)
    }
    return sorted(times)


# ---------------------------------------------------------------------------
# frame scoring

def hsv_channels(image: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hexcone HSV of an RGB uint8 raster: H in degrees, S and V on 0–255."""
    rgb = image.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0) * 255.0

    h = np.zeros_like(v)
    mask = c > 0
    r_max = mask & (v == r)
    g_max = mask & ~r_max & (v == g)
    b_max = mask & ~r_max & ~g_max
    np.divide(g - b, c, out=h, where=r_max)
    h[r_max] = np.mod(h[r_max], 6.0)
    np.divide(b - r, c, out=h, where=g_max)
    h[g_max] += 2.0
    np.divide(r - g, c, out=h, where=b_max)
    h[b_max] += 4.0
    return h * 60.0, s, v


def hsv_frame_delta(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute per-pixel difference across H, S, V.

    Hue distance is circular, min(|dh|, 360-|dh|), rescaled so its 0–180
    range maps onto 0–255 and all three channels share units.
    """
    if a.shape != b.shape:
        raise InputError(f"frame dimensions differ: {a.shape} vs {b.shape}")
    ha, sa, va = hsv_channels(a)
    hb, sb, vb = hsv_channels(b)
    dh = np.abs(ha - hb)
    dh = np.minimum(dh, 360.0 - dh) * (255.0 / 180.0)
    return float((dh + np.abs(sa - sb) + np.abs(va - vb)).mean() / 3.0)


def grayscale(image: np.ndarray) -> np.ndarray:
    rgb = image.astype(np.float64)
    return 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]


def ncc(a: np.ndarray, b: np.ndarray) -> float:
    """Normalized cross-correlation of two frames on grayscale, in [-1, 1].

    Flat (zero-variance) frames make the correlation undefined; for those we
    fall back to 1 - |mean difference|/255 so identical slides still score
    1.0 and distinct solid slides score low.
    """
    if a.shape != b.shape:
        raise InputError(f"frame dimensions differ: {a.shape} vs {b.shape}")
    ga = grayscale(a)
    gb = grayscale(b)
    # flatness must be detected exactly (peak-to-peak), not via the centered
    # norm: for constant frames the mean subtraction leaves correlated
    # rounding noise that would masquerade as perfect correlation
    if np.ptp(ga) == 0 or np.ptp(gb) == 0:
        return 1.0 - abs(float(ga.mean() - gb.mean())) / 255.0
    da = ga - ga.mean()
    db = gb - gb.mean()
    norm = np.sqrt((da * da).sum() * (db * db).sum())
    if norm == 0:
        return 1.0 - abs(float(ga.mean() - gb.mean())) / 255.0
    return float((da * db).sum() / norm)


def _emit(boundaries: list[float], t: float, min_gap: float) -> bool:
    return not boundaries or t - boundaries[-1] >= min_gap


def segment_by_hsv(frames, cfg: SegmenterConfig) -> list[float]:
    """Boundary wherever the HSV delta between adjacent frames exceeds the
    threshold, subject to the minimum-gap rule between emitted boundaries."""
    boundaries: list[float] = []
    for prev, cur in zip(frames, frames[1:]):
        delta = hsv_frame_delta(prev.image, cur.image)
        if delta > cfg.threshold and _emit(boundaries, cur.timestamp_s, cfg.min_segment_s):
            boundaries.append(cur.timestamp_s)
    return boundaries


def segment_by_template(frames, cfg: SegmenterConfig) -> list[float]:
    """Boundary wherever similarity to the current key frame drops below the
    threshold; the detected frame becomes the new key frame, so slow fades
    accumulate against a stable reference."""
    frames = list(frames)
    if len(frames) < 2:
        return []
    boundaries: list[float] = []
    key = frames[0].image
    for cur in frames[1:]:
        similarity = ncc(key, cur.image)
        if similarity < cfg.threshold and _emit(boundaries, cur.timestamp_s, cfg.min_segment_s):
            boundaries.append(cur.timestamp_s)
            key = cur.image
    return boundaries


# ---------------------------------------------------------------------------
# boundaries -> segments

def boundaries_to_segments(
    boundaries,
    duration_s: float,
    lines=(),
    id_prefix: str = "seg",
) -> list[VideoSegment]:
    """Cut [0, duration] at the given times into a disjoint segment partition.

    Boundaries at exactly 0 or the duration are redundant and dropped; ones
    outside the video raise :class:`InputError`. Each segment covers the
    transcript lines whose midpoints fall inside it (the last segment is
    closed on the right).
    """
    cleaned = []
    for b in sorted(set(boundaries)):
        if b < 0 or b > duration_s:
            raise InputError(f"boundary {b} outside [0, {duration_s}]")
        if b != 0 and b != duration_s:
            cleaned.append(b)
    edges = [0.0, *cleaned, float(duration_s)]
    if duration_s <= 0:
        raise InputError("duration must be positive")

    segments = []
    for i, (start, end) in enumerate(zip(edges, edges[1:])):
        covered = [
            ln.index for ln in lines
            if _inside(0.5 * (ln.start_s + ln.end_s), start, end, end == duration_s)
        ]
        segments.append(VideoSegment(
            id=f"{id_prefix}{i:03d}", start_s=start, end_s=end,
            line_indices=tuple(covered),
        ))
    return segments


def _inside(t: float, start: float, end: float, closed_right: bool) -> bool:
    return start <= t < end or (closed_right and t == end)
