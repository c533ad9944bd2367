"""Video frames arrive as image dumps plus a JSON-lines manifest.

Each manifest row is ``{"timestamp_ms": int, "path": "frames/0001.png"}``
with paths resolved against the manifest's directory; images may be PPM (P6)
or PNG. Decoding containers is out of scope — frame extraction happens
upstream (ffmpeg or similar).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import InputError, ParseError

__all__ = ["FrameRecord", "read_frame_image", "load_frames_manifest", "write_frames_manifest"]


@dataclass(frozen=True)
class FrameRecord:
    """One sampled video frame: timestamp plus an (H, W, 3) uint8 raster."""

    timestamp_s: float
    image: np.ndarray

    def __post_init__(self):
        img = np.asarray(self.image)
        if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
            raise InputError("frame image must be (H, W, 3) uint8 RGB")
        object.__setattr__(self, "image", img)


def read_frame_image(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def load_frames_manifest(path: str | Path) -> list[FrameRecord]:
    path = Path(path)
    base = path.parent
    records: list[FrameRecord] = []
    last_ts = None
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            row = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ParseError(f"frames manifest line {lineno}: {e.msg}") from e
        if "timestamp_ms" not in row or "path" not in row:
            raise ParseError(f"frames manifest line {lineno}: needs timestamp_ms and path")
        ts = row["timestamp_ms"] / 1000.0
        if last_ts is not None and ts <= last_ts:
            raise InputError(f"frames manifest line {lineno}: timestamps must strictly increase")
        last_ts = ts
        image = read_frame_image(base / row["path"])
        records.append(FrameRecord(timestamp_s=ts, image=image))
    if records:
        shape = records[0].image.shape
        for r in records:
            if r.image.shape != shape:
                raise InputError("all frames in a manifest must share dimensions")
    return records


def write_frames_manifest(directory: str | Path, frames) -> Path:
    """Dump frames as PPM files plus a manifest; returns the manifest path.

    Convenience for fixtures and demos, the inverse of
    :func:`load_frames_manifest`.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, fr in enumerate(frames):
        name = f"frame_{i:05d}.ppm"
        Image.fromarray(fr.image, mode="RGB").save(directory / name)
        rows.append(json.dumps({"timestamp_ms": round(fr.timestamp_s * 1000), "path": name}))
    manifest = directory / "frames.jsonl"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return manifest
