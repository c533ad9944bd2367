#!/usr/bin/env python3
"""Compare the three boundary proposers on inputs with known answers: a
synthetic slide video with planted cuts for the two visual detectors, and
the bundled transcript for the punctuation rule."""

from pathlib import Path

from papeo.evaluation import EvalConfig, boundary_prf
from papeo.ingest import parse_transcript
from papeo.segmentation import (SegmenterConfig, boundaries_to_segments,
                                segment_by_hsv, segment_by_punctuation,
                                segment_by_template)
from papeo.synth import make_slide_deck

SAMPLE = Path(__file__).resolve().parent.parent / "data" / "sample"

cuts = [5.0, 12.5, 21.0, 28.5]
frames = make_slide_deck(cuts, duration_s=36.0, fps=2.0, style="solid", seed=1)
print(f"synthetic slide video: {len(frames)} frames, cuts at {cuts}")

for name, detect, cfg in [
    ("hsv change", segment_by_hsv, SegmenterConfig(threshold=20.0)),
    ("hsv change, min 10 s", segment_by_hsv,
     SegmenterConfig(threshold=20.0, min_segment_s=10.0)),
    ("template match", segment_by_template, SegmenterConfig(threshold=0.9)),
]:
    got = detect(frames, cfg)
    prf = boundary_prf(got, cuts, EvalConfig(tolerance_s=3.0))
    print(f"  {name:22s} -> {got}  "
          f"P={prf['precision']:.2f} R={prf['recall']:.2f} F3={prf['f3']:.2f}")

lines = parse_transcript((SAMPLE / "talk.vtt").read_bytes(), "vtt")
boundaries = segment_by_punctuation(lines)
print(f"\npunctuation boundaries on the fixture talk ({len(boundaries)}):")
print(f"  {[round(b, 1) for b in boundaries]}")

segments = boundaries_to_segments(boundaries, duration_s=62.0, lines=lines)
print(f"\nas a segment partition ({len(segments)} segments):")
for s in segments[:5]:
    print(f"  {s.id}: [{s.start_s:5.1f}, {s.end_s:5.1f}) lines {s.line_indices}")
print("  ...")
