#!/usr/bin/env python3
"""Build a papeo.json by hand: parse the bundled paper layout and talk
transcript, group the transcript into sentences, carve a couple of segments,
link them to passages, and round-trip the result."""

from pathlib import Path

from papeo.ingest import group_sentences, parse_layout, parse_transcript
from papeo.model import (PapeoDoc, PassageLink, VideoMeta, VideoSegment,
                         deserialize, papeo_stats, serialize, validate)

SAMPLE = Path(__file__).resolve().parent.parent / "data" / "sample"

paper = parse_layout((SAMPLE / "layout.json").read_bytes())
print(f"paper: {paper.title!r}")
print(f"  {len(paper.passages)} passages over "
      f"{max(p.page for p in paper.passages)} pages")

lines = parse_transcript((SAMPLE / "talk.vtt").read_bytes(), "vtt")
print(f"transcript: {len(lines)} lines, "
      f"{lines[-1].end_s - lines[0].start_s:.0f} s of speech")

groups = group_sentences(lines)
print(f"\nsentence groups ({len(groups)}):")
for g in groups[:4]:
    print(f"  lines {g.line_indices}: {g.text[:60]}...")

# a segment per sentence group makes a fine starting point; here we keep two
seg_a = VideoSegment(id="intro", start_s=lines[0].start_s, end_s=lines[2].end_s,
                     line_indices=(0, 1, 2))
seg_b = VideoSegment(id="design", start_s=lines[5].start_s, end_s=lines[7].end_s,
                     line_indices=(5, 6, 7))

doc = PapeoDoc(
    paper=paper,
    video=VideoMeta(uri="media/talk.mp4", duration_s=62.0),
    transcript=tuple(lines),
    segments=(seg_a, seg_b),
    links=(
        PassageLink(segment_id="intro", passage_ids=("p-intro-1",)),
        PassageLink(segment_id="design", passage_ids=("p-design-1", "fig-pipeline")),
    ),
)

violations = validate(doc)
print(f"\nviolations: {violations or 'none'}")

payload = serialize(doc)
print(f"papeo.json: {len(payload)} bytes")
assert deserialize(payload) == doc
print("round trip: exact")

print("\ndocument statistics:")
for key, value in papeo_stats(doc).items():
    print(f"  {key}: {value}")
