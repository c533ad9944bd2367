"""Seeded synthetic fixtures: slide videos, papers, and fully linked papeos.

Real paper/talk ground truth is expensive to author, so tests and demos run
the metric protocols on synthetic analogues with known answers: slide decks
with planted cut times, and paper/talk pairs whose links respect reading
order with controllable noise and deliberately confusable recap passages.
"""

from __future__ import annotations

import random

import numpy as np

from .frames import FrameRecord
from .model import (BBox, PapeoDoc, PaperDocument, Passage, PassageLink,
                    SyncHighlight, TranscriptLine, VideoMeta, VideoSegment)

__all__ = [
    "make_slide_deck",
    "make_transcript",
    "make_paper",
    "make_linked_corpus",
    "make_table_shaped_doc",
]

SOLID_COLORS = [
    (230, 60, 40), (40, 90, 230), (60, 200, 80), (240, 200, 50),
    (160, 60, 210), (40, 210, 220), (235, 130, 40), (120, 120, 120),
]
SOLID_GRAYS = [40, 200, 90, 230, 60, 170, 110, 250]


def make_slide_deck(
    cut_times_s,
    duration_s: float,
    fps: float = 2.0,
    size: tuple[int, int] = (36, 48),
    style: str = "solid",
    seed: int = 0,
) -> list[FrameRecord]:
    """Frames of a slide video with hard cuts at the given times.

    ``style="solid"`` colors each slide with a distinct hue (and distinct
    gray level, so both detectors see the cuts); ``style="textured"`` fills
    each slide with its own fixed random raster, giving frames non-zero
    variance for correlation tests.
    """
    h, w = size
    rng = np.random.default_rng(seed)
    cuts = sorted(cut_times_s)
    slides = []
    for i in range(len(cuts) + 1):
        if style == "textured":
            slides.append(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))
        else:
            r, g, b = SOLID_COLORS[i % len(SOLID_COLORS)]
            gray = SOLID_GRAYS[i % len(SOLID_GRAYS)]
            img = np.zeros((h, w, 3), dtype=np.uint8)
            img[..., 0], img[..., 1], img[..., 2] = r, g, b
            # a thin bar pins the grayscale mean per slide so flat-frame
            # correlation separates slides too
            img[0, :, :] = gray
            slides.append(img)

    frames = []
    n = int(round(duration_s * fps)) + 1
    for k in range(n):
        t = k / fps
        if t > duration_s:
            break
        slide = sum(1 for c in cuts if t >= c)
        frames.append(FrameRecord(timestamp_s=t, image=slides[slide]))
    return frames


def make_transcript(texts, line_s: float = 2.0, start_s: float = 0.0) -> list[TranscriptLine]:
    """Evenly timed transcript lines from a list of strings."""
    return [
        TranscriptLine(index=i, start_s=start_s + i * line_s,
                       end_s=start_s + (i + 1) * line_s, text=t)
        for i, t in enumerate(texts)
    ]


def _words(rng: random.Random, tag: str, n: int) -> list[str]:
    return [f"{tag}{rng.randrange(10 ** 6):06d}" for _ in range(n)]


def make_paper(
    seed: int = 0,
    n_sections: int = 4,
    paragraphs_per_section: int = 3,
    words_per_paragraph: int = 10,
    recap_pairs: int = 2,
) -> PaperDocument:
    """A paper of distinct-vocabulary paragraphs, one section per page.

    ``recap_pairs`` late paragraphs restate an early paragraph verbatim
    (think intro summary repeated in the conclusion): lexically identical
    passages that only document order can tell apart.
    """
    rng = random.Random(seed)
    passages = []
    for s in range(n_sections):
        section = (f"{s + 1} Section {s + 1}",)
        passages.append(Passage(
            id=f"h{s}", kind="heading", section_path=section, page=s + 1,
            bbox=BBox(72, 60, 450, 14), text=f"Section {s + 1}",
        ))
        for p in range(paragraphs_per_section):
            text = " ".join(_words(rng, f"w{s}{p}x", words_per_paragraph))
            passages.append(Passage(
                id=f"p{s}_{p}", kind="paragraph", section_path=section,
                page=s + 1, bbox=BBox(72, 90 + 60 * p, 450, 50), text=text,
            ))
    paragraphs = [p for p in passages if p.kind == "paragraph"]
    for k in range(min(recap_pairs, len(paragraphs) // 2)):
        early = paragraphs[k]
        late = paragraphs[-(k + 1)]
        at = passages.index(late)
        passages[at] = Passage(
            id=late.id, kind="paragraph", section_path=late.section_path,
            page=late.page, bbox=late.bbox, text=early.text,
        )
    return PaperDocument(
        paper_id=f"synth-{seed}", title=f"Synthetic paper {seed}",
        passages=tuple(passages), source="synthetic",
    )


def make_linked_corpus(
    seed: int = 0,
    n_sections: int = 4,
    paragraphs_per_section: int = 3,
    segment_s: float = 20.0,
    lines_per_segment: int = 2,
    order_noise: float = 0.1,
    recap_pairs: int = 2,
) -> PapeoDoc:
    """A ground-truth papeo whose links walk the paper in reading order.

    Each paragraph gets one segment whose spoken lines quote a sample of the
    paragraph's words plus filler; with probability ``order_noise`` adjacent
    stops of the walk are swapped, so the order signal is strong but not
    perfect. Recap paragraphs (see :func:`make_paper`) are the adversarial
    part: text alone cannot distinguish them from their originals.
    """
    rng = random.Random(seed)
    paper = make_paper(seed, n_sections, paragraphs_per_section,
                       recap_pairs=recap_pairs)
    paragraph_ids = [p.id for p in paper.passages if p.kind == "paragraph"]
    walk = list(paragraph_ids)
    for i in range(len(walk) - 1):
        if rng.random() < order_noise:
            walk[i], walk[i + 1] = walk[i + 1], walk[i]

    text_of = {p.id: p.text for p in paper.passages}
    filler = ["so", "here", "we", "see", "that", "basically"]
    # shared edge list keeps adjacent segments exactly abutting (and on the
    # millisecond grid, so documents serialize loss-free)
    edges = [round(i * segment_s, 3) for i in range(len(walk) + 1)]
    lines: list[str] = []
    segments: list[VideoSegment] = []
    links: list[PassageLink] = []
    for si, pid in enumerate(walk):
        words = text_of[pid].split()
        spoken = rng.sample(words, min(6, len(words))) + rng.sample(filler, 2)
        rng.shuffle(spoken)
        per_line = max(1, len(spoken) // lines_per_segment)
        first_line = len(lines)
        for j in range(0, len(spoken), per_line):
            lines.append(" ".join(spoken[j:j + per_line]) + ".")
        segments.append(VideoSegment(
            id=f"seg{si:03d}", start_s=edges[si], end_s=edges[si + 1],
            line_indices=tuple(range(first_line, len(lines))),
        ))
        links.append(PassageLink(segment_id=f"seg{si:03d}", passage_ids=(pid,)))

    duration = edges[-1]
    line_s = duration / max(1, len(lines))
    transcript = make_transcript(lines, line_s=line_s)
    # line windows must sit inside their segment for segment_text lookups
    transcript = [
        TranscriptLine(index=ln.index, start_s=round(ln.start_s, 3),
                       end_s=round(ln.end_s, 3), text=ln.text)
        for ln in transcript
    ]
    return PapeoDoc(
        paper=paper,
        video=VideoMeta(uri=f"synth://talk-{seed}", duration_s=duration),
        transcript=tuple(transcript),
        segments=tuple(segments),
        links=tuple(links),
    )


def make_table_shaped_doc(
    seed: int = 0,
    num_links: int = 20,
    avg_passages_per_link: float = 3.2,
    segment_len_s: float = 24.3,
    num_sync_highlights: int = 3,
) -> PapeoDoc:
    """A papeo matching the characteristic shape of real authored ones
    (around twenty links, three-ish passages each, ~24 s segments)."""
    rng = random.Random(seed)
    total_passages = max(num_links, round(num_links * avg_passages_per_link))
    corpus = make_linked_corpus(seed, n_sections=4,
                                paragraphs_per_section=(total_passages + 3) // 4,
                                segment_s=segment_len_s, recap_pairs=0)
    segments = corpus.segments[:num_links]
    paragraph_ids = [p.id for p in corpus.paper.passages if p.kind == "paragraph"]

    sizes = [int(avg_passages_per_link)] * num_links
    deficit = round(num_links * avg_passages_per_link) - sum(sizes)
    for i in rng.sample(range(num_links), deficit):
        sizes[i] += 1
    links = []
    cursor = 0
    for seg, size in zip(segments, sizes):
        group = [paragraph_ids[(cursor + j) % len(paragraph_ids)] for j in range(size)]
        cursor += size
        links.append(PassageLink(segment_id=seg.id, passage_ids=tuple(group)))

    highlights = []
    for k in range(num_sync_highlights):
        link = links[k % len(links)]
        seg = next(s for s in segments if s.id == link.segment_id)
        line_index = seg.line_indices[0]
        highlights.append(SyncHighlight(
            id=f"hl{k}", segment_id=link.segment_id,
            passage_id=link.passage_ids[0],
            transcript_span=(line_index, 0, 1), passage_span=(0, 2),
        ))
    return PapeoDoc(
        paper=corpus.paper, video=corpus.video, transcript=corpus.transcript,
        segments=segments, links=tuple(links), sync_highlights=tuple(highlights),
    )
