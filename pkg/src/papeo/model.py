"""Papeo data model and the ``papeo.json`` interchange document.

A papeo bundles a parsed paper, a talk-video transcript, the video segments
an author carved out, segment-to-passage links, and fine-grained
synchronized highlights. All types are immutable value objects; mutation
happens by building a new document (``dataclasses.replace``).

On disk, ``papeo.json`` is UTF-8 JSON with every time encoded as integer
milliseconds (field names carry a ``_ms`` suffix); in memory times are float
seconds. Documents round-trip exactly when in-memory times sit on the
millisecond grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .errors import Invalid, ParseError, VersionError
from .textutil import ws_tokens

__all__ = [
    "SCHEMA_VERSION",
    "PASSAGE_KINDS",
    "BBox",
    "Passage",
    "PaperDocument",
    "TranscriptLine",
    "VideoSegment",
    "PassageLink",
    "SyncHighlight",
    "VideoMeta",
    "PapeoDoc",
    "Violation",
    "validate",
    "serialize",
    "deserialize",
    "papeo_stats",
]

SCHEMA_VERSION = "1"

PASSAGE_KINDS = ("paragraph", "figure", "table", "caption", "heading")


def _ms(seconds: float) -> int:
    return round(seconds * 1000)


def _s(ms: int) -> float:
    return ms / 1000.0


@dataclass(frozen=True)
class BBox:
    """Rectangle in PDF points."""

    x: float
    y: float
    w: float
    h: float


@dataclass(frozen=True)
class Passage:
    """An atomic layout unit of the paper (paragraph, figure, table, ...)."""

    id: str
    kind: str
    section_path: tuple[str, ...]
    page: int
    bbox: BBox
    text: str = ""

    def __post_init__(self):
        object.__setattr__(self, "section_path", tuple(self.section_path))


@dataclass(frozen=True)
class PaperDocument:
    paper_id: str
    title: str
    passages: tuple[Passage, ...]
    source: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passages", tuple(self.passages))


@dataclass(frozen=True)
class TranscriptLine:
    """One timestamped spoken line. Indices are 0-based and contiguous."""

    index: int
    start_s: float
    end_s: float
    text: str


@dataclass(frozen=True)
class VideoSegment:
    """A contiguous time interval of the talk video."""

    id: str
    start_s: float
    end_s: float
    line_indices: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "line_indices", tuple(self.line_indices))


@dataclass(frozen=True)
class PassageLink:
    """Links one segment to an ordered, non-empty group of passages."""

    segment_id: str
    passage_ids: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "passage_ids", tuple(self.passage_ids))


@dataclass(frozen=True)
class SyncHighlight:
    """Word/phrase-level link between transcript and passage text.

    Spans are half-open ``[token_start, token_end)`` over whitespace tokens
    (after NFC normalization). ``transcript_span`` additionally names the
    transcript line the tokens belong to.
    """

    id: str
    segment_id: str
    passage_id: str
    transcript_span: tuple[int, int, int]  # (line_index, token_start, token_end)
    passage_span: tuple[int, int]  # (token_start, token_end)

    def __post_init__(self):
        object.__setattr__(self, "transcript_span", tuple(self.transcript_span))
        object.__setattr__(self, "passage_span", tuple(self.passage_span))


@dataclass(frozen=True)
class VideoMeta:
    uri: str
    duration_s: float
    frame_rate: Optional[float] = None


@dataclass(frozen=True)
class PapeoDoc:
    """The full linkage graph, serializable as ``papeo.json``."""

    paper: PaperDocument
    video: VideoMeta
    transcript: tuple[TranscriptLine, ...] = ()
    segments: tuple[VideoSegment, ...] = ()
    links: tuple[PassageLink, ...] = ()
    sync_highlights: tuple[SyncHighlight, ...] = ()
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self):
        object.__setattr__(self, "transcript", tuple(self.transcript))
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "sync_highlights", tuple(self.sync_highlights))

    def passage_by_id(self, pid: str) -> Optional[Passage]:
        return next((p for p in self.paper.passages if p.id == pid), None)

    def segment_by_id(self, sid: str) -> Optional[VideoSegment]:
        return next((s for s in self.segments if s.id == sid), None)

    def link_for_segment(self, sid: str) -> Optional[PassageLink]:
        return next((l for l in self.links if l.segment_id == sid), None)

    def segment_text(self, segment: VideoSegment) -> str:
        lines = {ln.index: ln.text for ln in self.transcript}
        return " ".join(lines[i] for i in segment.line_indices if i in lines)


@dataclass(frozen=True)
class Violation:
    """One broken invariant: which type, which object, which rule."""

    type: str
    id: str
    rule: str
    detail: str = ""


# ---------------------------------------------------------------------------
# validation

def validate(doc: PapeoDoc) -> list[Violation]:
    """Check every document invariant; returns an empty list iff valid.

    Pure and total: violations are data, not errors, and arbitrary field
    values never raise.
    """
    out: list[Violation] = []
    v = out.append

    seen_pids: set[str] = set()
    for p in doc.paper.passages:
        if p.id in seen_pids:
            v(Violation("Passage", p.id, "passage-id-unique"))
        seen_pids.add(p.id)
        if p.kind not in PASSAGE_KINDS:
            v(Violation("Passage", p.id, "passage-kind", f"unknown kind {p.kind!r}"))
        if p.page < 1:
            v(Violation("Passage", p.id, "page-positive", f"page={p.page}"))
        if p.bbox.w < 0 or p.bbox.h < 0:
            v(Violation("Passage", p.id, "bbox-nonnegative"))
        if p.kind == "paragraph" and not p.text.strip():
            v(Violation("Passage", p.id, "paragraph-nonempty-text"))
    if not doc.paper.passages:
        v(Violation("PaperDocument", doc.paper.paper_id, "paper-nonempty"))
    pages = [p.page for p in doc.paper.passages]
    if any(a > b for a, b in zip(pages, pages[1:])):
        v(Violation("PaperDocument", doc.paper.paper_id, "passages-page-order"))

    prev_line = None
    for ln in doc.transcript:
        if not ln.start_s < ln.end_s:
            v(Violation("TranscriptLine", str(ln.index), "line-start-before-end"))
        if ln.start_s < 0:
            v(Violation("TranscriptLine", str(ln.index), "line-start-nonnegative"))
        if prev_line is not None and ln.start_s < prev_line.start_s:
            v(Violation("TranscriptLine", str(ln.index), "lines-sorted"))
        prev_line = ln
    if [ln.index for ln in doc.transcript] != list(range(len(doc.transcript))):
        v(Violation("Transcript", "", "line-indices-contiguous"))

    line_count = len(doc.transcript)
    seen_sids: set[str] = set()
    for s in doc.segments:
        if s.id in seen_sids:
            v(Violation("VideoSegment", s.id, "segment-id-unique"))
        seen_sids.add(s.id)
        if not s.start_s < s.end_s:
            v(Violation("VideoSegment", s.id, "segment-start-before-end"))
        if s.end_s > doc.video.duration_s:
            v(Violation("VideoSegment", s.id, "segment-within-duration"))
        idx = list(s.line_indices)
        if idx != sorted(idx) or (idx and idx != list(range(idx[0], idx[-1] + 1))):
            v(Violation("VideoSegment", s.id, "segment-lines-contiguous"))
        if any(i < 0 or i >= line_count for i in idx):
            v(Violation("VideoSegment", s.id, "segment-lines-in-range"))
    ordered = sorted(doc.segments, key=lambda s: (s.start_s, s.end_s))
    if list(doc.segments) != ordered:
        v(Violation("PapeoDoc", "", "segments-sorted"))
    for a, b in zip(ordered, ordered[1:]):
        if b.start_s < a.end_s:
            v(Violation("VideoSegment", b.id, "segment-overlap", f"overlaps {a.id}"))

    linked_segments: set[str] = set()
    for l in doc.links:
        if l.segment_id in linked_segments:
            v(Violation("PassageLink", l.segment_id, "one-link-per-segment"))
        linked_segments.add(l.segment_id)
        if l.segment_id not in seen_sids:
            v(Violation("PassageLink", l.segment_id, "dangling-reference",
                        f"unknown segment {l.segment_id!r}"))
        if not l.passage_ids:
            v(Violation("PassageLink", l.segment_id, "link-nonempty"))
        for pid in l.passage_ids:
            if pid not in seen_pids:
                v(Violation("PassageLink", l.segment_id, "dangling-reference",
                            f"unknown passage {pid!r}"))

    links_by_segment = {l.segment_id: l for l in doc.links}
    lines_by_index = {ln.index: ln for ln in doc.transcript}
    seen_hids: set[str] = set()
    for h in doc.sync_highlights:
        if h.id in seen_hids:
            v(Violation("SyncHighlight", h.id, "highlight-id-unique"))
        seen_hids.add(h.id)
        link = links_by_segment.get(h.segment_id)
        if link is None or h.passage_id not in link.passage_ids:
            v(Violation("SyncHighlight", h.id, "highlight-requires-link"))
        line_index, t0, t1 = h.transcript_span
        line = lines_by_index.get(line_index)
        if line is None:
            v(Violation("SyncHighlight", h.id, "highlight-line-in-range"))
        elif not (0 <= t0 < t1 <= len(ws_tokens(line.text))):
            v(Violation("SyncHighlight", h.id, "highlight-transcript-span"))
        p0, p1 = h.passage_span
        passage = doc.passage_by_id(h.passage_id)
        if passage is None:
            v(Violation("SyncHighlight", h.id, "dangling-reference",
                        f"unknown passage {h.passage_id!r}"))
        elif not (0 <= p0 < p1 <= len(ws_tokens(passage.text))):
            v(Violation("SyncHighlight", h.id, "highlight-passage-span"))

    return out


# ---------------------------------------------------------------------------
# serialization

def _passage_dict(p: Passage) -> dict:
    return {
        "id": p.id,
        "kind": p.kind,
        "section_path": list(p.section_path),
        "page": p.page,
        "bbox": {"x": p.bbox.x, "y": p.bbox.y, "w": p.bbox.w, "h": p.bbox.h},
        "text": p.text,
    }


def to_dict(doc: PapeoDoc) -> dict:
    """JSON-ready form of the document (times as integer milliseconds)."""
    return {
        "schema_version": doc.schema_version,
        "paper": {
            "paper_id": doc.paper.paper_id,
            "title": doc.paper.title,
            "source": doc.paper.source,
            "passages": [_passage_dict(p) for p in doc.paper.passages],
        },
        "video": {
            "uri": doc.video.uri,
            "duration_ms": _ms(doc.video.duration_s),
            "frame_rate": doc.video.frame_rate,
        },
        "transcript": [
            {"index": ln.index, "start_ms": _ms(ln.start_s),
             "end_ms": _ms(ln.end_s), "text": ln.text}
            for ln in doc.transcript
        ],
        "segments": [
            {"id": s.id, "start_ms": _ms(s.start_s), "end_ms": _ms(s.end_s),
             "line_indices": list(s.line_indices)}
            for s in doc.segments
        ],
        "links": [
            {"segment_id": l.segment_id, "passage_ids": list(l.passage_ids)}
            for l in doc.links
        ],
        "sync_highlights": [
            {"id": h.id, "segment_id": h.segment_id, "passage_id": h.passage_id,
             "transcript_span": list(h.transcript_span),
             "passage_span": list(h.passage_span)}
            for h in doc.sync_highlights
        ],
    }


class _Reader:
    """Dict walker that raises ParseError naming the missing/bad field."""

    def __init__(self, data, path="$"):
        self.data = data
        self.path = path

    def get(self, key, cls=None):
        if not isinstance(self.data, dict) or key not in self.data:
            raise ParseError(f"missing field {self.path}.{key}")
        value = self.data[key]
        if cls is not None and not isinstance(value, cls):
            raise ParseError(f"bad type at {self.path}.{key}")
        return value

    def sub(self, key):
        return _Reader(self.get(key, dict), f"{self.path}.{key}")

    def items(self, key):
        seq = self.get(key, list)
        return [_Reader(v, f"{self.path}.{key}[{i}]") for i, v in enumerate(seq)]


def from_dict(data: dict) -> PapeoDoc:
    root = _Reader(data)
    version = root.get("schema_version")
    if version != SCHEMA_VERSION:
        raise VersionError(f"unsupported schema_version {version!r}")
    paper_r = root.sub("paper")
    passages = []
    for r in paper_r.items("passages"):
        bbox = r.sub("bbox")
        passages.append(Passage(
            id=r.get("id"), kind=r.get("kind"),
            section_path=tuple(r.get("section_path", list)),
            page=r.get("page"),
            bbox=BBox(bbox.get("x"), bbox.get("y"), bbox.get("w"), bbox.get("h")),
            text=r.get("text"),
        ))
    paper = PaperDocument(
        paper_id=paper_r.get("paper_id"), title=paper_r.get("title"),
        passages=tuple(passages), source=paper_r.get("source"),
    )
    video_r = root.sub("video")
    video = VideoMeta(
        uri=video_r.get("uri"),
        duration_s=_s(video_r.get("duration_ms")),
        frame_rate=video_r.data.get("frame_rate"),
    )
    transcript = tuple(
        TranscriptLine(index=r.get("index"), start_s=_s(r.get("start_ms")),
                       end_s=_s(r.get("end_ms")), text=r.get("text"))
        for r in root.items("transcript")
    )
    segments = tuple(
        VideoSegment(id=r.get("id"), start_s=_s(r.get("start_ms")),
                     end_s=_s(r.get("end_ms")),
                     line_indices=tuple(r.get("line_indices", list)))
        for r in root.items("segments")
    )
    links = tuple(
        PassageLink(segment_id=r.get("segment_id"),
                    passage_ids=tuple(r.get("passage_ids", list)))
        for r in root.items("links")
    )
    highlights = tuple(
        SyncHighlight(id=r.get("id"), segment_id=r.get("segment_id"),
                      passage_id=r.get("passage_id"),
                      transcript_span=tuple(r.get("transcript_span", list)),
                      passage_span=tuple(r.get("passage_span", list)))
        for r in root.items("sync_highlights")
    )
    return PapeoDoc(paper=paper, video=video, transcript=transcript,
                    segments=segments, links=links, sync_highlights=highlights,
                    schema_version=version)


def serialize(doc: PapeoDoc) -> bytes:
    """Encode a *valid* document as canonical ``papeo.json`` bytes.

    Raises :class:`Invalid` when the document has violations; emission is
    deterministic, so equal documents serialize to equal bytes.
    """
    violations = validate(doc)
    if violations:
        raise Invalid(f"document has {len(violations)} violation(s)", violations)
    return (json.dumps(to_dict(doc), ensure_ascii=False, indent=2) + "\n").encode("utf-8")


def deserialize(data: bytes) -> PapeoDoc:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"not UTF-8: {e.reason}", offset=e.start) from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"malformed JSON: {e.msg}", offset=e.pos) from e
    return from_dict(obj)


# ---------------------------------------------------------------------------
# document statistics

def papeo_stats(doc: PapeoDoc) -> dict:
    """Characteristic counts of one papeo.

    Averages are arithmetic means over *linked* segments; with no links they
    are undefined and reported as ``None``.
    """
    num_links = len(doc.links)
    num_highlights = len(doc.sync_highlights)
    if num_links == 0:
        return {
            "num_links": 0,
            "avg_passages_per_link": None,
            "avg_segment_len_s": None,
            "num_sync_highlights": num_highlights,
        }
    segments = {s.id: s for s in doc.segments}
    lengths = [
        segments[l.segment_id].end_s - segments[l.segment_id].start_s
        for l in doc.links if l.segment_id in segments
    ]
    return {
        "num_links": num_links,
        "avg_passages_per_link": sum(len(l.passage_ids) for l in doc.links) / num_links,
        "avg_segment_len_s": sum(lengths) / len(lengths) if lengths else None,
        "num_sync_highlights": num_highlights,
    }


# ---------------------------------------------------------------------------
# functional document updates (used by the store and the CLI)

def with_segment(doc: PapeoDoc, segment: VideoSegment) -> PapeoDoc:
    """Upsert one segment, keeping the timeline sorted by start time."""
    rest = [s for s in doc.segments if s.id != segment.id]
    rest.append(segment)
    rest.sort(key=lambda s: (s.start_s, s.end_s))
    return replace(doc, segments=tuple(rest))


def without_segment(doc: PapeoDoc, segment_id: str) -> PapeoDoc:
    """Drop a segment and, cascading, its link and sync highlights."""
    return replace(
        doc,
        segments=tuple(s for s in doc.segments if s.id != segment_id),
        links=tuple(l for l in doc.links if l.segment_id != segment_id),
        sync_highlights=tuple(h for h in doc.sync_highlights
                              if h.segment_id != segment_id),
    )


def with_link(doc: PapeoDoc, segment_id: str, passage_ids: Iterable[str]) -> PapeoDoc:
    rest = [l for l in doc.links if l.segment_id != segment_id]
    rest.append(PassageLink(segment_id=segment_id, passage_ids=tuple(passage_ids)))
    return replace(doc, links=tuple(rest))


def without_link(doc: PapeoDoc, segment_id: str) -> PapeoDoc:
    """Drop a segment's link and, cascading, its sync highlights."""
    return replace(
        doc,
        links=tuple(l for l in doc.links if l.segment_id != segment_id),
        sync_highlights=tuple(h for h in doc.sync_highlights
                              if h.segment_id != segment_id),
    )


def with_highlight(doc: PapeoDoc, highlight: SyncHighlight) -> PapeoDoc:
    return replace(doc, sync_highlights=doc.sync_highlights + (highlight,))


def without_highlight(doc: PapeoDoc, highlight_id: str) -> PapeoDoc:
    return replace(doc, sync_highlights=tuple(
        h for h in doc.sync_highlights if h.id != highlight_id))
