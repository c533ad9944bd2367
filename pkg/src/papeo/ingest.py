"""Transcript (SRT/WebVTT) and paper-layout ingestion.

The readers cover the timing-line + text-payload subset of both subtitle
formats: cue ids, NOTE/STYLE blocks, and cue settings are tolerated and
ignored, markup tags are stripped from the payload. Overlapping cues are
accepted (auto-captions overlap all the time) but reported with a
:class:`TranscriptOverlapWarning`.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass

from .errors import ParseError, SchemaError
from .model import BBox, PaperDocument, Passage, TranscriptLine, PASSAGE_KINDS

__all__ = [
    "TranscriptOverlapWarning",
    "SentenceGroup",
    "parse_transcript",
    "emit_transcript",
    "parse_layout",
    "layout_to_dict",
    "group_sentences",
    "TERMINAL_PUNCTUATION",
    "CLOSING_CHARS",
]


class TranscriptOverlapWarning(UserWarning):
    pass


_TIME = re.compile(
    r"(?:(\d{1,3}):)?(\d{1,2}):(\d{2})[.,](\d{3})"
)
_CUE_LINE = re.compile(
    r"^\s*((?:\d{1,3}:)?\d{1,2}:\d{2}[.,]\d{3})\s*-->\s*((?:\d{1,3}:)?\d{1,2}:\d{2}[.,]\d{3})"
)
_TAG = re.compile(r"<[^>]*>")


def _parse_time(text: str, cue: int) -> float:
    m = _TIME.fullmatch(text.strip())
    if m is None:
        raise ParseError(f"cue {cue}: malformed timestamp {text!r}", cue=cue)
    hours = int(m.group(1) or 0)
    total_ms = ((hours * 3600 + int(m.group(2)) * 60 + int(m.group(3))) * 1000
                + int(m.group(4)))
    return total_ms / 1000.0


def _format_time(seconds: float, sep: str) -> str:
    ms = round(seconds * 1000)
    h, rem = divmod(ms, 3600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d}{sep}{ms:03d}"


def parse_transcript(data: bytes | str, format: str = "vtt") -> list[TranscriptLine]:
    """Parse SRT or WebVTT bytes into sorted, re-indexed transcript lines.

    Markup tags are stripped; multi-line payloads are joined with spaces.
    Malformed timing lines raise :class:`ParseError` carrying the 1-based cue
    number.
    """
    if format not in ("srt", "vtt"):
        raise ParseError(f"unknown transcript format {format!r}")
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8-sig")
        except UnicodeDecodeError as e:
            raise ParseError(f"transcript is not UTF-8: {e.reason}", offset=e.start) from e
    else:
        text = data

    lines: list[tuple[float, float, str]] = []
    cue_no = 0
    for block in re.split(r"\n\s*\n", text.replace("\r\n", "\n").replace("\r", "\n")):
        rows = [r for r in block.split("\n") if r.strip()]
        if not rows:
            continue
        head = rows[0].strip()
        if head.startswith(("WEBVTT", "NOTE", "STYLE", "REGION")):
            continue
        timing_at = next((i for i, r in enumerate(rows) if "-->" in r), None)
        if timing_at is None:
            # SRT files may start with a bare counter block; anything without
            # a timing arrow is not a cue.
            continue
        cue_no += 1
        m = _CUE_LINE.match(rows[timing_at])
        if m is None:
            raise ParseError(
                f"cue {cue_no}: malformed timing line {rows[timing_at].strip()!r}",
                cue=cue_no,
            )
        start = _parse_time(m.group(1), cue_no)
        end = _parse_time(m.group(2), cue_no)
        if end <= start:
            raise ParseError(f"cue {cue_no}: end is not after start", cue=cue_no)
        payload = " ".join(r.strip() for r in rows[timing_at + 1:])
        lines.append((start, end, _TAG.sub("", payload)))

    lines.sort(key=lambda t: (t[0], t[1]))
    for (s0, e0, _), (s1, _, _) in zip(lines, lines[1:]):
        if s1 < e0:
            warnings.warn(
                f"overlapping cues around {s1:.3f}s", TranscriptOverlapWarning,
                stacklevel=2,
            )
            break
    return [
        TranscriptLine(index=i, start_s=s, end_s=e, text=t)
        for i, (s, e, t) in enumerate(lines)
    ]


def emit_transcript(lines, format: str = "vtt") -> str:
    """Inverse of :func:`parse_transcript` for tag-free lines."""
    if format == "vtt":
        blocks = [
            f"{_format_time(ln.start_s, '.')} --> {_format_time(ln.end_s, '.')}\n{ln.text}"
            for ln in lines
        ]
        return "WEBVTT\n\n" + "\n\n".join(blocks) + "\n"
    if format == "srt":
        blocks = [
            f"{i + 1}\n{_format_time(ln.start_s, ',')} --> {_format_time(ln.end_s, ',')}\n{ln.text}"
            for i, ln in enumerate(lines)
        ]
        return "\n\n".join(blocks) + "\n"
    raise ParseError(f"unknown transcript format {format!r}")


# ---------------------------------------------------------------------------
# paper layout JSON

def parse_layout(data: bytes | str) -> PaperDocument:
    """Parse layout-analysis JSON (see docs/layout-schema) into a PaperDocument.

    Reading order is preserved exactly as given. Missing fields and duplicate
    passage ids raise :class:`SchemaError` naming the offending path.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as e:
        raise SchemaError(f"layout is not valid JSON: {e.msg}", path="$") from e

    def need(d, key, path):
        if not isinstance(d, dict) or key not in d:
            raise SchemaError(f"missing required field {path}.{key}", path=f"{path}.{key}")
        return d[key]

    passages = []
    seen = set()
    for i, praw in enumerate(need(obj, "passages", "$")):
        path = f"$.passages[{i}]"
        pid = need(praw, "id", path)
        if pid in seen:
            raise SchemaError(f"duplicate passage id {pid!r}", path=f"{path}.id")
        seen.add(pid)
        kind = need(praw, "kind", path)
        if kind not in PASSAGE_KINDS:
            raise SchemaError(f"unknown passage kind {kind!r}", path=f"{path}.kind")
        braw = need(praw, "bbox", path)
        bbox = BBox(*(need(braw, k, f"{path}.bbox") for k in ("x", "y", "w", "h")))
        passages.append(Passage(
            id=pid, kind=kind,
            section_path=tuple(need(praw, "section_path", path)),
            page=need(praw, "page", path),
            bbox=bbox,
            text=praw.get("text", ""),
        ))
    return PaperDocument(
        paper_id=need(obj, "paper_id", "$"),
        title=need(obj, "title", "$"),
        passages=tuple(passages),
        source=obj.get("source", ""),
    )


def layout_to_dict(paper: PaperDocument) -> dict:
    return {
        "paper_id": paper.paper_id,
        "title": paper.title,
        "source": paper.source,
        "passages": [
            {
                "id": p.id, "kind": p.kind, "section_path": list(p.section_path),
                "page": p.page,
                "bbox": {"x": p.bbox.x, "y": p.bbox.y, "w": p.bbox.w, "h": p.bbox.h},
                "text": p.text,
            }
            for p in paper.passages
        ],
    }


# ---------------------------------------------------------------------------
# sentence grouping

TERMINAL_PUNCTUATION = ".!?"
CLOSING_CHARS = "\"')]}’”»"


@dataclass(frozen=True)
class SentenceGroup:
    """A contiguous run of transcript lines ending at a sentence boundary."""

    line_indices: tuple[int, ...]
    text: str


def ends_sentence(text: str, terminal: str = TERMINAL_PUNCTUATION) -> bool:
    stripped = text.rstrip().rstrip(CLOSING_CHARS)
    return bool(stripped) and stripped[-1] in terminal


def group_sentences(lines, terminal: str = TERMINAL_PUNCTUATION) -> list[SentenceGroup]:
    """Partition transcript lines into sentence-level groups.

    A group closes on each line whose text ends with terminal punctuation
    (closing quotes/brackets may follow it); a trailing group without
    terminal punctuation is kept as-is. Abbreviations are deliberately not
    special-cased: over-segmentation is cheap to correct downstream.
    """
    groups: list[SentenceGroup] = []
    current: list = []
    for ln in lines:
        current.append(ln)
        if ends_sentence(ln.text, terminal):
            groups.append(_close(current))
            current = []
    if current:
        groups.append(_close(current))
    return groups


def _close(lines) -> SentenceGroup:
    return SentenceGroup(
        line_indices=tuple(ln.index for ln in lines),
        text=" ".join(ln.text for ln in lines),
    )
