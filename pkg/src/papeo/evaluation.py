"""Metric protocol for boundary and linking suggestions, plus log analytics.

Boundary quality is precision/recall/F-beta against ground truth under a
time tolerance (default 3 s), with matching done greedily by smallest time
delta under a one-to-one constraint. F3 is the headline segmentation score:
it weighs recall higher, favoring over-segmentation, because merging
suggested segments costs authors fewer clicks than splitting them. Linking
quality is top-k accuracy per segment. Hyperparameters are chosen by k-fold
cross-validation where each fold trains on its 1/k chunk of the pairs and
tests on the rest.

Aggregation across pairs is macro-averaging: metrics per pair, then the
arithmetic mean.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from .errors import InputError
from .frames import FrameRecord, load_frames_manifest
from .ingest import parse_transcript
from .model import PapeoDoc, deserialize

__all__ = [
    "EvalConfig",
    "ActionEvent",
    "EvalPair",
    "match_boundaries",
    "boundary_prf",
    "f_beta",
    "link_topk_accuracy",
    "macro_average",
    "expand_grid",
    "grid_search_cv",
    "FoldResult",
    "CVResult",
    "truth_boundaries",
    "truth_links",
    "load_dataset",
    "count_interactions",
    "session_stats",
    "format_table",
]


@dataclass(frozen=True)
class EvalConfig:
    tolerance_s: float = 3.0
    betas: tuple[float, ...] = (1.0, 2.0, 3.0)
    k_values: tuple[int, ...] = (1, 5)
    folds: int = 4
    train_fraction: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(self.betas))
        object.__setattr__(self, "k_values", tuple(self.k_values))
        if self.tolerance_s < 0:
            raise InputError("tolerance_s must be >= 0")
        if any(b <= 0 for b in self.betas):
            raise InputError("betas must be positive")
        if self.folds < 2:
            raise InputError("folds must be >= 2")


# ---------------------------------------------------------------------------
# boundary metrics

def match_boundaries(
    predicted: Sequence[float],
    truth: Sequence[float],
    tolerance_s: float = 3.0,
) -> list[tuple[int, int]]:
    """One-to-one greedy matching of boundary times by increasing |delta|.

    Returns (predicted_index, truth_index) pairs, each boundary used at most
    once, every pair within the tolerance. Ties in |delta| resolve by the
    lower indices, keeping the matching deterministic.
    """
    candidates = sorted(
        (abs(p - t), i, j)
        for i, p in enumerate(predicted)
        for j, t in enumerate(truth)
        if abs(p - t) <= tolerance_s
    )
    used_p: set[int] = set()
    used_t: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for _, i, j in candidates:
        if i in used_p or j in used_t:
            continue
        used_p.add(i)
        used_t.add(j)
        pairs.append((i, j))
    return sorted(pairs)


def f_beta(precision: float, recall: float, beta: float) -> float:
    """(1 + b^2) p r / (b^2 p + r); zero when the denominator is."""
    denom = beta * beta * precision + recall
    if denom == 0:
        return 0.0
    return (1 + beta * beta) * precision * recall / denom


def boundary_prf(
    predicted: Sequence[float],
    truth: Sequence[float],
    cfg: EvalConfig = EvalConfig(),
) -> dict[str, float]:
    """Precision/recall/F-beta of predicted vs ground-truth boundaries.

    With nothing predicted (or no truth) the corresponding ratio is 0.
    """
    matches = len(match_boundaries(predicted, truth, cfg.tolerance_s))
    precision = matches / len(predicted) if predicted else 0.0
    recall = matches / len(truth) if truth else 0.0
    out = {"precision": precision, "recall": recall}
    for beta in cfg.betas:
        out[f"f{beta:g}"] = f_beta(precision, recall, beta)
    return out


# ---------------------------------------------------------------------------
# linking metrics

def link_topk_accuracy(
    rankings: Mapping[str, Sequence[str]],
    ground_truth_links: Mapping[str, set[str] | Sequence[str]],
    k: int,
    per_passage: bool = False,
) -> float:
    """Fraction of ground-truth segments whose top-k contains a true passage.

    A segment is a hit when *any* of its ground-truth passages appears in
    its top-k ranking. ``per_passage=True`` switches to counting each
    (segment, passage) truth pair instead.
    """
    if not ground_truth_links:
        raise InputError("no ground-truth links to score")
    hits = 0
    total = 0
    for segment_id, truth in ground_truth_links.items():
        if segment_id not in rankings:
            raise InputError(f"no ranking for segment {segment_id!r}")
        top = list(rankings[segment_id])[:k]
        truth_set = set(truth)
        if per_passage:
            total += len(truth_set)
            hits += sum(1 for pid in truth_set if pid in top)
        else:
            total += 1
            hits += int(any(pid in top for pid in truth_set))
    return hits / total


def macro_average(per_pair: Sequence[Mapping[str, float]]) -> dict[str, float]:
    """Arithmetic mean of each metric over pairs (metrics must align)."""
    if not per_pair:
        return {}
    keys = per_pair[0].keys()
    return {k: sum(m[k] for m in per_pair) / len(per_pair) for k in keys}


# ---------------------------------------------------------------------------
# cross-validated grid search

@dataclass(frozen=True)
class FoldResult:
    fold: int
    train_indices: tuple[int, ...]
    test_indices: tuple[int, ...]
    best_params: dict
    train_score: float
    test_metrics: dict


@dataclass(frozen=True)
class CVResult:
    folds: tuple[FoldResult, ...]
    target: str

    def selected(self, name: str) -> list:
        return [f.best_params[name] for f in self.folds]

    def mean_test(self, metric: str) -> float:
        return sum(f.test_metrics[metric] for f in self.folds) / len(self.folds)


def expand_grid(grid: Mapping[str, Sequence]) -> list[dict]:
    """Cartesian product of a name->values grid, in stable insertion order."""
    names = list(grid)
    combos = itertools.product(*(grid[n] for n in names))
    return [dict(zip(names, values)) for values in combos]


def grid_search_cv(
    pairs: Sequence,
    grid: Mapping[str, Sequence],
    evaluate_pair: Callable[[object, dict], Mapping[str, float]],
    target: str,
    cfg: EvalConfig = EvalConfig(),
    seed: int = 0,
) -> CVResult:
    """K-fold hyperparameter selection on the small-train/large-test split.

    Pairs are shuffled once (seeded) and partitioned into ``cfg.folds``
    chunks; fold f trains on chunk f (1/folds of the data, the 25% split at
    the default 4 folds) and reports test metrics on everything else. The
    grid point maximizing the macro-averaged ``target`` on the train chunk
    wins; ties go to the earlier grid point.
    """
    if len(pairs) < cfg.folds:
        raise InputError(f"need at least {cfg.folds} pairs, got {len(pairs)}")
    points = expand_grid(grid)
    if not points:
        raise InputError("empty hyperparameter grid")

    indices = list(range(len(pairs)))
    random.Random(seed).shuffle(indices)
    chunks = [tuple(indices[f::cfg.folds]) for f in range(cfg.folds)]
    assert sorted(i for c in chunks for i in c) == sorted(indices)  # no leakage

    folds: list[FoldResult] = []
    for f, train_idx in enumerate(chunks):
        test_idx = tuple(i for c in chunks if c is not train_idx for i in c)
        best_params, best_score = None, float("-inf")
        for params in points:
            score = macro_average(
                [dict(evaluate_pair(pairs[i], params)) for i in train_idx]
            )[target]
            if score > best_score:
                best_params, best_score = params, score
        test_metrics = macro_average(
            [dict(evaluate_pair(pairs[i], best_params)) for i in test_idx]
        )
        folds.append(FoldResult(
            fold=f, train_indices=train_idx, test_indices=test_idx,
            best_params=dict(best_params), train_score=best_score,
            test_metrics=test_metrics,
        ))
    return CVResult(folds=tuple(folds), target=target)


# ---------------------------------------------------------------------------
# dataset pairs

@dataclass(frozen=True)
class EvalPair:
    """One paper/talk pair with its ground-truth papeo.

    ``paper`` and ``transcript`` are the raw inputs predictions run on;
    they default to the ones embedded in the ground truth.
    """

    name: str
    truth: PapeoDoc
    paper: Optional[object] = None
    transcript: Optional[tuple] = None
    frames: Optional[tuple[FrameRecord, ...]] = None

    def __post_init__(self):
        if self.paper is None:
            object.__setattr__(self, "paper", self.truth.paper)
        if self.transcript is None:
            object.__setattr__(self, "transcript", self.truth.transcript)
        else:
            object.__setattr__(self, "transcript", tuple(self.transcript))
        if self.frames is not None:
            object.__setattr__(self, "frames", tuple(self.frames))


def truth_boundaries(doc: PapeoDoc) -> list[float]:
    """Interior segment edges of a papeo (video start/end excluded)."""
    edges = set()
    for s in doc.segments:
        edges.add(s.start_s)
        edges.add(s.end_s)
    edges.discard(0.0)
    edges.discard(doc.video.duration_s)
    return sorted(edges)


def truth_links(doc: PapeoDoc) -> dict[str, set[str]]:
    return {l.segment_id: set(l.passage_ids) for l in doc.links}


def load_dataset(manifest_path: str | Path) -> list[EvalPair]:
    """Load a dataset manifest: a JSON list of entries shaped
    ``{"ground_truth_papeo": ..., "layout_file": optional,
    "transcript_file": optional, "transcript_format": optional,
    "frames_manifest": optional, "name": optional}``
    with all paths resolved against the manifest file."""
    from .ingest import parse_layout

    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    if not isinstance(entries, list):
        raise InputError("dataset manifest must be a JSON list")
    pairs = []
    for i, entry in enumerate(entries):
        if "ground_truth_papeo" not in entry:
            raise InputError(f"dataset entry {i} lacks ground_truth_papeo")
        doc = deserialize((base / entry["ground_truth_papeo"]).read_bytes())
        paper = transcript = None
        if entry.get("layout_file"):
            paper = parse_layout((base / entry["layout_file"]).read_bytes())
        if entry.get("transcript_file"):
            transcript = tuple(parse_transcript(
                (base / entry["transcript_file"]).read_bytes(),
                entry.get("transcript_format", "vtt"),
            ))
        frames = None
        if entry.get("frames_manifest"):
            frames = tuple(load_frames_manifest(base / entry["frames_manifest"]))
        pairs.append(EvalPair(
            name=entry.get("name", f"pair{i}"), truth=doc,
            paper=paper, transcript=transcript, frames=frames,
        ))
    return pairs


# ---------------------------------------------------------------------------
# per-pair evaluators for the two suggestion families

SEGMENTATION_METHODS = ("punctuation", "hsv", "template")
LINKING_ALGORITHMS = ("random", "embed", "rouge", "combined", "viterbi")


def predict_boundaries(pair: EvalPair, method: str, params: Mapping) -> list[float]:
    from .segmentation import (SegmenterConfig, segment_by_hsv,
                               segment_by_punctuation, segment_by_template)

    if method == "punctuation":
        return segment_by_punctuation(pair.transcript)
    if method in ("hsv", "template"):
        if pair.frames is None:
            raise InputError(f"{method} segmentation needs a frames manifest")
        seg_cfg = SegmenterConfig(
            threshold=params["threshold"],
            min_segment_s=params.get("min_segment_s", 0.0),
        )
        fn = segment_by_hsv if method == "hsv" else segment_by_template
        return fn(pair.frames, seg_cfg)
    raise InputError(f"unknown segmentation method {method!r}")


def evaluate_segmentation_pair(
    pair: EvalPair,
    method: str,
    params: Mapping = (),
    cfg: EvalConfig = EvalConfig(),
) -> dict[str, float]:
    """P/R/F-beta of one method's boundaries against one pair's ground truth."""
    predicted = predict_boundaries(pair, method, dict(params))
    return boundary_prf(predicted, truth_boundaries(pair.truth), cfg)


def rank_passages(pair: EvalPair, algorithm: str, params: Mapping = (),
                  seed: int = 0) -> dict[str, list[str]]:
    """Per-segment passage rankings over the pair's ground-truth segments.

    Measure-only algorithms sort reading-order columns by that measure;
    "viterbi" decodes the chain with ``params["p_forward"]``; "random" picks
    one first-paragraph-of-a-section per segment.
    """
    from . import linking

    params = dict(params)
    doc = pair.truth
    if algorithm == "random":
        picks = linking.baseline_random_section(doc, seed=params.get("seed", seed))
        return {s.id: [pid] for s, pid in zip(doc.segments, picks)}

    texts = [doc.segment_text(s) for s in doc.segments]
    cfg = linking.LinkerConfig(
        p_forward=params.get("p_forward", 0.6),
        top_k=max(len(pair.paper.passages), 1),
    )
    matrix = linking.score_matrix(texts, pair.paper.passages, cfg)
    passages = pair.paper.passages
    if algorithm == "viterbi":
        result = linking.viterbi_align(matrix, cfg)
        return {
            s.id: [passages[col].id for col, _ in ranking]
            for s, ranking in zip(doc.segments, result.rankings)
        }
    try:
        measure = {"embed": matrix.embed, "rouge": matrix.rouge,
                   "combined": matrix.combined}[algorithm]
    except KeyError:
        raise InputError(f"unknown linking algorithm {algorithm!r}") from None
    cols = list(matrix.text_columns)
    out = {}
    for s, row in zip(doc.segments, measure):
        order = sorted(cols, key=lambda c: (-row[c], c))
        out[s.id] = [passages[c].id for c in order]
    return out


def evaluate_linking_pair(
    pair: EvalPair,
    algorithm: str,
    params: Mapping = (),
    cfg: EvalConfig = EvalConfig(),
    seed: int = 0,
) -> dict[str, float]:
    """Top-k accuracies of one algorithm on one pair's ground-truth links."""
    rankings = rank_passages(pair, algorithm, params, seed=seed)
    truth = truth_links(pair.truth)
    return {
        f"top{k}": link_topk_accuracy(rankings, truth, k)
        for k in cfg.k_values
    }


# ---------------------------------------------------------------------------
# interaction logs

PAPER_KINDS = frozenset({"scroll", "select-passage", "passage-click", "highlight-hover"})
VIDEO_KINDS = frozenset({"scrub", "play", "pause", "note-activate", "timeline-click"})
RUN_WINDOW_S = 1.0


@dataclass(frozen=True)
class ActionEvent:
    t: float
    actor: str = ""
    kind: str = ""
    direction: Optional[str] = None
    payload: dict = field(default_factory=dict)


def _format_of(event: ActionEvent) -> Optional[str]:
    if event.kind in PAPER_KINDS:
        return "paper"
    if event.kind in VIDEO_KINDS:
        return "video"
    if event.kind == "switch-target":
        return event.payload.get("to")
    return None


def _count_runs(events: list[ActionEvent]) -> int:
    """Collapse consecutive same-direction actions within one second."""
    count = 0
    prev: Optional[ActionEvent] = None
    for e in events:
        if (prev is None or e.t - prev.t > RUN_WINDOW_S
                or e.direction != prev.direction):
            count += 1
        prev = e
    return count


def count_interactions(log: Sequence[ActionEvent]) -> dict[str, int]:
    """Switch/scroll/scrub counts under the collapse rules.

    A switch is any event on one format following an event on the other;
    scrolls and scrubs collapse runs of same-direction actions spaced less
    than a second apart into one action.
    """
    events = sorted(log, key=lambda e: e.t)
    switches = 0
    prev_format: Optional[str] = None
    for e in events:
        fmt = _format_of(e)
        if fmt is None:
            continue
        if prev_format is not None and fmt != prev_format:
            switches += 1
        prev_format = fmt
    return {
        "switches": switches,
        "scrolls": _count_runs([e for e in events if e.kind == "scroll"]),
        "scrubs": _count_runs([e for e in events if e.kind == "scrub"]),
    }


def session_stats(
    log: Sequence[ActionEvent],
    idle_gap_s: float = 1800.0,
    min_actions: int = 2,
) -> dict:
    """Session extraction per actor: maximal event runs split on >= 30 min
    idle gaps; runs with fewer than two actions are anomalous (user bounced
    or idled) and dropped."""
    by_actor: dict[str, list[ActionEvent]] = {}
    for e in sorted(log, key=lambda e: (e.actor, e.t)):
        by_actor.setdefault(e.actor, []).append(e)

    sessions: list[list[ActionEvent]] = []
    for events in by_actor.values():
        current = [events[0]]
        for e in events[1:]:
            if e.t - current[-1].t >= idle_gap_s:
                sessions.append(current)
                current = [e]
            else:
                current.append(e)
        sessions.append(current)
    kept = [s for s in sessions if len(s) >= min_actions]
    if not kept:
        return {"sessions": 0, "actions_per_session": None, "session_minutes": None}
    return {
        "sessions": len(kept),
        "actions_per_session": sum(len(s) for s in kept) / len(kept),
        "session_minutes": sum((s[-1].t - s[0].t) / 60.0 for s in kept) / len(kept),
    }


# ---------------------------------------------------------------------------
# report formatting

def format_table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Aligned-column text table (first column left, the rest right)."""
    cells = [[str(h) for h in headers]]
    for row in rows:
        cells.append([f"{v:.3f}" if isinstance(v, float) else str(v) for v in row])
    widths = [max(len(r[c]) for r in cells) for c in range(len(headers))]
    lines = []
    for r, row in enumerate(cells):
        padded = [
            row[0].ljust(widths[0]),
            *(cell.rjust(w) for cell, w in zip(row[1:], widths[1:])),
        ]
        lines.append("  ".join(padded).rstrip())
        if r == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)
