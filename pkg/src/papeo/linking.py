"""Segment-to-passage affinity scoring and order-aware link suggestion.

The affinity between a segment's spoken text and a passage combines a
lexical signal (ROUGE-L, longest-common-subsequence F-measure) with an
embedding cosine, added together. Because talks tend to walk the paper in
reading order, a small chain model is run over the whole timeline: combined
scores, row-normalized, act as emission probabilities; a single transition
hyperparameter ``p_forward`` is the probability of moving to an equal or
later passage between consecutive segments. Decoding the chain yields both
a best path (top-1 per segment) and, from constrained max-product scores, a
full per-segment ranking.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .embedding import EmbeddingProvider, HttpEmbedder, TfidfEmbedder, cosine_similarity
from .errors import EmbedError, InputError, NotFound
from .model import PapeoDoc, Passage
from .textutil import norm_tokens

__all__ = [
    "LinkerConfig",
    "ScoreMatrix",
    "AlignmentResult",
    "lcs_length",
    "rouge_l",
    "embed_similarity",
    "combined_score",
    "score_matrix",
    "transition_log_matrix",
    "viterbi_align",
    "suggest",
    "suggest_all",
    "baseline_random_section",
    "build_provider",
]


@dataclass(frozen=True)
class LinkerConfig:
    """Suggestion knobs.

    ``p_forward`` defaults to 0.6, the central value of the cross-validated
    range; ``top_k`` to 5 suggestions per segment.
    """

    p_forward: float = 0.6
    top_k: int = 5
    embedder: str = "builtin"
    endpoint: Optional[str] = None
    rouge_only: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p_forward <= 1.0:
            raise InputError("p_forward must be within [0, 1]")
        if self.top_k < 1:
            raise InputError("top_k must be >= 1")


def build_provider(cfg: LinkerConfig, corpus: Sequence[str]) -> Optional[EmbeddingProvider]:
    if cfg.rouge_only:
        return None
    if cfg.embedder == "builtin":
        return TfidfEmbedder(corpus)
    if cfg.embedder == "http":
        if not cfg.endpoint:
            raise InputError("http embedder requires an endpoint")
        return HttpEmbedder(cfg.endpoint)
    raise InputError(f"unknown embedder {cfg.embedder!r}")


# ---------------------------------------------------------------------------
# pairwise measures

def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest-common-subsequence length via the classic DP, O(|a|*|b|)."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """LCS-based F-measure between two token lists, in [0, 1].

    R = LCS/|reference|, P = LCS/|candidate|, F = 2PR/(P+R); zero whenever
    either side is empty or the LCS is.
    """
    lcs = lcs_length(candidate, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return 2 * p * r / (p + r)


def embed_similarity(a: str, b: str, provider: EmbeddingProvider) -> float:
    """Cosine similarity of the provider's vectors, clamped to [0, 1].

    Negative cosines clamp to zero so combined scores stay non-negative.
    """
    vectors = provider.embed([a, b])
    return min(1.0, max(0.0, cosine_similarity(vectors[0], vectors[1])))


def combined_score(seg_text: str, passage_text: str, provider: EmbeddingProvider) -> float:
    """Embedding cosine plus ROUGE-L, in [0, 2]."""
    return (
        embed_similarity(seg_text, passage_text, provider)
        + rouge_l(norm_tokens(seg_text), norm_tokens(passage_text))
    )


# ---------------------------------------------------------------------------
# the score matrix

@dataclass(frozen=True)
class ScoreMatrix:
    """Per-measure affinities: rows are segments in timeline order, columns
    passages in reading order. ``emissions`` is the row-normalized combined
    matrix; rows with no signal fall back to uniform over text passages.
    Passages without text (figures, tables) always emit zero: they stay
    manually linkable but are never suggested."""

    embed: np.ndarray
    rouge: np.ndarray
    combined: np.ndarray
    emissions: np.ndarray
    text_columns: tuple[int, ...]


def score_matrix(
    segment_texts: Sequence[str],
    passages: Sequence[Passage],
    cfg: LinkerConfig = LinkerConfig(),
    provider: Optional[EmbeddingProvider] = None,
) -> ScoreMatrix:
    """Score every segment against every passage.

    With no explicit provider the built-in embedder is fit on the segments
    plus passages at hand. ``cfg.rouge_only`` (or provider failure handled by
    the caller) drops the embedding term.
    """
    if not segment_texts:
        raise InputError("need at least one segment")
    text_cols = tuple(i for i, p in enumerate(passages) if p.text.strip())
    if not text_cols:
        raise InputError("need at least one passage with text")

    passage_texts = [p.text for p in passages]
    if provider is None:
        provider = build_provider(cfg, [*segment_texts, *passage_texts])

    n_seg, n_pas = len(segment_texts), len(passages)
    embed = np.zeros((n_seg, n_pas))
    rouge = np.zeros((n_seg, n_pas))

    if provider is not None:
        vectors = provider.embed([*segment_texts, *passage_texts])
        seg_vec, pas_vec = vectors[:n_seg], vectors[n_seg:]
        for s in range(n_seg):
            for c in text_cols:
                embed[s, c] = min(1.0, max(0.0, cosine_similarity(seg_vec[s], pas_vec[c])))

    seg_tokens = [norm_tokens(t) for t in segment_texts]
    pas_tokens = [norm_tokens(t) for t in passage_texts]
    for s in range(n_seg):
        for c in text_cols:
            rouge[s, c] = rouge_l(seg_tokens[s], pas_tokens[c])

    combined = embed + rouge
    emissions = np.zeros_like(combined)
    for s in range(n_seg):
        total = combined[s].sum()
        if total > 0:
            emissions[s] = combined[s] / total
        else:
            emissions[s, list(text_cols)] = 1.0 / len(text_cols)
    return ScoreMatrix(embed=embed, rouge=rouge, combined=combined,
                       emissions=emissions, text_columns=text_cols)


# ---------------------------------------------------------------------------
# order-aware decoding

@dataclass(frozen=True)
class AlignmentResult:
    """``path[s]`` is the best passage column for segment ``s``;
    ``rankings[s]`` the top-k (column, log-score) pairs by best full-path
    score constrained through (s, column), non-increasing."""

    path: tuple[int, ...]
    rankings: tuple[tuple[tuple[int, float], ...], ...]


def transition_log_matrix(n_passages: int, p_forward: float) -> np.ndarray:
    """Log transition matrix over passage columns.

    From column i, probability mass ``p_forward`` spreads uniformly over the
    in-order targets {j >= i} and the rest uniformly over {j < i}. Column 0
    has no reverse targets, so its whole row renormalizes to uniform.
    """
    with np.errstate(divide="ignore"):
        t = np.full((n_passages, n_passages), -np.inf)
        for i in range(n_passages):
            n_fwd = n_passages - i
            if i == 0:
                t[i, :] = np.log(1.0 / n_passages)
                continue
            t[i, i:] = np.log(p_forward / n_fwd) if p_forward > 0 else -np.inf
            t[i, :i] = np.log((1.0 - p_forward) / i) if p_forward < 1 else -np.inf
    return t


def viterbi_align(matrix: ScoreMatrix, cfg: LinkerConfig = LinkerConfig()) -> AlignmentResult:
    """Max-product decoding of the segment chain.

    Works in log space with a uniform prior over the first segment's
    columns. Rankings come from constrained path scores (forward max times
    backward max), are restricted to text columns, and break ties toward the
    lower passage index; the path is, per construction, each ranking's head.
    """
    emissions = matrix.emissions
    n_seg, n_pas = emissions.shape
    with np.errstate(divide="ignore"):
        log_e = np.log(emissions)
        log_prior = np.log(np.full(n_pas, 1.0 / n_pas))
    log_t = transition_log_matrix(n_pas, cfg.p_forward)

    # forward[s, j]: best log score over paths for segments 0..s ending at j
    forward = np.empty_like(log_e)
    forward[0] = log_prior + log_e[0]
    for s in range(1, n_seg):
        forward[s] = (forward[s - 1][:, None] + log_t).max(axis=0) + log_e[s]

    # backward[s, j]: best log score over continuations after (s, j)
    backward = np.zeros_like(log_e)
    for s in range(n_seg - 2, -1, -1):
        backward[s] = (log_t + (log_e[s + 1] + backward[s + 1])[None, :]).max(axis=1)

    constrained = forward + backward
    text_cols = np.array(matrix.text_columns)
    rankings = []
    for s in range(n_seg):
        scores = constrained[s, text_cols]
        order = np.lexsort((text_cols, -scores))
        top = tuple(
            (int(text_cols[i]), float(scores[i])) for i in order[:cfg.top_k]
        )
        rankings.append(top)
    path = tuple(r[0][0] for r in rankings)
    return AlignmentResult(path=path, rankings=tuple(rankings))


# ---------------------------------------------------------------------------
# document-level entry points

@dataclass(frozen=True)
class Suggestion:
    passage_id: str
    score: float


def suggest_all(
    doc: PapeoDoc,
    cfg: LinkerConfig = LinkerConfig(),
    provider: Optional[EmbeddingProvider] = None,
) -> dict[str, list[Suggestion]]:
    """Ranked passage suggestions for every segment of the document.

    Deterministic given the document and config: the alignment is recomputed
    over all current segments in timeline order.
    """
    if not doc.segments:
        return {}
    texts = [doc.segment_text(s) for s in doc.segments]
    matrix = score_matrix(texts, doc.paper.passages, cfg, provider)
    result = viterbi_align(matrix, cfg)
    out: dict[str, list[Suggestion]] = {}
    for segment, ranking in zip(doc.segments, result.rankings):
        out[segment.id] = [
            Suggestion(passage_id=doc.paper.passages[col].id, score=score)
            for col, score in ranking
        ]
    return out


def suggest(
    doc: PapeoDoc,
    segment_id: str,
    cfg: LinkerConfig = LinkerConfig(),
    provider: Optional[EmbeddingProvider] = None,
) -> list[Suggestion]:
    """Top-k passages for one segment (chain decoded over all segments)."""
    if doc.segment_by_id(segment_id) is None:
        raise NotFound(f"unknown segment {segment_id!r}")
    return suggest_all(doc, cfg, provider)[segment_id]


def baseline_random_section(doc: PapeoDoc, seed: int = 0) -> list[str]:
    """Naive baseline: per segment, the first paragraph of a random section.

    Sections are the distinct ``section_path`` values in reading order;
    only sections containing at least one paragraph participate.
    """
    first_paragraphs: dict[tuple[str, ...], str] = {}
    for p in doc.paper.passages:
        if p.kind == "paragraph" and p.section_path not in first_paragraphs:
            first_paragraphs[p.section_path] = p.id
    if not first_paragraphs:
        raise InputError("paper has no section with a paragraph")
    choices = list(first_paragraphs.values())
    rng = random.Random(seed)
    return [rng.choice(choices) for _ in doc.segments]
