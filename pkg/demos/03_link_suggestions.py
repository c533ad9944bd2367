#!/usr/bin/env python3
"""Rank passage links with the combined lexical/embedding measure, then show
what the order-aware chain decoding adds — and when it takes over.

Two regimes are worth seeing side by side. When emissions are sharp (every
segment clearly names its passage, as with strong neural embedders or the
synthetic corpus below), the chain fixes exactly the errors text similarity
cannot: lexically identical recap passages. When emissions are diffuse, the
transition model's preference for in-order moves can dominate the text
signal: the in-order mass spreads over all remaining passages, so parking
near the end of the paper becomes cheap. The transition probability is a
knob between those regimes, not a free lunch."""

from pathlib import Path

from papeo.ingest import parse_layout, parse_transcript
from papeo.linking import LinkerConfig, score_matrix, viterbi_align
from papeo.model import PapeoDoc, VideoMeta
from papeo.segmentation import boundaries_to_segments, segment_by_punctuation
from papeo.synth import make_linked_corpus

SAMPLE = Path(__file__).resolve().parent.parent / "data" / "sample"

# -- regime 1: sharp emissions, recap passages --------------------------------
corpus = make_linked_corpus(seed=11, recap_pairs=2)
texts = [corpus.segment_text(s) for s in corpus.segments]
matrix = score_matrix(texts, corpus.paper.passages, LinkerConfig())
result = viterbi_align(matrix, LinkerConfig(p_forward=0.6))

truth = {l.segment_id: l.passage_ids[0] for l in corpus.links}
print("synthetic corpus with two recap passages (identical text, far apart):")
print(f"{'segment':10s} {'truth':8s} {'argmax':8s} {'decoded':8s}")
hits_argmax = hits_path = 0
for i, segment in enumerate(corpus.segments):
    argmax_col = max(matrix.text_columns, key=lambda c: (matrix.combined[i, c], -c))
    argmax_id = corpus.paper.passages[argmax_col].id
    path_id = corpus.paper.passages[result.path[i]].id
    hits_argmax += argmax_id == truth[segment.id]
    hits_path += path_id == truth[segment.id]
    marker = "" if path_id == argmax_id else "   <- order decided"
    print(f"{segment.id:10s} {truth[segment.id]:8s} {argmax_id:8s} {path_id:8s}{marker}")
print(f"top-1 accuracy: argmax {hits_argmax}/{len(corpus.segments)}, "
      f"decoded {hits_path}/{len(corpus.segments)}")

# -- regime 2: diffuse emissions on the bundled talk --------------------------
paper = parse_layout((SAMPLE / "layout.json").read_bytes())
lines = parse_transcript((SAMPLE / "talk.vtt").read_bytes(), "vtt")
segments = boundaries_to_segments(segment_by_punctuation(lines), 62.0, lines)
doc = PapeoDoc(paper=paper, video=VideoMeta(uri="talk.mp4", duration_s=62.0),
               transcript=tuple(lines), segments=tuple(segments))
texts = [doc.segment_text(s) for s in doc.segments]
matrix = score_matrix(texts, paper.passages, LinkerConfig())
ids = [p.id for p in paper.passages]

print("\nbundled talk, bag-of-words emissions (one row per segment):")
print(f"{'segment':8s} {'best by text':14s} {'decoded p=0.6':14s} {'decoded p=0.2':14s}")
strong = viterbi_align(matrix, LinkerConfig(p_forward=0.6))
weak = viterbi_align(matrix, LinkerConfig(p_forward=0.2))
for i, segment in enumerate(doc.segments):
    argmax_col = max(matrix.text_columns, key=lambda c: (matrix.combined[i, c], -c))
    print(f"{segment.id:8s} {ids[argmax_col]:14s} {ids[strong.path[i]]:14s} "
          f"{ids[weak.path[i]]:14s}")
print(
    "the text-only column tracks the talk; the decoded path at p=0.6 parks\n"
    "on late passages because staying at the last passage keeps the whole\n"
    "in-order mass while earlier columns spread it over every later target.\n"
    "Sharper emissions (stronger embedders, quote-dense talks) or a smaller\n"
    "transition probability are what keep the chain honest."
)
