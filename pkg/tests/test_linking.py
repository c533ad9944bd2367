import dataclasses
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (align_by_enumeration, assert_alignment_matches_enumeration,
                     rouge_oracle, tfidf_cosine_oracle)
from papeo.embedding import TfidfEmbedder
from papeo.errors import EmbedError, InputError, NotFound
from papeo.linking import (AlignmentResult, LinkerConfig, ScoreMatrix,
                           baseline_random_section, combined_score,
                           embed_similarity, rouge_l, score_matrix, suggest,
                           suggest_all, viterbi_align)
from papeo.model import (BBox, PapeoDoc, PaperDocument, Passage, TranscriptLine,
                         VideoMeta, VideoSegment)
from papeo.synth import make_linked_corpus
from papeo.textutil import norm_tokens


class TestRougeL:
    def test_identical_token_lists(self):
        assert rouge_l(["a", "b", "c"], ["a", "b", "c"]) == 1.0

    def test_worked_example(self):
        # LCS = 2, P = 2/2, R = 2/3 -> F = 2*(1)(2/3)/(1 + 2/3) = 0.8
        assert rouge_l(["the", "cat"], ["the", "cat", "sat"]) == pytest.approx(0.8)

    def test_disjoint_vocabulary(self):
        assert rouge_l(["a", "b"], ["c", "d"]) == 0.0

    def test_empty_sides(self):
        assert rouge_l([], ["a"]) == 0.0
        assert rouge_l(["a"], []) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_equals_subsequence_enumeration_oracle(self, data):
        alphabet = ["u", "v", "w", "x", "y"]
        cand = data.draw(st.lists(st.sampled_from(alphabet), max_size=8))
        ref = data.draw(st.lists(st.sampled_from(alphabet), max_size=8))
        assert rouge_l(cand, ref) == rouge_oracle(cand, ref)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=8),
           st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=8))
    def test_symmetric_for_equal_lengths(self, xs, ys):
        if len(xs) == len(ys):
            assert rouge_l(xs, ys) == pytest.approx(rouge_l(ys, xs))
        assert rouge_l(xs, xs) == 1.0


FIXTURE_CORPUS = ["the cat sat on the mat", "a dog sat by the log"]


class TestEmbedSimilarity:
    def test_identical_texts_score_one(self):
        provider = TfidfEmbedder(FIXTURE_CORPUS)
        assert embed_similarity(FIXTURE_CORPUS[0], FIXTURE_CORPUS[0], provider) == pytest.approx(1.0)

    def test_disjoint_vocabulary_scores_zero(self):
        provider = TfidfEmbedder(["red green", "blue yellow"])
        assert embed_similarity("red green", "blue yellow", provider) == 0.0

    def test_fixture_pair_matches_hand_rolled_tfidf(self):
        provider = TfidfEmbedder(FIXTURE_CORPUS)
        got = embed_similarity(FIXTURE_CORPUS[0], FIXTURE_CORPUS[1], provider)
        want = tfidf_cosine_oracle(FIXTURE_CORPUS[0], FIXTURE_CORPUS[1],
                                   FIXTURE_CORPUS, norm_tokens)
        assert got == pytest.approx(want, abs=1e-12)
        assert 0.0 < got < 1.0

    def test_six_word_fixture_value(self):
        corpus = ["cat sat mat", "dog sat log"]
        provider = TfidfEmbedder(corpus)
        got = embed_similarity(corpus[0], corpus[1], provider)
        # shared token "sat" only: idf(sat) = ln(3/3)+1 = 1, the four distinct
        # tokens carry idf ln(3/2)+1; norms are equal so the cosine is
        # 1 / (2 (ln(3/2)+1)^2 + 1)
        want = 1.0 / (2 * (math.log(3 / 2) + 1) ** 2 + 1)
        assert got == pytest.approx(want, abs=1e-12)

    def test_provider_failure_propagates(self):
        class Boom:
            def embed(self, texts):
                raise EmbedError("down")

        with pytest.raises(EmbedError):
            embed_similarity("a", "b", Boom())


class TestCombinedScore:
    def test_identical_texts(self):
        provider = TfidfEmbedder(FIXTURE_CORPUS)
        assert combined_score(FIXTURE_CORPUS[0], FIXTURE_CORPUS[0], provider) == pytest.approx(2.0)

    def test_disjoint_texts(self):
        provider = TfidfEmbedder(["red green", "blue yellow"])
        assert combined_score("red green", "blue yellow", provider) == 0.0

    def test_fixture_pair_is_sum_of_components(self):
        provider = TfidfEmbedder(FIXTURE_CORPUS)
        got = combined_score(FIXTURE_CORPUS[0], FIXTURE_CORPUS[1], provider)
        want = (embed_similarity(FIXTURE_CORPUS[0], FIXTURE_CORPUS[1], provider)
                + rouge_l(norm_tokens(FIXTURE_CORPUS[0]), norm_tokens(FIXTURE_CORPUS[1])))
        assert got == pytest.approx(want)


def _passage(pid, text, kind="paragraph", section="1 One", page=1):
    return Passage(id=pid, kind=kind, section_path=(section,), page=page,
                   bbox=BBox(0, 0, 10, 10), text=text)


class TestScoreMatrix:
    def test_one_by_one_normalizes_to_one(self):
        m = score_matrix(["alpha beta"], [_passage("p", "alpha beta")])
        assert m.emissions.tolist() == [[1.0]]

    def test_equal_scores_normalize_uniformly(self):
        passages = [_passage(f"p{i}", "alpha beta") for i in range(4)]
        m = score_matrix(["alpha beta"], passages)
        assert m.emissions[0].tolist() == pytest.approx([0.25] * 4)

    def test_two_by_three_matches_component_oracles(self):
        segs = ["cats chase mice", "dogs chase cats"]
        passages = [_passage("p0", "cats chase mice"),
                    _passage("p1", "dogs chase cats"),
                    _passage("p2", "fish swim far")]
        m = score_matrix(segs, passages)
        corpus = segs + [p.text for p in passages]
        for s, seg_text in enumerate(segs):
            row = []
            for p in passages:
                emb = tfidf_cosine_oracle(seg_text, p.text, corpus, norm_tokens)
                rough = rouge_oracle(norm_tokens(seg_text), norm_tokens(p.text))
                row.append(max(0.0, min(1.0, emb)) + rough)
            want = [x / sum(row) for x in row]
            assert m.emissions[s].tolist() == pytest.approx(want, abs=1e-12)

    def test_empty_text_passages_get_zero_and_uniform_fallback_skips_them(self):
        passages = [_passage("p0", "alpha"), _passage("f0", "", kind="figure"),
                    _passage("p1", "beta")]
        m = score_matrix(["unrelated words"], passages)
        assert m.text_columns == (0, 2)
        assert m.emissions[0].tolist() == [0.5, 0.0, 0.5]

    def test_no_text_passages_is_an_input_error(self):
        with pytest.raises(InputError):
            score_matrix(["x"], [_passage("f", "", kind="figure")])

    def test_no_segments_is_an_input_error(self):
        with pytest.raises(InputError):
            score_matrix([], [_passage("p", "x")])


def _matrix(emissions, text_columns=None):
    emissions = np.asarray(emissions, dtype=float)
    cols = tuple(range(emissions.shape[1])) if text_columns is None else tuple(text_columns)
    return ScoreMatrix(embed=emissions, rouge=emissions, combined=emissions,
                       emissions=emissions, text_columns=cols)


class TestViterbiAlign:
    def test_forward_only_follows_peaked_diagonal(self):
        e = np.array([[0.7, 0.2, 0.1], [0.1, 0.7, 0.2], [0.1, 0.2, 0.7]])
        result = viterbi_align(_matrix(e), LinkerConfig(p_forward=1.0))
        assert result.path == (0, 1, 2)
        assert all(a <= b for a, b in zip(result.path, result.path[1:]))

    def test_two_by_two_against_enumeration(self):
        e = np.array([[0.6, 0.4], [0.6, 0.4]])
        cfg = LinkerConfig(p_forward=0.9, top_k=2)
        got = viterbi_align(_matrix(e), cfg)
        want_path, want_rankings, _ = align_by_enumeration(e, (0, 1), 0.9, 2)
        assert got.path == want_path == (0, 0)
        for mine, ref in zip(got.rankings, want_rankings):
            assert [c for c, _ in mine] == [c for c, _ in ref]
            assert [s for _, s in mine] == pytest.approx([s for _, s in ref])

    def test_uniform_emissions_tie_break_to_lower_index(self):
        # one segment: every column scores prior * 1/3, an exact tie
        e = np.full((1, 3), 1 / 3)
        result = viterbi_align(_matrix(e), LinkerConfig(p_forward=0.5, top_k=3))
        assert result.path == (0,)
        assert [c for c, _ in result.rankings[0]] == [0, 1, 2]
        # two segments: still deterministic, and equal to plain enumeration
        e2 = np.full((2, 3), 1 / 3)
        got = viterbi_align(_matrix(e2), LinkerConfig(p_forward=0.5, top_k=3))
        again = viterbi_align(_matrix(e2), LinkerConfig(p_forward=0.5, top_k=3))
        assert got == again
        assert_alignment_matches_enumeration(got, e2, (0, 1, 2), 0.5, 3)

    def test_rankings_head_equals_path_and_scores_non_increasing(self):
        rng = np.random.default_rng(11)
        for _ in range(30):
            n_seg = int(rng.integers(1, 6))
            n_pas = int(rng.integers(1, 6))
            e = rng.random((n_seg, n_pas)) + 1e-3
            e /= e.sum(axis=1, keepdims=True)
            result = viterbi_align(_matrix(e), LinkerConfig(p_forward=0.7, top_k=n_pas))
            for s, ranking in enumerate(result.rankings):
                assert ranking[0][0] == result.path[s]
                scores = [x for _, x in ranking]
                assert all(a >= b for a, b in zip(scores, scores[1:]))

    @settings(max_examples=60, deadline=None)
    @given(st.data())
    def test_matches_enumeration_on_random_matrices(self, data):
        n_seg = data.draw(st.integers(min_value=1, max_value=4))
        n_pas = data.draw(st.integers(min_value=1, max_value=4))
        raw = data.draw(st.lists(
            st.lists(st.floats(min_value=0.01, max_value=1.0), min_size=n_pas, max_size=n_pas),
            min_size=n_seg, max_size=n_seg))
        p_forward = data.draw(st.sampled_from([0.0, 0.3, 0.5, 0.6, 0.9, 1.0]))
        e = np.asarray(raw)
        e /= e.sum(axis=1, keepdims=True)
        got = viterbi_align(_matrix(e), LinkerConfig(p_forward=p_forward, top_k=3))
        assert_alignment_matches_enumeration(got, e, tuple(range(n_pas)),
                                             p_forward, 3)

    def test_row_scaling_invariance(self):
        segs = ["cats chase mice", "dogs chase cats"]
        passages = [_passage("p0", "cats chase mice"),
                    _passage("p1", "dogs chase cats"),
                    _passage("p2", "fish swim far")]
        m = score_matrix(segs, passages)
        scaled_combined = m.combined.copy()
        scaled_combined[1] *= 7.5
        emissions = scaled_combined / scaled_combined.sum(axis=1, keepdims=True)
        m2 = ScoreMatrix(embed=m.embed, rouge=m.rouge, combined=scaled_combined,
                         emissions=emissions, text_columns=m.text_columns)
        assert np.allclose(m.emissions, m2.emissions)
        r1 = viterbi_align(m, LinkerConfig())
        r2 = viterbi_align(m2, LinkerConfig())
        assert r1.path == r2.path
        for a, b in zip(r1.rankings, r2.rankings):
            assert [c for c, _ in a] == [c for c, _ in b]
            assert [s for _, s in a] == pytest.approx([s for _, s in b])

    def test_zero_emission_text_columns_rank_last(self):
        e = np.array([[0.9, 0.1, 0.0]])
        result = viterbi_align(_matrix(e), LinkerConfig(top_k=3))
        assert [c for c, _ in result.rankings[0]] == [0, 1, 2]
        assert result.rankings[0][2][1] == float("-inf")


def small_doc():
    passages = (
        _passage("p0", "alpha bravo charlie delta"),
        _passage("p1", "echo foxtrot golf hotel"),
        _passage("p2", "india juliet kilo lima"),
        _passage("fig", "", kind="figure"),
    )
    paper = PaperDocument(paper_id="x", title="t", passages=passages)
    lines = (
        TranscriptLine(0, 0.0, 5.0, "alpha bravo charlie"),
        TranscriptLine(1, 5.0, 10.0, "echo foxtrot golf"),
        TranscriptLine(2, 10.0, 15.0, "india juliet kilo"),
    )
    segments = (
        VideoSegment(id="s0", start_s=0.0, end_s=5.0, line_indices=(0,)),
        VideoSegment(id="s1", start_s=5.0, end_s=10.0, line_indices=(1,)),
        VideoSegment(id="s2", start_s=10.0, end_s=15.0, line_indices=(2,)),
    )
    return PapeoDoc(paper=paper, video=VideoMeta(uri="v", duration_s=15.0),
                    transcript=lines, segments=segments)


class TestSuggest:
    def test_single_segment_reduces_to_combined_order(self):
        doc = small_doc()
        doc = dataclasses.replace(doc, segments=doc.segments[:1])
        ranked = suggest(doc, "s0", LinkerConfig(top_k=3))
        texts = [doc.segment_text(s) for s in doc.segments]
        m = score_matrix(texts, doc.paper.passages, LinkerConfig())
        combined_order = sorted(m.text_columns, key=lambda c: (-m.combined[0, c], c))
        assert [r.passage_id for r in ranked] == \
            [doc.paper.passages[c].id for c in combined_order]

    def test_deterministic_for_same_doc_and_config(self):
        doc = small_doc()
        assert suggest(doc, "s1") == suggest(doc, "s1")

    def test_middle_segment_top1_matches_enumeration(self):
        doc = small_doc()
        texts = [doc.segment_text(s) for s in doc.segments]
        m = score_matrix(texts, doc.paper.passages, LinkerConfig())
        want_path, _, _ = align_by_enumeration(m.emissions, m.text_columns, 0.6, 5)
        ranked = suggest(doc, "s1", LinkerConfig(p_forward=0.6))
        assert ranked[0].passage_id == doc.paper.passages[want_path[1]].id

    def test_unknown_segment_raises(self):
        with pytest.raises(NotFound):
            suggest(small_doc(), "nope")

    def test_returns_min_top_k_and_text_passages(self):
        doc = small_doc()
        ranked = suggest(doc, "s0", LinkerConfig(top_k=5))
        assert len(ranked) == 3  # only three text passages exist
        assert "fig" not in [r.passage_id for r in ranked]

    def test_suggest_all_covers_every_segment(self):
        doc = small_doc()
        out = suggest_all(doc)
        assert set(out) == {"s0", "s1", "s2"}


class TestRandomSectionBaseline:
    def test_single_section_forced_choice(self):
        passages = (_passage("p0", "first"), _passage("p1", "second"))
        doc = dataclasses.replace(
            small_doc(),
            paper=PaperDocument(paper_id="x", title="t", passages=passages))
        picks = baseline_random_section(doc, seed=3)
        assert picks == ["p0", "p0", "p0"]

    def test_seed_reproducibility(self):
        doc = make_linked_corpus(5)
        assert baseline_random_section(doc, 42) == baseline_random_section(doc, 42)
        assert baseline_random_section(doc, 42) != baseline_random_section(doc, 43)

    def test_section_frequencies_within_three_sigma(self):
        passages = []
        for s in range(4):
            passages.append(_passage(f"p{s}", f"text {s}", section=f"{s} Sec"))
            passages.append(_passage(f"q{s}", f"more {s}", section=f"{s} Sec"))
        segments = tuple(
            VideoSegment(id=f"s{i}", start_s=float(i), end_s=i + 1.0)
            for i in range(10_000)
        )
        doc = PapeoDoc(
            paper=PaperDocument(paper_id="x", title="t", passages=tuple(passages)),
            video=VideoMeta(uri="v", duration_s=10_000.0),
            segments=segments,
        )
        picks = baseline_random_section(doc, seed=7)
        counts = Counter(picks)
        sigma = math.sqrt(0.25 * 0.75 / 10_000)
        for pid in ("p0", "p1", "p2", "p3"):
            assert abs(counts[pid] / 10_000 - 0.25) <= 3 * sigma

    def test_first_paragraph_of_each_section_only(self):
        doc = make_linked_corpus(2)
        first_by_section = {}
        for p in doc.paper.passages:
            if p.kind == "paragraph" and p.section_path not in first_by_section:
                first_by_section[p.section_path] = p.id
        picks = set(baseline_random_section(doc, seed=1))
        assert picks <= set(first_by_section.values())
