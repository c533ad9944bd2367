import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from papeo.errors import InputError
from papeo.frames import FrameRecord
from papeo.model import TranscriptLine
from papeo.segmentation import (SegmenterConfig, boundaries_to_segments,
                                hsv_frame_delta, ncc, segment_by_hsv,
                                segment_by_punctuation, segment_by_template)
from papeo.synth import make_slide_deck


def solid(r, g, b, shape=(20, 30)):
    img = np.zeros((*shape, 3), dtype=np.uint8)
    img[..., 0], img[..., 1], img[..., 2] = r, g, b
    return img


def _lines(*specs):
    return [TranscriptLine(index=i, start_s=float(a), end_s=float(b), text=t)
            for i, (t, a, b) in enumerate(specs)]


class TestPunctuation:
    def test_boundary_per_punctuated_line(self):
        lines = _lines(("A.", 0, 2), ("B", 2, 4), ("C?", 4, 6))
        assert segment_by_punctuation(lines) == [2.0, 6.0]

    def test_no_punctuation_no_boundaries(self):
        assert segment_by_punctuation(_lines(("hello there", 0, 2))) == []

    def test_substring_containment_counts(self):
        # "v1.2 shipped" contains a period, so the line emits a boundary
        assert segment_by_punctuation(_lines(("v1.2 shipped", 0, 2))) == [2.0]

    def test_duplicate_end_times_deduplicated(self):
        lines = _lines(("a.", 0, 2), ("b!", 1, 2))
        assert segment_by_punctuation(lines) == [2.0]


class TestHsv:
    def test_constant_frames_no_boundary(self):
        frames = [FrameRecord(t / 2, solid(10, 200, 30)) for t in range(10)]
        assert segment_by_hsv(frames, SegmenterConfig(threshold=1)) == []

    def test_red_to_blue_cut_matches_hand_computed_delta(self):
        # pure red hue 0, pure blue hue 240: circular distance 120 degrees,
        # scaled by 255/180 -> 170; S and V identical -> mean delta 170/3
        red, blue = solid(255, 0, 0), solid(0, 0, 255)
        assert hsv_frame_delta(red, blue) == pytest.approx(170.0 / 3.0)
        frames = [FrameRecord(t / 2, red if t / 2 < 4.0 else blue) for t in range(21)]
        cfg = SegmenterConfig(threshold=50.0)
        assert segment_by_hsv(frames, cfg) == [4.0]

    def test_min_segment_gate_suppresses_second_cut(self):
        red, blue, green = solid(255, 0, 0), solid(0, 0, 255), solid(0, 255, 0)

        def slide(t):
            return red if t < 4 else blue if t < 8 else green

        frames = [FrameRecord(t / 2, slide(t / 2)) for t in range(25)]
        assert segment_by_hsv(frames, SegmenterConfig(threshold=50)) == [4.0, 8.0]
        # the first boundary is not gated against the video start
        assert segment_by_hsv(
            frames, SegmenterConfig(threshold=50, min_segment_s=6)) == [4.0]

    def test_hue_wraparound_is_circular(self):
        # hues 10 and 350 are 20 degrees apart on the circle, not 340
        a = solid(255, 43, 0)   # ~10 degrees
        b = solid(255, 0, 43)   # ~350 degrees
        assert hsv_frame_delta(a, b) < hsv_frame_delta(solid(255, 0, 0), solid(0, 255, 0))

    def test_dimension_mismatch(self):
        frames = [FrameRecord(0.0, solid(1, 1, 1)),
                  FrameRecord(1.0, solid(1, 1, 1, shape=(10, 10)))]
        with pytest.raises(InputError):
            segment_by_hsv(frames, SegmenterConfig())


def ncc_oracle(a, b):
    """Brute-force per-pixel NCC, written against the same definition but
    with explicit loops over a small frame."""
    def gray(img):
        out = []
        for row in img:
            out.append([0.299 * float(p[0]) + 0.587 * float(p[1]) + 0.114 * float(p[2])
                        for p in row])
        return out

    ga, gb = gray(a), gray(b)
    n = len(ga) * len(ga[0])
    mean_a = sum(sum(r) for r in ga) / n
    mean_b = sum(sum(r) for r in gb) / n
    num = sum((ga[i][j] - mean_a) * (gb[i][j] - mean_b)
              for i in range(len(ga)) for j in range(len(ga[0])))
    var_a = sum((ga[i][j] - mean_a) ** 2 for i in range(len(ga)) for j in range(len(ga[0])))
    var_b = sum((gb[i][j] - mean_b) ** 2 for i in range(len(ga)) for j in range(len(ga[0])))
    if var_a == 0 or var_b == 0:
        return 1.0 - abs(mean_a - mean_b) / 255.0
    return num / (var_a * var_b) ** 0.5


class TestTemplate:
    def test_identical_frames_no_boundary(self):
        rng = np.random.default_rng(1)
        img = rng.integers(0, 256, (16, 24, 3), dtype=np.uint8)
        frames = [FrameRecord(float(t), img) for t in range(8)]
        assert ncc(img, img) == 1.0
        assert segment_by_template(frames, SegmenterConfig(threshold=0.9)) == []

    def test_hard_cut_between_static_slides(self):
        rng = np.random.default_rng(2)
        a = rng.integers(0, 256, (12, 16, 3), dtype=np.uint8)
        b = rng.integers(0, 256, (12, 16, 3), dtype=np.uint8)
        assert ncc(a, b) == pytest.approx(ncc_oracle(a, b), abs=1e-9)
        assert ncc(a, b) < 0.9
        frames = [FrameRecord(t / 2, a if t / 2 < 5.0 else b) for t in range(21)]
        assert segment_by_template(frames, SegmenterConfig(threshold=0.9)) == [5.0]

    def test_gradual_fade_crosses_threshold_once_and_reanchors(self):
        rng = np.random.default_rng(3)
        a = rng.integers(0, 256, (12, 16, 3), dtype=np.uint8)
        b = rng.integers(0, 256, (12, 16, 3), dtype=np.uint8)
        frames = []
        steps = 11
        for t in range(steps):
            alpha = t / (steps - 1)
            mixed = np.clip((1 - alpha) * a + alpha * b, 0, 255).astype(np.uint8)
            frames.append(FrameRecord(float(t), mixed))
        # threshold low enough that only the accumulated fade trips it
        sims = [ncc_oracle(a, f.image) for f in frames]
        crossing = next(i for i, s in enumerate(sims) if s < 0.6)
        got = segment_by_template(frames, SegmenterConfig(threshold=0.6))
        assert got[0] == float(crossing)
        # after re-anchoring near b, remaining fade frames stay similar
        assert len(got) == 1

    def test_ncc_against_oracle_on_random_pairs(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            a = rng.integers(0, 256, (8, 9, 3), dtype=np.uint8)
            b = rng.integers(0, 256, (8, 9, 3), dtype=np.uint8)
            assert ncc(a, b) == pytest.approx(ncc_oracle(a, b), abs=1e-9)

    def test_flat_frames_use_mean_fallback(self):
        a, b = solid(100, 100, 100), solid(100, 100, 100)
        assert ncc(a, b) == 1.0
        assert ncc(solid(0, 0, 0), solid(255, 255, 255)) == 0.0


class TestDetectorProperties:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000),
           st.integers(min_value=2, max_value=12),
           st.sampled_from([0.0, 2.0, 5.0]))
    def test_sorted_increasing_and_min_gap(self, seed, n_frames, min_gap):
        rng = np.random.default_rng(seed)
        frames = [
            FrameRecord(float(t), rng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
            for t in range(n_frames)
        ]
        for detect, threshold in ((segment_by_hsv, 20.0), (segment_by_template, 0.5)):
            got = detect(frames, SegmenterConfig(threshold=threshold, min_segment_s=min_gap))
            assert got == sorted(set(got))
            assert all(b2 - b1 >= min_gap for b1, b2 in zip(got, got[1:]))

    @settings(max_examples=15, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_duplicate_final_frame_is_invariant(self, seed):
        rng = np.random.default_rng(seed)
        frames = [
            FrameRecord(float(t), rng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
            for t in range(6)
        ]
        extended = frames + [FrameRecord(6.0, frames[-1].image)]
        for detect, threshold in ((segment_by_hsv, 20.0), (segment_by_template, 0.5)):
            cfg = SegmenterConfig(threshold=threshold)
            assert detect(frames, cfg) == detect(extended, cfg)


class TestSlideDeckRecovery:
    @pytest.mark.parametrize("style, detect, threshold",
                             [("solid", segment_by_hsv, 20.0),
                              ("solid", segment_by_template, 0.9),
                              ("textured", segment_by_template, 0.9)])
    def test_planted_cuts_recovered_exactly(self, style, detect, threshold):
        cuts = [4.0, 9.5, 15.0]
        frames = make_slide_deck(cuts, duration_s=20.0, style=style, seed=5)
        got = detect(frames, SegmenterConfig(threshold=threshold))
        assert got == cuts


class TestBoundariesToSegments:
    def test_single_boundary_partitions(self):
        segments = boundaries_to_segments([4.0], 10.0)
        assert [(s.start_s, s.end_s) for s in segments] == [(0.0, 4.0), (4.0, 10.0)]

    def test_no_boundaries_single_segment(self):
        segments = boundaries_to_segments([], 10.0)
        assert [(s.start_s, s.end_s) for s in segments] == [(0.0, 10.0)]

    def test_boundary_at_duration_dropped(self):
        segments = boundaries_to_segments([10.0], 10.0)
        assert len(segments) == 1

    def test_boundary_outside_duration_rejected(self):
        with pytest.raises(InputError):
            boundaries_to_segments([12.0], 10.0)

    def test_line_midpoints_assign_line_indices(self):
        lines = _lines(("a", 0, 2), ("b", 2, 4), ("c", 4, 10))
        segments = boundaries_to_segments([4.0], 10.0, lines)
        assert segments[0].line_indices == (0, 1)
        assert segments[1].line_indices == (2,)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=10_000), max_size=8),
           st.integers(min_value=1, max_value=10_000))
    def test_output_is_always_a_valid_partition(self, raw, duration_ms):
        duration = duration_ms / 1000
        boundaries = [b / 1000 for b in raw if b / 1000 <= duration]
        segments = boundaries_to_segments(boundaries, duration)
        assert segments[0].start_s == 0.0
        assert segments[-1].end_s == duration
        for a, b in zip(segments, segments[1:]):
            assert a.end_s == b.start_s
        assert all(s.start_s < s.end_s for s in segments)
