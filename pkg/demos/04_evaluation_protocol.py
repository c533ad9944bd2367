#!/usr/bin/env python3
"""Run the full metric protocol on a synthetic dataset: boundary P/R/F-beta
under a 3 s tolerance, top-k link accuracy for every algorithm, and 4-fold
cross-validated hyperparameter selection on the 25%/75% split."""

import statistics

from papeo.evaluation import (EvalConfig, EvalPair, evaluate_linking_pair,
                              evaluate_segmentation_pair, format_table,
                              grid_search_cv, macro_average)
from papeo.synth import make_linked_corpus

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
from corpus import planted_pair  # noqa: E402  (shared synthetic fixtures)

cfg = EvalConfig()  # tolerance 3 s, betas (1, 2, 3), k (1, 5), 4 folds

# -- segmentation: solid-slide videos with planted cut times ----------------
pairs = [planted_pair(seed) for seed in range(8)]
rows = []
for method, params in [("punctuation", {}),
                       ("hsv", {"threshold": 15.0}),
                       ("template", {"threshold": 0.85})]:
    metrics = macro_average([
        dict(evaluate_segmentation_pair(p, method, params, cfg)) for p in pairs
    ])
    rows.append([method, metrics["precision"], metrics["recall"],
                 metrics["f1"], metrics["f2"], metrics["f3"]])
print("boundary suggestion quality (8 synthetic pairs, tolerance 3 s):")
print(format_table(["Algorithm", "Precision", "Recall", "F1", "F2", "F3"], rows))

# -- linking: order-respecting corpora with recap passages -------------------
link_pairs = [EvalPair(name=f"c{s}", truth=make_linked_corpus(s))
              for s in range(12)]
rows = []
for algorithm in ("random", "embed", "rouge", "combined", "viterbi"):
    metrics = macro_average([
        dict(evaluate_linking_pair(p, algorithm, {"p_forward": 0.6}, cfg, seed=i))
        for i, p in enumerate(link_pairs)
    ])
    rows.append([algorithm, metrics["top1"], metrics["top5"]])
print("\nlink suggestion quality (12 synthetic pairs):")
print(format_table(["Algorithm", "Top-1", "Top-5"], rows))

# -- cross-validated grid search ---------------------------------------------
result = grid_search_cv(
    pairs, {"threshold": [4.0, 15.0, 80.0]},
    lambda pair, params: evaluate_segmentation_pair(pair, "hsv", params, cfg),
    target="f3", cfg=cfg, seed=0)
print("\n4-fold CV, hsv threshold grid {4, 15, 80} (train 25% / test 75%):")
for fold in result.folds:
    print(f"  fold {fold.fold}: chose threshold={fold.best_params['threshold']}"
          f"  train F3={fold.train_score:.3f}"
          f"  test F3={fold.test_metrics['f3']:.3f}")

link_cv = grid_search_cv(
    link_pairs[:8], {"p_forward": [0.5, 0.6, 0.7, 0.8, 0.9]},
    lambda pair, params: evaluate_linking_pair(pair, "viterbi", params, cfg),
    target="top1", cfg=cfg, seed=0)
chosen = link_cv.selected("p_forward")
print(f"\nselected transition probability per fold: {chosen} "
      f"(mean test top-1 {link_cv.mean_test('top1'):.3f})")
