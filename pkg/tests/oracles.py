"""Independent brute-force oracles the library implementations are checked
against. Everything here is deliberately written with plain loops (or plain
path enumeration) and shares no code with the package."""

import itertools
import math

import numpy as np


# -- longest common subsequence by subset enumeration -----------------------

def _is_subsequence(needle, haystack):
    it = iter(haystack)
    return all(any(x == y for y in it) for x in needle)


def lcs_by_enumeration(a, b) -> int:
    """Longest common subsequence length by enumerating every subsequence of
    the shorter list (exponential, fine for lengths <= 12)."""
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    best = 0
    for mask in range(1 << len(short)):
        sub = [short[i] for i in range(len(short)) if mask >> i & 1]
        if len(sub) > best and _is_subsequence(sub, long_):
            best = len(sub)
    return best


def rouge_oracle(candidate, reference) -> float:
    lcs = lcs_by_enumeration(candidate, reference)
    if lcs == 0:
        return 0.0
    p = lcs / len(candidate)
    r = lcs / len(reference)
    return 2 * p * r / (p + r)


# -- hand-rolled TF-IDF ------------------------------------------------------

def tfidf_cosine_oracle(a, b, corpus, tokenize):
    """Cosine of TF-IDF vectors computed with dicts and math.log only."""
    docs = [tokenize(t) for t in corpus]
    df = {}
    for toks in docs:
        for tok in set(toks):
            df[tok] = df.get(tok, 0) + 1
    n = len(corpus)

    def vec(text):
        counts = {}
        for tok in tokenize(text):
            if tok in df:
                counts[tok] = counts.get(tok, 0) + 1
        return {t: c * (math.log((1 + n) / (1 + df[t])) + 1.0)
                for t, c in counts.items()}

    va, vb = vec(a), vec(b)
    dot = sum(w * vb.get(t, 0.0) for t, w in va.items())
    na = math.sqrt(sum(w * w for w in va.values()))
    nb = math.sqrt(sum(w * w for w in vb.values()))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


# -- chain decoding by exhaustive path enumeration ---------------------------

def transition_table(n: int, p_forward: float):
    """Plain-loop transition probabilities: mass p_forward split uniformly
    over in-order targets, the rest over reverse targets; the first column
    has no reverse targets so its row is uniform."""
    table = [[0.0] * n for _ in range(n)]
    for i in range(n):
        forward = list(range(i, n))
        backward = list(range(0, i))
        for j in range(n):
            if not backward:
                table[i][j] = 1.0 / n
            elif j >= i:
                table[i][j] = p_forward / len(forward)
            else:
                table[i][j] = (1.0 - p_forward) / len(backward)
    return table


def _log(x: float) -> float:
    return math.log(x) if x > 0 else float("-inf")


def align_by_enumeration(emissions, text_columns, p_forward, top_k):
    """Exhaustive path scoring with plain Python loops.

    Returns (path, rankings, constrained) shaped like the library's
    alignment result plus the raw best-path-through-state scores:
    rankings over text columns sorted by best constrained path score, ties
    to the lower column; ``constrained[s][j]`` the best full-path log score
    through state (s, j).
    """
    emissions = [list(map(float, row)) for row in emissions]
    n_seg, n_pas = len(emissions), len(emissions[0])
    t = transition_table(n_pas, p_forward)
    prior = _log(1.0 / n_pas)

    best = {}
    for path in itertools.product(range(n_pas), repeat=n_seg):
        score = prior + _log(emissions[0][path[0]])
        for s in range(1, n_seg):
            score += _log(t[path[s - 1]][path[s]]) + _log(emissions[s][path[s]])
        for s in range(n_seg):
            key = (s, path[s])
            if key not in best or score > best[key]:
                best[key] = score

    rankings = []
    for s in range(n_seg):
        scored = sorted(
            ((j, best.get((s, j), float("-inf"))) for j in text_columns),
            key=lambda item: (-item[1], item[0]),
        )
        rankings.append(tuple(scored[:top_k]))
    path = tuple(r[0][0] for r in rankings)
    constrained = [
        [best.get((s, j), float("-inf")) for j in range(n_pas)]
        for s in range(n_seg)
    ]
    return path, tuple(rankings), constrained


def assert_alignment_matches_enumeration(result, emissions, text_columns,
                                         p_forward, top_k, tol=1e-9):
    """Check a library alignment against exhaustive enumeration, robust to
    float noise on exactly-tied paths: every reported score must match the
    oracle's score for that column, score profiles must agree position by
    position, and the path must be optimal."""
    _, _, constrained = align_by_enumeration(emissions, text_columns,
                                             p_forward, top_k)
    for s, ranking in enumerate(result.rankings):
        oracle_row = {j: constrained[s][j] for j in text_columns}
        profile = sorted(oracle_row.values(), reverse=True)[:top_k]
        got_scores = [score for _, score in ranking]
        assert len(got_scores) == len(profile)
        for got, want in zip(got_scores, profile):
            assert _close(got, want, tol), (s, got_scores, profile)
        for col, score in ranking:
            assert _close(score, oracle_row[col], tol), (s, col, score, oracle_row[col])
        assert _close(oracle_row[result.path[s]], profile[0], tol)


def _close(a, b, tol):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= tol


def align_by_enumeration_fast(emissions, text_columns, p_forward, top_k):
    """Same exhaustive enumeration, vectorized so the acceptance suite can
    grind through hundreds of matrices: a dense (n_pas, ..., n_pas) grid
    holds every possible path's log score (axis s = the passage chosen for
    segment s), built by broadcasting the emission and transition terms."""
    emissions = np.asarray(emissions, dtype=float)
    n_seg, n_pas = emissions.shape
    with np.errstate(divide="ignore"):
        log_e = np.log(emissions)
        log_t = np.log(np.asarray(transition_table(n_pas, p_forward)))

    shape = (n_pas,) * n_seg
    scores = np.full(shape, math.log(1.0 / n_pas))
    for s in range(n_seg):
        axis_shape = [1] * n_seg
        axis_shape[s] = n_pas
        scores = scores + log_e[s].reshape(axis_shape)
    for s in range(1, n_seg):
        axis_shape = [1] * n_seg
        axis_shape[s - 1] = n_pas
        axis_shape[s] = n_pas
        scores = scores + log_t.reshape(axis_shape)

    constrained = np.empty((n_seg, n_pas))
    for s in range(n_seg):
        other_axes = tuple(a for a in range(n_seg) if a != s)
        constrained[s] = scores.max(axis=other_axes) if other_axes else scores

    cols = np.asarray(text_columns)
    rankings = []
    for s in range(n_seg):
        row = constrained[s, cols]
        order = np.lexsort((cols, -row))
        rankings.append(tuple(
            (int(cols[i]), float(row[i])) for i in order[:top_k]
        ))
    path = tuple(r[0][0] for r in rankings)
    return path, tuple(rankings), constrained


# -- optimal bipartite matching by assignment enumeration --------------------

def max_matching_by_enumeration(predicted, truth, tolerance):
    """Maximum one-to-one matching size, trying every injective assignment
    of predictions to ground-truth boundaries (exponential, keep inputs
    small)."""
    compatible = [
        [j for j, t in enumerate(truth) if abs(p - t) <= tolerance]
        for p in predicted
    ]

    def best(i, used):
        if i == len(compatible):
            return 0
        top = best(i + 1, used)
        for j in compatible[i]:
            if not used >> j & 1:
                top = max(top, 1 + best(i + 1, used | 1 << j))
        return top

    return best(0, 0)
