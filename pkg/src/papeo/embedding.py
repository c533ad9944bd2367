"""Text-embedding providers behind one tiny protocol.

The built-in provider is a deterministic TF-IDF bag-of-words embedder fit on
the corpus at hand (typically the paper passages plus the transcript); it
needs no model downloads and keeps the whole pipeline reproducible. Neural
sentence embedders plug in through :class:`HttpEmbedder`, a generic batched
client for any service speaking ``{"texts": [...]} -> {"vectors": [[...]]}``.
"""

from __future__ import annotations

import json
import math
import urllib.error
import urllib.request
from collections import Counter
from typing import Protocol, Sequence

import numpy as np

from .errors import EmbedError, InputError
from .textutil import norm_tokens

__all__ = ["EmbeddingProvider", "TfidfEmbedder", "HttpEmbedder", "cosine_similarity"]


class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> np.ndarray:
        """Return one float vector per text, all of equal length."""
        ...


class TfidfEmbedder:
    """L2-normalized TF-IDF vectors over unigram tokens.

    ``idf(t) = ln((1 + N) / (1 + df(t))) + 1`` with N the number of fit
    documents; unseen tokens get the df=0 weight. Stateless after fit, hence
    safe to share across threads.
    """

    def __init__(self, corpus: Sequence[str] = ()):
        self._vocab: dict[str, int] = {}
        self._idf: np.ndarray = np.zeros(0)
        self._default_idf = 1.0
        if corpus:
            self.fit(corpus)

    def fit(self, corpus: Sequence[str]) -> "TfidfEmbedder":
        if not corpus:
            raise InputError("cannot fit an embedder on an empty corpus")
        df: Counter[str] = Counter()
        for text in corpus:
            df.update(set(norm_tokens(text)))
        self._vocab = {tok: i for i, tok in enumerate(sorted(df))}
        n = len(corpus)
        self._idf = np.array(
            [math.log((1 + n) / (1 + df[tok])) + 1.0 for tok in sorted(df)]
        )
        self._default_idf = math.log(1 + n) + 1.0
        return self

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        # tokens outside the fit vocabulary are dropped: similarity is
        # defined over the corpus vocabulary only
        dim = max(1, len(self._vocab))
        out = np.zeros((len(texts), dim))
        for row, text in enumerate(texts):
            for tok, count in Counter(norm_tokens(text)).items():
                col = self._vocab.get(tok)
                if col is None:
                    continue
                out[row, col] = count * self._idf[col]
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        np.divide(out, norms, out=out, where=norms > 0)
        return out


class HttpEmbedder:
    """Batched client for an external embedding service.

    POSTs ``{"texts": [...]}`` and expects ``{"vectors": [[...], ...]}``.
    Any transport or contract failure raises :class:`EmbedError`; callers may
    fall back to lexical-only scoring.
    """

    def __init__(self, endpoint: str, batch_size: int = 32, timeout_s: float = 30.0):
        if batch_size < 1:
            raise InputError("batch_size must be >= 1")
        self.endpoint = endpoint
        self.batch_size = batch_size
        self.timeout_s = timeout_s

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        vectors: list[list[float]] = []
        for at in range(0, len(texts), self.batch_size):
            vectors.extend(self._call(list(texts[at:at + self.batch_size])))
        arr = np.asarray(vectors, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != len(texts):
            raise EmbedError(f"provider returned {arr.shape} for {len(texts)} texts")
        return arr

    def _call(self, batch: list[str]) -> list[list[float]]:
        request = urllib.request.Request(
            self.endpoint,
            data=json.dumps({"texts": batch}).encode("utf-8"),
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout_s) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError, ValueError) as e:
            raise EmbedError(f"embedding service call failed: {e}") from e
        vectors = payload.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(batch):
            raise EmbedError("embedding service returned a malformed response")
        return vectors


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    norm = float(np.linalg.norm(a) * np.linalg.norm(b))
    if norm == 0:
        return 0.0
    return float(np.dot(a, b) / norm)
