"""Text similarity providers for document matching and grounding.

Two implementations of the same small interface: a self-contained TF-IDF
cosine provider, and a client for an external embedding service. Both are
deterministic for fixed inputs.
"""

from __future__ import annotations

import json
import math
import re
import urllib.error
import urllib.request
from collections import Counter
from typing import Iterable, Protocol, Sequence

import numpy as np

from .errors import EmbeddingServiceError

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class SimilarityProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...

    def similarity(self, a: str, b: str) -> float: ...


class TfidfSimilarity:
    """Token-level TF-IDF cosine similarity.

    Document frequencies are frozen at construction from corpus_texts,
    using smoothed idf so every token keeps positive weight. similarity()
    scores arbitrary text pairs, extending the weighting to tokens outside
    the corpus, which keeps similarity(a, a) == 1.0 for any text with at
    least one token. embed() projects onto the fixed corpus vocabulary so
    vectors from different calls share one dimension; tokens outside the
    vocabulary contribute nothing there.
    """

    def __init__(self, corpus_texts: Iterable[str]):
        docs = [tokenize(text) for text in corpus_texts]
        self._num_docs = len(docs)
        df: Counter[str] = Counter()
        for tokens in docs:
            df.update(set(tokens))
        self._df = dict(df)
        self._vocab = {token: i for i, token in enumerate(sorted(self._df))}

    def _idf(self, token: str) -> float:
        return math.log((1 + self._num_docs) / (1 + self._df.get(token, 0))) + 1.0

    def _weights(self, text: str) -> dict[str, float]:
        return {t: count * self._idf(t) for t, count in Counter(tokenize(text)).items()}

    def similarity(self, a: str, b: str) -> float:
        wa = self._weights(a)
        wb = self._weights(b)
        if not wa or not wb:
            return 0.0
        if wa == wb:
            return 1.0
        # Summing over sorted tokens keeps the result exactly symmetric.
        dot = sum(wa[t] * wb[t] for t in sorted(wa.keys() & wb.keys()))
        norm_a = math.sqrt(sum(w * w for w in wa.values()))
        norm_b = math.sqrt(sum(w * w for w in wb.values()))
        return max(-1.0, min(1.0, dot / (norm_a * norm_b)))

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        vectors = []
        for text in texts:
            vec = np.zeros(len(self._vocab))
            for token, count in Counter(tokenize(text)).items():
                index = self._vocab.get(token)
                if index is not None:
                    vec[index] = count * self._idf(token)
            norm = np.linalg.norm(vec)
            if norm > 0:
                vec = vec / norm
            vectors.append(vec)
        return vectors


class HttpEmbeddingProvider:
    """Client for an external embedding service.

    POSTs {"texts": [...]} to {base_url}/embed and expects
    {"vectors": [[...], ...]} back. Any transport failure, timeout, or
    malformed payload raises EmbeddingServiceError; there is deliberately
    no silent lexical fallback.
    """

    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        texts = list(texts)
        payload = json.dumps({"texts": texts}).encode("utf-8")
        request = urllib.request.Request(
            self.base_url + "/embed",
            data=payload,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                body = response.read()
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise EmbeddingServiceError(f"embedding service request failed: {exc}") from exc
        try:
            data = json.loads(body)
            vectors = [np.asarray(v, dtype=float) for v in data["vectors"]]
        except (ValueError, KeyError, TypeError) as exc:
            raise EmbeddingServiceError(f"malformed embedding response: {exc}") from exc
        if len(vectors) != len(texts):
            raise EmbeddingServiceError(
                f"expected {len(texts)} vectors, got {len(vectors)}"
            )
        if vectors and any(v.shape != vectors[0].shape for v in vectors):
            raise EmbeddingServiceError("embedding vectors have mismatched dimensions")
        return vectors

    def similarity(self, a: str, b: str) -> float:
        va, vb = self.embed([a, b])
        norm_a = float(np.linalg.norm(va))
        norm_b = float(np.linalg.norm(vb))
        if norm_a == 0.0 or norm_b == 0.0:
            return 0.0
        return float(np.dot(va, vb) / (norm_a * norm_b))
