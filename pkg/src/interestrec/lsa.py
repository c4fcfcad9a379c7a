"""LSA document vectors: tf-idf weighting, term filtering and truncated SVD."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from interestrec.corpus import Corpus
from interestrec.embeddings import EmbeddingMatrix
from interestrec.linalg import fix_signs, symmetric_eigh

DEFAULT_SCORE_RANGE = (0.3, 10.0)
DEFAULT_RANK = 10


@dataclass(frozen=True)
class TfIdfModel:
    kept_terms: dict[str, int]
    idf: np.ndarray
    score_range: tuple[float, float]

    @property
    def n_terms(self) -> int:
        return len(self.kept_terms)


@dataclass(frozen=True)
class SvdModel:
    components: np.ndarray  # (rank, n_features), orthonormal rows
    singular_values: np.ndarray

    @property
    def rank(self) -> int:
        return self.components.shape[0]


def idf_weights(corpus: Corpus) -> dict[str, float]:
    """``ln(N / df) + 1`` for every vocabulary term."""
    n = len(corpus)
    return {t: math.log(n / df) + 1.0 for t, df in corpus.doc_freq.items()}


def fit_tfidf(corpus: Corpus, score_range=DEFAULT_SCORE_RANGE) -> TfIdfModel:
    """Select terms whose maximum tf-idf over all documents lies in ``score_range``.

    tf is the raw count of the term in a document; bounds are inclusive.
    """
    if len(corpus) == 0:
        raise ValueError("cannot fit tf-idf on an empty corpus")
    low, high = score_range
    if low > high:
        raise ValueError(f"empty score range [{low}, {high}]")
    idf = idf_weights(corpus)
    max_tf: Counter[str] = Counter()
    for doc in corpus.documents:
        for term, count in Counter(doc.tokens).items():
            if count > max_tf[term]:
                max_tf[term] = count
    kept = [t for t in corpus.vocabulary if low <= max_tf[t] * idf[t] <= high]
    return TfIdfModel(
        kept_terms={t: j for j, t in enumerate(kept)},
        idf=np.array([idf[t] for t in kept], dtype=np.float64),
        score_range=(float(low), float(high)),
    )


def transform_tfidf(model: TfIdfModel, corpus: Corpus) -> EmbeddingMatrix:
    """Dense document-by-kept-term tf-idf matrix; unknown or filtered terms score 0."""
    out = np.zeros((len(corpus), model.n_terms))
    for i, doc in enumerate(corpus.documents):
        for term, count in Counter(doc.tokens).items():
            j = model.kept_terms.get(term)
            if j is not None:
                out[i, j] = count * model.idf[j]
    return EmbeddingMatrix(tuple(corpus.ids), out)


def _complete_basis(basis, count, rng):
    # Orthonormal vectors orthogonal to the columns of ``basis``.
    m = basis.shape[0]
    extra = []
    while len(extra) < count:
        v = rng.standard_normal(m)
        for _ in range(2):
            for q in [basis[:, j] for j in range(basis.shape[1])] + extra:
                v -= (q @ v) * q
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            extra.append(v / norm)
    return np.column_stack(extra) if extra else np.zeros((m, 0))


def fit_svd(matrix: EmbeddingMatrix | np.ndarray, rank: int = DEFAULT_RANK, seed: int = 0, method: str = "auto") -> SvdModel:
    """Top-``rank`` right singular vectors via the eigendecomposition of the smaller Gram matrix.

    Components for numerically zero singular values are completed with a
    seeded orthonormal basis so the returned rows are always orthonormal.
    """
    a = matrix.vectors if isinstance(matrix, EmbeddingMatrix) else np.asarray(matrix, dtype=np.float64)
    n, m = a.shape
    if rank < 1 or rank > min(n, m):
        raise ValueError(f"rank must be in [1, {min(n, m)}], got {rank}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix must be finite")
    if m <= n:
        w, v = symmetric_eigh(a.T @ a, method)
        sv = np.sqrt(np.clip(w[:rank], 0.0, None))
        v = v[:, :rank]
    else:
        w, u = symmetric_eigh(a @ a.T, method)
        sv = np.sqrt(np.clip(w[:rank], 0.0, None))
        # Gram eigenvalues carry absolute error ~ eps * sigma_max**2.
        cutoff = np.sqrt(max(n, m) * np.finfo(float).eps) * max(sv[0], 1e-300)
        good = sv > cutoff
        v = np.zeros((m, rank))
        v[:, good] = (a.T @ u[:, :rank][:, good]) / sv[good]
        if not good.all():
            v[:, ~good] = _complete_basis(v[:, good], int((~good).sum()), np.random.default_rng(seed))
            sv[~good] = 0.0
    return SvdModel(components=fix_signs(v).T.copy(), singular_values=sv)


def project_svd(model: SvdModel, matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Coordinates of each row on the retained right singular vectors."""
    if matrix.dim != model.components.shape[1]:
        raise ValueError(f"matrix has {matrix.dim} columns, model expects {model.components.shape[1]}")
    return EmbeddingMatrix(matrix.doc_ids, matrix.vectors @ model.components.T)


def reconstruct(model: SvdModel, matrix: EmbeddingMatrix) -> np.ndarray:
    return project_svd(model, matrix).vectors @ model.components


def lsa_embed(corpus: Corpus, rank: int = DEFAULT_RANK, score_range=DEFAULT_SCORE_RANGE, seed: int = 0) -> EmbeddingMatrix:
    """tf-idf, filter, then project onto the top ``rank`` singular directions."""
    tfidf = transform_tfidf(fit_tfidf(corpus, score_range), corpus)
    return project_svd(fit_svd(tfidf, rank, seed), tfidf)
