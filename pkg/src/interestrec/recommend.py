"""Recommendations by sampling a user's interest model and snapping to documents."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from interestrec import gmm
from interestrec.embeddings import EmbeddingMatrix


@dataclass(frozen=True)
class Recommendation:
    doc_id: str
    sample_index: int
    distance: float


class CandidateIndex:
    """Brute-force Euclidean nearest-neighbor search over a fixed document set.

    Rows are stored in ascending id order, so taking the first minimum breaks
    exact distance ties toward the lexicographically smallest id.
    """

    def __init__(self, embeddings: EmbeddingMatrix, excluded=()):
        excluded = set(excluded)
        ids = sorted(d for d in embeddings.doc_ids if d not in excluded)
        if not ids:
            raise ValueError("no candidate documents left after exclusion")
        self.doc_ids = ids
        self.vectors = embeddings.rows(ids)

    def query(self, samples) -> tuple[list[str], np.ndarray]:
        q = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        if q.shape[1] != self.vectors.shape[1]:
            raise ValueError(f"query dimension {q.shape[1]} does not match {self.vectors.shape[1]}")
        best = np.empty(q.shape[0], dtype=np.int64)
        dist2 = np.empty(q.shape[0])
        for i, x in enumerate(q):
            diff = self.vectors - x
            d2 = np.einsum("ij,ij->i", diff, diff)
            best[i] = int(np.argmin(d2))
            dist2[i] = d2[best[i]]
        return [self.doc_ids[b] for b in best], np.sqrt(dist2)


def nearest_document(sample, embeddings: EmbeddingMatrix, excluded=()) -> tuple[str, float]:
    ids, dist = CandidateIndex(embeddings, excluded).query(sample)
    return ids[0], float(dist[0])


def recommend(model: gmm.GmmModel, embeddings: EmbeddingMatrix, n: int, excluded=(), seed: int = 0) -> list[Recommendation]:
    """Draw ``n`` samples and map each to its nearest non-excluded document.

    A document drawn more than once appears once per draw.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if embeddings.dim != model.dim:
        raise ValueError(f"embedding dim {embeddings.dim} does not match model dim {model.dim}")
    index = CandidateIndex(embeddings, excluded)
    if n == 0:
        return []
    ids, dist = index.query(gmm.sample(model, n, seed))
    return [Recommendation(d, i, float(x)) for i, (d, x) in enumerate(zip(ids, dist))]


def write_recommendations(path, recs) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_index", "doc_id", "distance"])
        for r in recs:
            writer.writerow([r.sample_index, r.doc_id, format(r.distance, ".17g")])
