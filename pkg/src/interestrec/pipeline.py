"""End-to-end embedding recipes for the two document representations."""

from __future__ import annotations

from dataclasses import dataclass, field

from interestrec import dimred, lsa, pvec
from interestrec.corpus import Corpus
from interestrec.embeddings import EmbeddingMatrix

REPRESENTATIONS = ("lsa", "pvec")


@dataclass(frozen=True)
class EmbedOptions:
    rank: int = lsa.DEFAULT_RANK
    score_range: tuple[float, float] = lsa.DEFAULT_SCORE_RANGE
    pv: pvec.PvConfig = field(default_factory=pvec.PvConfig)
    kpca_components: int = dimred.DEFAULT_COMPONENTS
    gamma: float | None = None
    seed: int = 0


def embed(corpus: Corpus, rep: str, options: EmbedOptions = EmbedOptions(), progress=None) -> EmbeddingMatrix:
    """LSA: tf-idf, filter, SVD. pvec: paragraph vectors, then RBF kernel PCA."""
    if rep == "lsa":
        return lsa.lsa_embed(corpus, options.rank, options.score_range, options.seed)
    if rep == "pvec":
        vectors = pvec.paragraph_vectors(corpus, options.pv, progress)
        if options.kpca_components <= 0:
            return vectors
        reduced, _ = dimred.kpca_reduce(vectors, options.kpca_components, options.gamma, options.seed)
        return reduced
    raise ValueError(f"unknown representation {rep!r}; expected one of {REPRESENTATIONS}")
