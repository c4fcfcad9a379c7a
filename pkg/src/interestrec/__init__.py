"""Content-based document recommendation from Gaussian mixture models of user interest."""

from interestrec.corpus import Corpus, Document, UserProfile, load_corpus, load_profiles, tokenize
from interestrec.embeddings import EmbeddingMatrix, load_embeddings, save_embeddings
from interestrec.gmm import GmmConfig, GmmModel

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "Document",
    "EmbeddingMatrix",
    "GmmConfig",
    "GmmModel",
    "UserProfile",
    "load_corpus",
    "load_embeddings",
    "load_profiles",
    "save_embeddings",
    "tokenize",
]
