"""Corpus and user-profile ingestion.

Both inputs are JSONL files. Corpus records look like
``{"id": "...", "text": "..."}`` and profile records like
``{"user_id": "...", "doc_ids": ["...", ...]}``.
"""

from __future__ import annotations

import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

_log = logging.getLogger(__name__)

# Unicode letters plus ASCII digits. `[^\W_]` alone would also admit non-ASCII digits.
_TOKEN_RE = re.compile(r"(?:[^\W\d_]|[0-9])+")


class CorpusFormatError(ValueError):
    """A JSONL record could not be parsed."""

    def __init__(self, path, lineno, reason):
        super().__init__(f"{path}:{lineno}: {reason}")
        self.path = path
        self.lineno = lineno


def tokenize(raw_text: str) -> list[str]:
    """Split text into lowercase alphanumeric tokens.

    Every run of characters that are neither letters nor ASCII digits acts as
    a separator. No stemming and no stopword removal.

    >>> tokenize("state-of-the-art NLP2024")
    ['state', 'of', 'the', 'art', 'nlp2024']
    """
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(raw_text)]


@dataclass(frozen=True)
class Document:
    id: str
    raw_text: str
    tokens: tuple[str, ...] = ()


@dataclass(frozen=True)
class UserProfile:
    user_id: str
    doc_ids: frozenset[str]

    def __len__(self):
        return len(self.doc_ids)


@dataclass(frozen=True)
class Corpus:
    """Tokenized documents with a dense vocabulary and document frequencies."""

    documents: tuple[Document, ...]
    vocabulary: dict[str, int] = field(repr=False)
    doc_freq: dict[str, int] = field(repr=False)

    @classmethod
    def from_documents(cls, documents: Iterable[Document]) -> "Corpus":
        docs = []
        seen = set()
        for doc in documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)
            if not doc.tokens and doc.raw_text:
                doc = Document(doc.id, doc.raw_text, tuple(tokenize(doc.raw_text)))
            docs.append(doc)
        vocabulary: dict[str, int] = {}
        doc_freq: Counter[str] = Counter()
        for doc in docs:
            for tok in doc.tokens:
                if tok not in vocabulary:
                    vocabulary[tok] = len(vocabulary)
            doc_freq.update(set(doc.tokens))
        return cls(tuple(docs), vocabulary, {t: doc_freq[t] for t in vocabulary})

    @classmethod
    def from_texts(cls, texts: dict[str, str]) -> "Corpus":
        return cls.from_documents(Document(i, t, tuple(tokenize(t))) for i, t in texts.items())

    def __len__(self):
        return len(self.documents)

    @property
    def ids(self) -> list[str]:
        return [d.id for d in self.documents]

    def index(self) -> dict[str, int]:
        return {d.id: i for i, d in enumerate(self.documents)}

    def term_counts(self) -> Counter[str]:
        counts: Counter[str] = Counter()
        for doc in self.documents:
            counts.update(doc.tokens)
        return counts


def _read_jsonl(path) -> Iterator[tuple[int, dict]]:
    path = Path(path)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(path, lineno, f"invalid JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise CorpusFormatError(path, lineno, "expected a JSON object")
            yield lineno, record


def load_corpus(path, min_chars: int = 500) -> Corpus:
    """Read a corpus file, dropping documents shorter than ``min_chars`` characters.

    Length is measured on the raw text in code points, before tokenization.
    Vocabulary and document frequencies cover the retained documents only.
    """
    docs = []
    dropped = 0
    for lineno, rec in _read_jsonl(path):
        doc_id, text = rec.get("id"), rec.get("text")
        if not isinstance(doc_id, str) or not isinstance(text, str):
            raise CorpusFormatError(path, lineno, 'record needs string fields "id" and "text"')
        if len(text) < min_chars:
            dropped += 1
            continue
        docs.append(Document(doc_id, text, tuple(tokenize(text))))
    if dropped:
        _log.info("dropped %d documents shorter than %d characters", dropped, min_chars)
    return Corpus.from_documents(docs)


def load_profiles(path, corpus, min_docs: int = 50) -> list[UserProfile]:
    """Read user profiles, keeping only documents present in ``corpus``.

    ``corpus`` may also be any iterable of known document ids.

    Unknown document ids are dropped with a warning. Users left with fewer
    than ``min_docs`` documents are discarded.
    """
    known = set(corpus.ids) if isinstance(corpus, Corpus) else set(corpus)
    profiles = []
    for lineno, rec in _read_jsonl(path):
        user_id, doc_ids = rec.get("user_id"), rec.get("doc_ids")
        if not isinstance(user_id, str) or not isinstance(doc_ids, list):
            raise CorpusFormatError(path, lineno, 'record needs "user_id" (string) and "doc_ids" (list)')
        if not all(isinstance(d, str) for d in doc_ids):
            raise CorpusFormatError(path, lineno, "doc_ids must be strings")
        ids = set(doc_ids)
        missing = ids - known
        if missing:
            _log.warning("user %s: %d unknown document ids dropped", user_id, len(missing))
        ids &= known
        if len(ids) < max(min_docs, 1):
            _log.info("user %s discarded with %d documents", user_id, len(ids))
            continue
        profiles.append(UserProfile(user_id, frozenset(ids)))
    return profiles


def write_corpus(path, corpus: Corpus) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for doc in corpus.documents:
            fh.write(json.dumps({"id": doc.id, "text": doc.raw_text}, ensure_ascii=False) + "\n")


def write_profiles(path, profiles: Iterable[UserProfile]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="\n") as fh:
        for p in profiles:
            fh.write(json.dumps({"user_id": p.user_id, "doc_ids": sorted(p.doc_ids)}, ensure_ascii=False) + "\n")
