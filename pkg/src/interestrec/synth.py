"""Seeded synthetic topic corpus with user profiles, for desk-scale benchmarks."""

from __future__ import annotations

import math

import numpy as np

from interestrec.corpus import Corpus, UserProfile

TOPIC_VOCAB = 200
SHARED_VOCAB = 100
DOC_TOKENS = 120
TOPIC_FRACTION = 0.8


def topic_word(topic: int, j: int) -> str:
    return f"t{topic}w{j:03d}"


def shared_word(j: int) -> str:
    return f"sw{j:03d}"


def synth_corpus(topics=6, docs_per_topic=100, users=20, docs_per_user=60, topics_per_user=2, seed=0):
    """Generate ``(corpus, profiles, doc_topics)``.

    Every topic owns a disjoint vocabulary of 200 words; 100 more words are
    shared by all topics. Each document has 120 tokens, 96 drawn uniformly
    from its topic's words and 24 from the shared words. A user is assigned
    between 1 and ``topics_per_user`` topics (at least enough to hold
    ``docs_per_user`` documents) and samples documents from them without
    replacement.
    """
    if min(topics, docs_per_topic, users, docs_per_user, topics_per_user) < 1:
        raise ValueError("all counts must be >= 1")
    if topics_per_user > topics:
        raise ValueError("topics_per_user cannot exceed topics")
    min_topics = math.ceil(docs_per_user / docs_per_topic)
    if min_topics > topics_per_user:
        raise ValueError(
            f"{docs_per_user} documents per user need at least {min_topics} topics of {docs_per_topic} documents"
        )
    rng = np.random.default_rng(seed)
    n_topic = round(DOC_TOKENS * TOPIC_FRACTION)
    texts = {}
    doc_topics = {}
    width = len(str(topics * docs_per_topic - 1))
    for topic in range(topics):
        for i in range(docs_per_topic):
            doc_id = f"doc{topic * docs_per_topic + i:0{width}d}"
            words = [topic_word(topic, j) for j in rng.integers(TOPIC_VOCAB, size=n_topic)]
            words += [shared_word(j) for j in rng.integers(SHARED_VOCAB, size=DOC_TOKENS - n_topic)]
            order = rng.permutation(DOC_TOKENS)
            texts[doc_id] = " ".join(words[k] for k in order)
            doc_topics[doc_id] = topic
    ids = list(texts)
    profiles = []
    uwidth = len(str(users - 1))
    for u in range(users):
        n_topics = int(rng.integers(min_topics, topics_per_user + 1))
        chosen = set(rng.choice(topics, size=n_topics, replace=False).tolist())
        pool = [d for d in ids if doc_topics[d] in chosen]
        picked = rng.choice(len(pool), size=docs_per_user, replace=False)
        profiles.append(UserProfile(f"user{u:0{uwidth}d}", frozenset(pool[i] for i in picked)))
    return Corpus.from_texts(texts), profiles, doc_topics
