"""Paragraph vectors trained with negative sampling.

Distributed-memory variant: the hidden vector is the mean of the document's
paragraph vector and the surrounding context word vectors, and it predicts
the center word. Word vectors keep their random initialization; only the
paragraph vectors and the output layer are trained.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np

from interestrec.corpus import Corpus
from interestrec.embeddings import EmbeddingMatrix

NOISE_POWER = 0.75


class TrainingDiverged(FloatingPointError):
    def __init__(self, step, epoch):
        super().__init__(f"non-finite parameters at global step {step} (epoch {epoch})")
        self.step = step
        self.epoch = epoch


@dataclass(frozen=True)
class PvConfig:
    dim: int = 300
    epochs: int = 10
    negatives: int = 30
    window: int = 5
    # The paragraph step is divided by 1 + 2 * window through the mean, hence
    # ten times the usual word2vec starting rate.
    lr_start: float = 0.25
    lr_end: float = 0.0001
    seed: int = 0

    def __post_init__(self):
        if min(self.dim, self.epochs, self.negatives, self.window) < 1:
            raise ValueError("dim, epochs, negatives and window must all be >= 1")
        if not self.lr_start >= self.lr_end > 0:
            raise ValueError("need lr_start >= lr_end > 0")


@dataclass
class PvModel:
    config: PvConfig
    doc_ids: tuple[str, ...]
    token_ids: np.ndarray  # all documents' token ids, concatenated
    offsets: np.ndarray  # document i spans token_ids[offsets[i]:offsets[i + 1]]
    word_vectors: np.ndarray
    paragraph_vectors: np.ndarray
    output_weights: np.ndarray
    noise_cdf: np.ndarray
    epoch_losses: list[float] = field(default_factory=list)

    def doc_tokens(self, doc_index: int) -> np.ndarray:
        return self.token_ids[self.offsets[doc_index] : self.offsets[doc_index + 1]]


def noise_distribution(counts) -> np.ndarray:
    """Unigram counts raised to the 0.75 power, normalized."""
    weights = np.asarray(counts, dtype=np.float64) ** NOISE_POWER
    return weights / weights.sum()


def init_model(corpus: Corpus, config: PvConfig = PvConfig()) -> PvModel:
    if len(corpus) == 0 or not corpus.vocabulary:
        raise ValueError("paragraph vectors need a non-empty corpus and vocabulary")
    if len(corpus.vocabulary) < 2:
        raise ValueError("negative sampling needs at least two distinct words")
    vocab = corpus.vocabulary
    counts = np.zeros(len(vocab))
    for term, c in corpus.term_counts().items():
        counts[vocab[term]] = c
    ids = [np.array([vocab[t] for t in d.tokens], dtype=np.int64) for d in corpus.documents]
    offsets = np.zeros(len(ids) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(a) for a in ids])
    rng = np.random.default_rng(config.seed)
    bound = 0.5 / config.dim
    word = rng.uniform(-bound, bound, (len(vocab), config.dim))
    para = rng.uniform(-bound, bound, (len(corpus), config.dim))
    cdf = np.cumsum(noise_distribution(counts))
    cdf[-1] = 1.0
    return PvModel(
        config=config,
        doc_ids=tuple(corpus.ids),
        token_ids=np.concatenate(ids) if ids else np.zeros(0, dtype=np.int64),
        offsets=offsets,
        word_vectors=word,
        paragraph_vectors=para,
        output_weights=np.zeros((len(vocab), config.dim)),
        noise_cdf=cdf,
    )


def draw_negatives(noise_cdf, targets, count, rng) -> np.ndarray:
    """``count`` noise words per target, with replacement, never equal to the target."""
    targets = np.asarray(targets, dtype=np.int64)
    last = len(noise_cdf) - 1
    draws = np.minimum(np.searchsorted(noise_cdf, rng.random((len(targets), count)), side="right"), last)
    bad = draws == targets[:, None]
    while bad.any():
        draws[bad] = np.minimum(np.searchsorted(noise_cdf, rng.random(int(bad.sum())), side="right"), last)
        bad = draws == targets[:, None]
    return draws


def context_ids(tokens, position, window) -> np.ndarray:
    return np.concatenate([tokens[max(0, position - window) : position], tokens[position + 1 : position + 1 + window]])


def _softplus(x):
    return np.logaddexp(0.0, x)


def negative_sampling_loss(paragraph, word_vectors, output_weights, context, target, negatives):
    """Loss and gradients for one (document, center word) example.

    Returns ``(loss, grad_paragraph, rows, grad_rows)`` where ``grad_rows[j]``
    is the gradient for ``output_weights[rows[j]]``; rows may repeat and
    their gradients add up.
    """
    n_in = 1 + len(context)
    h = (paragraph + word_vectors[context].sum(axis=0)) / n_in
    rows = np.concatenate([[target], negatives]).astype(np.int64)
    labels = np.zeros(len(rows))
    labels[0] = 1.0
    u = output_weights[rows]
    scores = u @ h
    # fsum: correctly rounded, so an all-zero output layer gives exactly (1 + negatives) * ln 2
    loss = math.fsum([float(_softplus(-scores[0]))] + _softplus(scores[1:]).tolist())
    g = 1.0 / (1.0 + np.exp(-scores)) - labels
    return loss, (g @ u) / n_in, rows, np.outer(g, h)


def apply_example(model: PvModel, doc_index, context, target, negatives, lr) -> float:
    loss, grad_p, rows, grad_rows = negative_sampling_loss(
        model.paragraph_vectors[doc_index], model.word_vectors, model.output_weights, context, target, negatives
    )
    model.paragraph_vectors[doc_index] -= lr * grad_p
    np.add.at(model.output_weights, rows, -lr * grad_rows)
    return loss


def train_step(model: PvModel, doc_index: int, center_position: int, rng, lr: float | None = None) -> float:
    """One SGD update on a single center word; returns the loss before the update."""
    tokens = model.doc_tokens(doc_index)
    if not 0 <= center_position < len(tokens):
        raise IndexError(f"position {center_position} outside document of {len(tokens)} tokens")
    target = int(tokens[center_position])
    negatives = draw_negatives(model.noise_cdf, [target], model.config.negatives, rng)[0]
    ctx = context_ids(tokens, center_position, model.config.window)
    return apply_example(model, doc_index, ctx, target, negatives, model.config.lr_start if lr is None else lr)


@numba.njit(cache=True)
def _train_chunk(word, para, out, tokens, offsets, docs, positions, negatives, lrs, window, losses):
    # Same arithmetic as apply_example, one example at a time. Returns the
    # index of the first example that produced non-finite values, or -1.
    dim = word.shape[1]
    n_neg = negatives.shape[1]
    h = np.empty(dim)
    grad_h = np.empty(dim)
    g = np.empty(n_neg + 1)
    rows = np.empty(n_neg + 1, dtype=np.int64)
    for e in range(docs.shape[0]):
        doc = docs[e]
        start = offsets[doc]
        length = offsets[doc + 1] - start
        pos = positions[e]
        lo = max(0, pos - window)
        hi = min(length, pos + window + 1)
        n_in = hi - lo  # paragraph vector plus context words, center excluded
        for j in range(dim):
            h[j] = para[doc, j]
        for t in range(lo, hi):
            if t != pos:
                w = tokens[start + t]
                for j in range(dim):
                    h[j] += word[w, j]
        for j in range(dim):
            h[j] /= n_in
        rows[0] = tokens[start + pos]
        for s in range(n_neg):
            rows[s + 1] = negatives[e, s]
        loss = 0.0
        for s in range(n_neg + 1):
            score = 0.0
            r = rows[s]
            for j in range(dim):
                score += out[r, j] * h[j]
            if s == 0:
                loss += np.logaddexp(0.0, -score)
                g[s] = 1.0 / (1.0 + np.exp(-score)) - 1.0
            else:
                loss += np.logaddexp(0.0, score)
                g[s] = 1.0 / (1.0 + np.exp(-score))
        losses[e] = loss
        for j in range(dim):
            grad_h[j] = 0.0
        for s in range(n_neg + 1):
            r = rows[s]
            for j in range(dim):
                grad_h[j] += g[s] * out[r, j]
        lr = lrs[e]
        finite = np.isfinite(loss)
        for s in range(n_neg + 1):
            r = rows[s]
            for j in range(dim):
                out[r, j] -= lr * g[s] * h[j]
        for j in range(dim):
            para[doc, j] -= lr * grad_h[j] / n_in
            if not np.isfinite(para[doc, j]):
                finite = False
        if not finite:
            return e
    return -1


def learning_rates(config: PvConfig, steps: np.ndarray, total: int) -> np.ndarray:
    """Linear decay from ``lr_start`` at step 0 to ``lr_end`` at the last step."""
    frac = steps / max(total - 1, 1)
    return config.lr_start - (config.lr_start - config.lr_end) * frac


def train(model: PvModel, config: PvConfig | None = None, progress=None, chunk_size: int = 65536) -> PvModel:
    """Run ``config.epochs`` shuffled passes over every (document, center word) pair.

    ``progress``, if given, is a text stream that receives one
    ``epoch,step,mean_loss`` line per epoch.
    """
    config = config or model.config
    lengths = np.diff(model.offsets)
    docs = np.repeat(np.arange(len(lengths), dtype=np.int64), lengths)
    positions = np.arange(len(docs), dtype=np.int64) - np.repeat(model.offsets[:-1], lengths)
    targets = model.token_ids
    n_pairs = len(docs)
    total = config.epochs * n_pairs
    rng = np.random.default_rng([config.seed, 1])
    step = 0
    for epoch in range(config.epochs):
        order = rng.permutation(n_pairs)
        epoch_loss = 0.0
        for lo in range(0, n_pairs, chunk_size):
            idx = order[lo : lo + chunk_size]
            negs = draw_negatives(model.noise_cdf, targets[idx], config.negatives, rng)
            lrs = learning_rates(config, np.arange(step, step + len(idx)), total)
            losses = np.empty(len(idx))
            bad = _train_chunk(
                model.word_vectors, model.paragraph_vectors, model.output_weights,
                model.token_ids, model.offsets, docs[idx], positions[idx], negs, lrs,
                config.window, losses,
            )
            if bad >= 0:
                raise TrainingDiverged(step + bad, epoch)
            epoch_loss += float(losses.sum())
            step += len(idx)
        mean_loss = epoch_loss / max(n_pairs, 1)
        model.epoch_losses.append(mean_loss)
        if progress is not None:
            progress.write(f"{epoch},{step},{mean_loss:.10g}\n")
    return model


def export_vectors(model: PvModel) -> EmbeddingMatrix:
    return EmbeddingMatrix(model.doc_ids, model.paragraph_vectors.copy())


def paragraph_vectors(corpus: Corpus, config: PvConfig = PvConfig(), progress=None) -> EmbeddingMatrix:
    model = init_model(corpus, config)
    train(model, config, progress)
    return export_vectors(model)


def expected_first_loss(negatives: int) -> float:
    """Loss of any example while the output layer is all zeros."""
    return (1 + negatives) * math.log(2.0)
