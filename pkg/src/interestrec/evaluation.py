"""Cross-validated hit-rate evaluation of user interest models.

For every user the profile is split into folds. A mixture is fitted on the
training part of each fold, sampled once per validation document, and each
sample is snapped to its nearest corpus document. A trial is a hit when that
document belongs to the fold's validation part.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from interestrec import gmm
from interestrec.corpus import UserProfile
from interestrec.embeddings import EmbeddingMatrix
from interestrec.recommend import CandidateIndex

_log = logging.getLogger(__name__)

METHOD_NAMES = {
    "lsa": "GMM on LSA representations",
    "learned": "GMM on learned representations",
    "pvec": "GMM on learned representations",
}


@dataclass(frozen=True)
class EvalConfig:
    folds: int = 5
    gmm: gmm.GmmConfig = field(default_factory=gmm.GmmConfig)
    seed: int = 0
    exclude_train: bool = False
    representation: str = "learned"

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be >= 2")


@dataclass(frozen=True)
class UserResult:
    user_id: str
    hits: int
    trials: int


@dataclass(frozen=True)
class EvalReport:
    representation: str
    per_user: tuple[UserResult, ...]
    skipped: tuple[tuple[str, str], ...] = ()
    random_baseline: float | None = None

    @property
    def total_hits(self) -> int:
        return sum(u.hits for u in self.per_user)

    @property
    def total_trials(self) -> int:
        return sum(u.trials for u in self.per_user)

    @property
    def hit_rate(self) -> float:
        return self.total_hits / self.total_trials if self.total_trials else 0.0

    @property
    def method(self) -> str:
        return METHOD_NAMES.get(self.representation, f"GMM on {self.representation} representations")

    def to_dict(self) -> dict:
        return {
            "representation": self.representation,
            "method": self.method,
            "hit_rate": self.hit_rate,
            "total_hits": self.total_hits,
            "total_trials": self.total_trials,
            "random_baseline": self.random_baseline,
            "per_user": [{"user_id": u.user_id, "hits": u.hits, "trials": u.trials} for u in self.per_user],
            "skipped": [{"user_id": u, "reason": r} for u, r in self.skipped],
        }


class SkipUser(Exception):
    pass


def format_hit_rate(hits: int, trials: int) -> str:
    """Percentage with two decimals, e.g. ``format_hit_rate(244, 2828) == "8.63 %"``."""
    return f"{100.0 * hits / trials:.2f} %"


def render_table(reports) -> str:
    """Plain-text table with columns Method, Hit rate and Hits."""
    rows = [("Method", "Hit rate", "Hits")]
    rows += [(r.method, format_hit_rate(r.total_hits, r.total_trials), f"{r.total_hits} / {r.total_trials}") for r in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = []
    for n, row in enumerate(rows):
        lines.append(f"{row[0]:<{widths[0]}}  {row[1]:>{widths[1]}}  {row[2]:>{widths[2]}}")
        if n == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def report_json(reports) -> str:
    return json.dumps({"reports": [r.to_dict() for r in reports]}, indent=2, sort_keys=True) + "\n"


def user_seed(seed: int, user_id: str) -> int:
    digest = hashlib.blake2b(user_id.encode("utf-8"), digest_size=8).digest()
    return (seed ^ int.from_bytes(digest, "little")) & (2**63 - 1)


def kfold_split(profile: UserProfile, folds: int, seed: int) -> list[tuple[list[str], list[str]]]:
    """Seeded shuffle, then ``folds`` contiguous validation blocks.

    The first ``n % folds`` blocks get one extra document. Returns
    ``(train_ids, validation_ids)`` per fold.
    """
    ids = sorted(profile.doc_ids)
    n = len(ids)
    if folds < 1 or n < folds:
        raise ValueError(f"cannot split {n} documents into {folds} folds")
    order = np.random.default_rng(seed).permutation(n)
    shuffled = [ids[i] for i in order]
    base, extra = divmod(n, folds)
    splits = []
    start = 0
    for f in range(folds):
        size = base + (1 if f < extra else 0)
        val = shuffled[start : start + size]
        splits.append((shuffled[:start] + shuffled[start + size :], val))
        start += size
    return splits


def evaluate_user(profile: UserProfile, embeddings: EmbeddingMatrix, config: EvalConfig) -> tuple[int, int]:
    """Hits and trials for one user over all folds."""
    seed = user_seed(config.seed, profile.user_id)
    if len(profile) < config.folds:
        raise SkipUser(f"profile has {len(profile)} documents, fewer than {config.folds} folds")
    splits = kfold_split(profile, config.folds, seed)
    full_index = None if config.exclude_train else CandidateIndex(embeddings)
    hits = trials = 0
    for f, (train_ids, val_ids) in enumerate(splits):
        if len(train_ids) < config.gmm.k:
            raise SkipUser(f"fold {f} has {len(train_ids)} training documents, fewer than k={config.gmm.k}")
        fold_seed = int(np.random.SeedSequence([seed, f]).generate_state(1)[0])
        model = gmm.fit(embeddings.rows(train_ids), replace(config.gmm, seed=fold_seed))
        index = CandidateIndex(embeddings, train_ids) if config.exclude_train else full_index
        matched, _ = index.query(gmm.sample(model, len(val_ids), fold_seed + 1))
        val = set(val_ids)
        hits += sum(d in val for d in matched)
        trials += len(val_ids)
    return hits, trials


def evaluate_all(profiles, embeddings: EmbeddingMatrix, config: EvalConfig, threads: int = 1) -> EvalReport:
    """Evaluate every user; users that cannot be evaluated are listed in ``skipped``."""
    profiles = list(profiles)

    def run(p):
        try:
            return p, evaluate_user(p, embeddings, config), None
        except SkipUser as exc:
            return p, None, str(exc)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            outcomes = list(pool.map(run, profiles))
    else:
        outcomes = [run(p) for p in profiles]
    results, skipped = [], []
    for p, res, reason in outcomes:
        if res is None:
            _log.warning("skipping user %s: %s", p.user_id, reason)
            skipped.append((p.user_id, reason))
        else:
            results.append(UserResult(p.user_id, *res))
    if not results:
        raise ValueError("no user could be evaluated")
    evaluated = [p for p in profiles if p.user_id not in dict(skipped)]
    baseline = random_baseline(evaluated, len(embeddings), config.folds)
    return EvalReport(config.representation, tuple(results), tuple(skipped), baseline)


def random_baseline(profiles, corpus_size: int, folds: int) -> float:
    """Expected hit rate when every trial picks a uniformly random corpus document."""
    if corpus_size < 1:
        raise ValueError("corpus_size must be >= 1")
    expected = total = 0
    for p in profiles:
        base, extra = divmod(len(p), folds)
        for f in range(folds):
            size = base + (1 if f < extra else 0)
            expected += size * size
            total += size
    return expected / corpus_size / total if total else 0.0
