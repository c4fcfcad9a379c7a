"""Gaussian mixture density of user interest, fitted by EM.

Covariances are diagonal (or spherical, one variance per component
broadcast over dimensions). A constant ``reg`` is added to every variance
estimate so components cannot collapse onto single points.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

COVARIANCE_TYPES = ("diagonal", "spherical")
_LOG_2PI = math.log(2.0 * math.pi)
_EMPTY_COMPONENT = 1e-10


@dataclass(frozen=True)
class GmmConfig:
    k: int = 2
    covariance: str = "diagonal"
    reg: float = 1e-6
    tol: float = 1e-4
    max_iter: int = 200
    n_init: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.covariance not in COVARIANCE_TYPES:
            raise ValueError(f"covariance must be one of {COVARIANCE_TYPES}")
        if not self.reg > 0 or not self.tol > 0:
            raise ValueError("reg and tol must be positive")
        if self.max_iter < 1 or self.n_init < 1:
            raise ValueError("max_iter and n_init must be >= 1")


@dataclass(frozen=True)
class GmmModel:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    covariance: str = "diagonal"
    train_loglik: float = float("nan")
    # Mean log-likelihood after every EM iteration of the winning restart.
    history: tuple[float, ...] = field(default=(), compare=False, repr=False)

    @property
    def k(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def to_json(self) -> str:
        """Serialize with every float at 17 significant digits."""

        def num(v):
            return format(float(v), ".17g")

        def vec(row):
            return "[" + ", ".join(num(v) for v in row) + "]"

        def mat(rows):
            return "[" + ", ".join(vec(r) for r in rows) + "]"

        return (
            "{"
            f'"k": {self.k}, "covariance": {json.dumps(self.covariance)}, '
            f'"weights": {vec(self.weights)}, "means": {mat(self.means)}, '
            f'"variances": {mat(self.variances)}, "train_loglik": {num(self.train_loglik)}'
            "}"
        )

    @classmethod
    def from_dict(cls, obj: dict) -> "GmmModel":
        model = cls(
            weights=np.asarray(obj["weights"], dtype=np.float64),
            means=np.asarray(obj["means"], dtype=np.float64),
            variances=np.asarray(obj["variances"], dtype=np.float64),
            covariance=obj.get("covariance", "diagonal"),
            train_loglik=float(obj.get("train_loglik", float("nan"))),
        )
        if model.means.shape != model.variances.shape or model.weights.shape != (model.means.shape[0],):
            raise ValueError("inconsistent GMM parameter shapes")
        if int(obj.get("k", model.k)) != model.k:
            raise ValueError("k does not match parameter shapes")
        return model

    @classmethod
    def from_json(cls, text: str) -> "GmmModel":
        return cls.from_dict(json.loads(text))


def _component_logpdf(x, means, variances):
    # (n, k) matrix of log N(x_i; mean_c, diag(var_c))
    out = np.empty((x.shape[0], means.shape[0]))
    for c in range(means.shape[0]):
        diff = x - means[c]
        out[:, c] = -0.5 * (np.sum(np.log(variances[c])) + x.shape[1] * _LOG_2PI + np.sum(diff * diff / variances[c], axis=1))
    return out


def _weighted_logpdf(x, weights, means, variances):
    with np.errstate(divide="ignore"):
        return _component_logpdf(x, means, variances) + np.log(weights)


def log_pdf(model: GmmModel, x):
    """Log density of the mixture at ``x`` (one point or an ``(n, d)`` batch)."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    pts = arr.reshape(1, -1) if single else arr
    if pts.ndim != 2 or pts.shape[1] != model.dim:
        raise ValueError(f"expected points of dimension {model.dim}, got shape {arr.shape}")
    out = logsumexp(_weighted_logpdf(pts, model.weights, model.means, model.variances), axis=1)
    return float(out[0]) if single else out


def kmeans_pp(points, k, rng):
    """k-means++ seeding: returns ``k`` rows of ``points`` as initial means."""
    n = points.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = int(rng.integers(n))
        chosen.append(nxt)
        d2 = np.minimum(d2, np.sum((points - points[nxt]) ** 2, axis=1))
    return points[chosen].copy()


def _m_step(x, resp, config, lse):
    n, d = x.shape
    nk = resp.sum(axis=0)
    means = np.empty((config.k, d))
    variances = np.empty((config.k, d))
    for c in range(config.k):
        if nk[c] < _EMPTY_COMPONENT:
            # Restart an empty component at the worst-explained point.
            means[c] = x[int(np.argmin(lse))]
            variances[c] = x.var(axis=0) + config.reg
            nk[c] = 1.0
            continue
        means[c] = resp[:, c] @ x / nk[c]
        diff = x - means[c]
        variances[c] = resp[:, c] @ (diff * diff) / nk[c] + config.reg
    if config.covariance == "spherical":
        variances = np.repeat((variances - config.reg).mean(axis=1, keepdims=True) + config.reg, d, axis=1)
    weights = nk / nk.sum()
    return weights, means, variances


def _em(x, init_means, config):
    n, d = x.shape
    weights = np.full(config.k, 1.0 / config.k)
    means = init_means
    base = x.var(axis=0) + config.reg
    if config.covariance == "spherical":
        base = np.full(d, x.var(axis=0).mean() + config.reg)
    variances = np.tile(base, (config.k, 1))

    lw = _weighted_logpdf(x, weights, means, variances)
    lse = logsumexp(lw, axis=1)
    ll = float(lse.mean())
    history = [ll]
    for _ in range(config.max_iter):
        resp = np.exp(lw - lse[:, None])
        weights, means, variances = _m_step(x, resp, config, lse)
        lw = _weighted_logpdf(x, weights, means, variances)
        lse = logsumexp(lw, axis=1)
        new_ll = float(lse.mean())
        history.append(new_ll)
        done = abs(new_ll - ll) < config.tol * abs(ll) if ll != 0 else new_ll == ll
        ll = new_ll
        if done:
            break
    return GmmModel(weights, means, variances, config.covariance, ll, tuple(history))


def fit(points, config: GmmConfig = GmmConfig()) -> GmmModel:
    """Fit a mixture to ``points`` (``n x d``) by EM with k-means++ restarts.

    Runs ``config.n_init`` restarts from one seeded generator and keeps the one
    with the highest final mean log-likelihood.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] == 0:
        raise ValueError("points must be an (n, d) array with d >= 1")
    if x.shape[0] < config.k:
        raise ValueError(f"need at least k={config.k} points, got {x.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise ValueError("points must be finite")
    rng = np.random.default_rng(config.seed)
    best = None
    for _ in range(config.n_init):
        model = _em(x, kmeans_pp(x, config.k, rng), config)
        if best is None or model.train_loglik > best.train_loglik:
            best = model
    return best


def responsibilities(model: GmmModel, points) -> np.ndarray:
    lw = _weighted_logpdf(np.asarray(points, dtype=np.float64), model.weights, model.means, model.variances)
    return np.exp(lw - logsumexp(lw, axis=1, keepdims=True))


def sample(model: GmmModel, count: int, seed: int, return_components: bool = False):
    """Draw ``count`` points; draw ``i`` depends only on the seed and ``i``.

    Each draw consumes one uniform for the component choice and
    ``2 * ceil(d / 2)`` uniforms turned into normals by Box-Muller, so a
    shorter run is always a prefix of a longer one with the same seed.
    With ``return_components`` the chosen component indices are returned too.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    d = model.dim
    pairs = (d + 1) // 2
    u = np.random.default_rng(seed).random((count, 1 + 2 * pairs))
    cdf = np.cumsum(model.weights)
    comp = np.minimum(np.searchsorted(cdf, u[:, 0] * cdf[-1], side="right"), model.k - 1)
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 1::2]))
    angle = 2.0 * np.pi * u[:, 2::2]
    z = np.empty((count, 2 * pairs))
    z[:, 0::2] = radius * np.cos(angle)
    z[:, 1::2] = radius * np.sin(angle)
    points = model.means[comp] + np.sqrt(model.variances[comp]) * z[:, :d]
    return (points, comp) if return_components else points


def n_parameters(k: int, d: int, covariance: str = "diagonal") -> int:
    per_component = d if covariance == "diagonal" else 1
    return (k - 1) + k * d + k * per_component


def bic(model: GmmModel, points) -> float:
    x = np.asarray(points, dtype=np.float64)
    total = float(np.sum(log_pdf(model, x)))
    return -2.0 * total + n_parameters(model.k, model.dim, model.covariance) * math.log(x.shape[0])


def select_k(points, candidates, config: GmmConfig = GmmConfig()) -> int:
    """Pick the candidate component count with the lowest BIC."""
    candidates = list(candidates)
    if not candidates:
        raise ValueError("no candidate k values")
    x = np.asarray(points, dtype=np.float64)
    scores = []
    for k in candidates:
        if k > x.shape[0]:
            raise ValueError(f"candidate k={k} exceeds {x.shape[0]} points")
        model = fit(x, GmmConfig(k, config.covariance, config.reg, config.tol, config.max_iter, config.n_init, config.seed))
        scores.append(bic(model, x))
    return candidates[int(np.argmin(scores))]
