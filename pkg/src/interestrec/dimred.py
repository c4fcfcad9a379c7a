"""RBF kernel PCA and a linear 2-D projection for plotting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from interestrec.embeddings import EmbeddingMatrix
from interestrec.linalg import symmetric_eigh
from interestrec.lsa import fit_svd

EIGEN_FLOOR = 1e-12
MAX_GAMMA_PAIRS = 100_000
DEFAULT_COMPONENTS = 100


@dataclass(frozen=True)
class KpcaModel:
    training_points: np.ndarray
    gamma: float
    alphas: np.ndarray  # eigenvectors scaled by 1/sqrt(eigenvalue)
    eigenvalues: np.ndarray
    row_means: np.ndarray
    total_mean: float
    requested_components: int

    @property
    def components(self) -> int:
        return self.eigenvalues.shape[0]


def squared_distances(a, b, block: int = 64) -> np.ndarray:
    """Exact pairwise squared distances, computed by explicit differences.

    Entry (i, j) only depends on the two rows, so the result for ``a is b``
    is exactly symmetric.
    """
    out = np.empty((a.shape[0], b.shape[0]))
    for lo in range(0, a.shape[0], block):
        diff = a[lo : lo + block, None, :] - b[None, :, :]
        out[lo : lo + block] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def rbf_kernel(a, b, gamma: float) -> np.ndarray:
    return np.exp(-gamma * squared_distances(a, b))


def median_gamma(points, seed: int = 0, max_pairs: int = MAX_GAMMA_PAIRS) -> float:
    """``1 / median`` squared distance over all pairs, or a seeded sample of pairs."""
    n = points.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    if n * (n - 1) // 2 <= max_pairs:
        i, j = np.triu_indices(n, 1)
    else:
        rng = np.random.default_rng(seed)
        i = rng.integers(n, size=max_pairs)
        j = (i + rng.integers(1, n, size=max_pairs)) % n
    diff = points[i] - points[j]
    med = float(np.median(np.einsum("ij,ij->i", diff, diff)))
    if med <= 0:
        raise ValueError("degenerate kernel: median pairwise distance is zero")
    return 1.0 / med


def center_kernel(k) -> tuple[np.ndarray, np.ndarray, float]:
    """Double-center a training kernel matrix; returns (centered, row_means, total_mean)."""
    row_means = k.mean(axis=0)
    total = float(row_means.mean())
    centered = k - row_means[None, :] - row_means[:, None] + total
    return centered, row_means, total


def fit_kpca(matrix: EmbeddingMatrix, components: int = DEFAULT_COMPONENTS, gamma: float | None = None,
             seed: int = 0, method: str = "auto") -> KpcaModel:
    """Kernel PCA with an RBF kernel.

    ``gamma`` defaults to the median heuristic. Eigenpairs with eigenvalue at
    or below 1e-12 are dropped, so the fitted model may keep fewer
    components than requested.
    """
    x = matrix.vectors
    n = x.shape[0]
    if components < 1 or components >= n:
        raise ValueError(f"components must be in [1, {n - 1}], got {components}")
    if gamma is None:
        gamma = median_gamma(x, seed)
    elif not gamma > 0:
        raise ValueError("gamma must be positive")
    centered, row_means, total = center_kernel(rbf_kernel(x, x, gamma))
    centered = 0.5 * (centered + centered.T)
    w, v = symmetric_eigh(centered, method)
    keep = w[:components] > EIGEN_FLOOR
    w, v = w[:components][keep], v[:, :components][:, keep]
    return KpcaModel(x.copy(), float(gamma), v / np.sqrt(w), w, row_means, total, components)


def centered_kernel_rows(model: KpcaModel, x) -> np.ndarray:
    k = rbf_kernel(x, model.training_points, model.gamma)
    return k - k.mean(axis=1, keepdims=True) - model.row_means[None, :] + model.total_mean


def project_kpca(model: KpcaModel, matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    if matrix.dim != model.training_points.shape[1]:
        raise ValueError(f"matrix has {matrix.dim} columns, model expects {model.training_points.shape[1]}")
    return EmbeddingMatrix(matrix.doc_ids, centered_kernel_rows(model, matrix.vectors) @ model.alphas)


def training_coordinates(model: KpcaModel) -> np.ndarray:
    """Coordinates of the training points, ``eigenvector * sqrt(eigenvalue)``."""
    return model.alphas * model.eigenvalues


def kpca_reduce(matrix: EmbeddingMatrix, components: int = DEFAULT_COMPONENTS, gamma: float | None = None,
                seed: int = 0) -> tuple[EmbeddingMatrix, KpcaModel]:
    """Fit and project the same matrix, capping ``components`` at ``rows - 1``."""
    model = fit_kpca(matrix, min(components, len(matrix) - 1), gamma, seed)
    return EmbeddingMatrix(matrix.doc_ids, training_coordinates(model)), model


def project_2d(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Center and project onto the top two principal axes."""
    if len(matrix) < 2:
        raise ValueError("need at least two rows")
    centered = matrix.vectors - matrix.vectors.mean(axis=0)
    if matrix.dim == 1:
        return EmbeddingMatrix(matrix.doc_ids, np.column_stack([centered[:, 0], np.zeros(len(matrix))]))
    svd = fit_svd(centered, 2)
    return EmbeddingMatrix(matrix.doc_ids, centered @ svd.components.T)
