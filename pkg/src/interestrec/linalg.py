"""Symmetric eigensolvers shared by the SVD and kernel PCA code."""

from __future__ import annotations

import numpy as np

# Above this size the cyclic Jacobi sweep is too slow in numpy and LAPACK takes over.
JACOBI_MAX_N = 64


def jacobi_eigh(a, tol: float = 1e-14, max_sweeps: int = 60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in descending
    order and eigenvectors as columns. Deterministic: rotations are applied
    in fixed row-by-row order.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    v = np.eye(n)
    scale = max(np.abs(a).max(initial=0.0), np.finfo(float).tiny)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(a, 1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                v[:, p] = c * vp - s * v[:, q]
                v[:, q] = s * vp + c * v[:, q]
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def symmetric_eigh(a, method: str = "auto"):
    """Descending eigendecomposition with deterministic eigenvector signs.

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi for small
    matrices). Each eigenvector is flipped so its largest-magnitude entry is
    positive.
    """
    a = np.asarray(a, dtype=np.float64)
    if method == "auto":
        method = "jacobi" if a.shape[0] <= JACOBI_MAX_N else "lapack"
    if method == "jacobi":
        w, v = jacobi_eigh(a)
    elif method == "lapack":
        w, v = np.linalg.eigh(a)
        w, v = w[::-1].copy(), v[:, ::-1].copy()
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    return w, fix_signs(v)


def fix_signs(vectors):
    """Flip columns so the largest-magnitude entry of each is positive."""
    vectors = np.asarray(vectors)
    if vectors.size == 0:
        return vectors
    pivot = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivot, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs
