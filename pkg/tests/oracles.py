"""Independent reference computations used only by the tests.

Deliberately naive: no shared code with the package beyond numpy.
"""

import math

import numpy as np


def classical_jacobi(a, tol=1e-13, max_rotations=200_000):
    """Classical Jacobi: always annihilate the largest off-diagonal entry."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(max_rotations):
        off = np.abs(np.triu(a, 1))
        p, q = np.unravel_index(np.argmax(off), off.shape)
        if off[p, q] <= tol * max(1.0, np.abs(np.diag(a)).max()):
            break
        if a[p, p] == a[q, q]:
            phi = math.pi / 4
        else:
            phi = 0.5 * math.atan2(2 * a[p, q], a[q, q] - a[p, p])
        c, s = math.cos(phi), math.sin(phi)
        rot = np.eye(n)
        rot[p, p] = c
        rot[q, q] = c
        rot[p, q] = s
        rot[q, p] = -s
        a = rot.T @ a @ rot
        v = v @ rot
    w = np.diag(a)
    order = np.argsort(-w)
    return w[order], v[:, order]


def gram_singular_values(m):
    """Singular values from the eigenvalues of the Gram matrix."""
    m = np.asarray(m, dtype=float)
    g = m.T @ m if m.shape[1] <= m.shape[0] else m @ m.T
    w, _ = classical_jacobi(g)
    return np.sqrt(np.clip(w, 0, None))


def mixture_density(x, weights, means, variances):
    """Direct (non-log) density of a diagonal Gaussian mixture at one point."""
    total = 0.0
    for w, mu, var in zip(weights, means, variances):
        dens = 1.0
        for xj, mj, vj in zip(x, mu, var):
            dens *= math.exp(-((xj - mj) ** 2) / (2 * vj)) / math.sqrt(2 * math.pi * vj)
        total += w * dens
    return total


def linear_scan(query, ids, vectors):
    """Exhaustive nearest neighbor with lexicographic tie-break, one row at a time."""
    best_id, best_d2 = None, math.inf
    for doc_id, row in zip(ids, vectors):
        d2 = sum((float(a) - float(b)) ** 2 for a, b in zip(query, row))
        if d2 < best_d2 or (d2 == best_d2 and doc_id < best_id):
            best_id, best_d2 = doc_id, d2
    return best_id, math.sqrt(best_d2)


def central_difference(f, x, eps=1e-5):
    x = np.array(x, dtype=float)
    grad = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        up = x.copy()
        down = x.copy()
        up[idx] += eps
        down[idx] -= eps
        grad[idx] = (f(up) - f(down)) / (2 * eps)
    return grad
