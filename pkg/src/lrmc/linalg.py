"""Dense matrix norms and decompositions used by every other module.

Matrices are plain float64 numpy arrays (row-major). All functions are pure
and deterministic.
"""

import numpy as np

__all__ = [
    "DecompositionError",
    "frobenius_norm",
    "spectral_norm",
    "two_inf_norm",
    "full_svd",
]


class DecompositionError(Exception):
    """Raised when a factorization fails to converge."""


def frobenius_norm(m):
    """Square root of the sum of squared entries."""
    m = np.asarray(m, dtype=np.float64)
    return float(np.sqrt(np.sum(m * m)))


def spectral_norm(m, tol=1e-10, max_iters=10000):
    """Largest singular value, via power iteration on m.T @ m.

    Converges to relative tolerance `tol` on the singular value. The start
    vector is deterministic, so repeated calls agree bitwise.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.size == 0 or not np.any(m):
        return 0.0
    n = m.shape[1]
    # Deterministic start with decaying components so it is (generically)
    # not orthogonal to the leading singular subspace.
    v = 1.0 / np.sqrt(1.0 + np.arange(n))
    v /= np.linalg.norm(v)
    sigma = 0.0
    for _ in range(max_iters):
        w = m.T @ (m @ v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # Start vector lies in the null space; restart shifted.
            v = np.roll(v, 1) + 1e-3
            v /= np.linalg.norm(v)
            continue
        sigma_new = np.sqrt(norm_w)
        v = w / norm_w
        if abs(sigma_new - sigma) <= tol * max(sigma_new, 1e-300):
            return float(sigma_new)
        sigma = sigma_new
    return float(sigma)


def two_inf_norm(m):
    """Largest Euclidean norm over the rows of m."""
    m = np.asarray(m, dtype=np.float64)
    if m.size == 0:
        return 0.0
    return float(np.max(np.sqrt(np.sum(m * m, axis=1))))


def full_svd(m):
    """Thin SVD with a deterministic sign convention.

    Returns (u, sigma, v) with m = u @ diag(sigma) @ v.T, sigma nonnegative
    and descending, and u, v with orthonormal columns. In each left singular
    vector the entry of largest magnitude (lowest index on ties) is made
    nonnegative, so factors are reproducible across platforms.
    """
    m = np.asarray(m, dtype=np.float64)
    try:
        u, sigma, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SVD did not converge: {exc}") from exc
    v = vt.T
    # Sign convention: dominant entry of each left singular vector >= 0.
    flip = np.empty(u.shape[1])
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        flip[j] = -1.0 if u[i, j] < 0 else 1.0
    u = u * flip
    v = v * flip
    return u, sigma, v
