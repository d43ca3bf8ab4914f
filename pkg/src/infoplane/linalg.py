"""Symmetric-eigendecomposition helpers shared by the estimators and the
constructive Gaussian machinery.

Everything here operates on real symmetric PSD matrices and is deterministic:
eigenpairs are returned in a fixed order (eigenvalue descending, then
sign-normalized lexicographic vector) so repeated-eigenvalue bases do not
wobble between runs.
"""

from __future__ import annotations

import numpy as np

# Relative cutoff below which an eigenvalue of a PSD matrix is treated as zero.
PSD_RCOND = 1e-12


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def _sign_normalize(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its first nonzero entry is positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


def ordered_eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecompose a symmetric matrix.

    Returns (values, vectors) with values sorted descending; among equal
    values, vectors are sign-normalized and ordered lexicographically.
    """
    vals, vecs = np.linalg.eigh(symmetrize(np.asarray(m, dtype=float)))
    vals = vals[::-1].copy()
    vecs = _sign_normalize(vecs[:, ::-1])
    # Stable secondary ordering for (near-)repeated eigenvalues.
    i = 0
    n = vals.size
    while i < n:
        j = i + 1
        while j < n and abs(vals[j] - vals[i]) <= 1e-12 * max(1.0, abs(vals[i])):
            j += 1
        if j - i > 1:
            block = vecs[:, i:j]
            order = np.lexsort(block[::-1])
            vecs[:, i:j] = block[:, order]
        i = j
    return vals, vecs


def psd_eigh(m: np.ndarray, *, clip_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`ordered_eigh` but clamps small negative eigenvalues to zero.

    Eigenvalues below ``-clip_tol`` (relative to the largest) raise, since the
    input then is not PSD to within tolerance.
    """
    vals, vecs = ordered_eigh(m)
    scale = max(1.0, float(vals[0]) if vals.size else 1.0)
    if vals.size and vals[-1] < -clip_tol * scale:
        raise ValueError(f"matrix is not PSD: smallest eigenvalue {vals[-1]:.3e}")
    return np.clip(vals, 0.0, None), vecs


def psd_sqrt(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric PSD square root and its pseudo-inverse (on the range)."""
    vals, vecs = psd_eigh(sigma)
    root = np.sqrt(vals)
    cutoff = PSD_RCOND * max(root[0], 0.0) if root.size else 0.0
    inv_root = np.where(root > cutoff, 1.0 / np.where(root > cutoff, root, 1.0), 0.0)
    half = (vecs * root) @ vecs.T
    half_pinv = (vecs * inv_root) @ vecs.T
    return symmetrize(half), symmetrize(half_pinv)


def psd_pinv(m: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric PSD matrix via eigh."""
    vals, vecs = psd_eigh(m)
    cutoff = PSD_RCOND * max(float(vals[0]), 0.0) if vals.size else 0.0
    inv = np.where(vals > cutoff, 1.0 / np.where(vals > cutoff, vals, 1.0), 0.0)
    return symmetrize((vecs * inv) @ vecs.T)


def conditional_variance_matrix(sigma: np.ndarray, linear_map: np.ndarray) -> np.ndarray:
    """Variance of the conditional mean of a Gaussian vector given its image
    under a linear map: ``sigma @ L.T @ pinv(L @ sigma @ L.T) @ L @ sigma``.
    """
    sigma = symmetrize(np.asarray(sigma, dtype=float))
    L = np.atleast_2d(np.asarray(linear_map, dtype=float))
    cross = sigma @ L.T
    gram = symmetrize(L @ cross)
    if not gram.size or np.allclose(gram, 0.0):
        return np.zeros_like(sigma)
    return symmetrize(cross @ psd_pinv(gram) @ cross.T)
