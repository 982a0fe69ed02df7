"""Dense linear algebra kernels shared by every other module.

The symmetric eigensolver is a cyclic Jacobi iteration.  It is slower than
LAPACK but fully deterministic (fixed rotation order, explicit tie-breaking),
which keeps downstream enumerations reproducible.  Matrices here are small
(n below ~30), so the O(n^3)-per-sweep cost is irrelevant.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_ORTH_TOL = 1e-10
DEFAULT_RECON_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-8

_JACOBI_OFF_TOL = 1e-14
_MAX_SWEEPS = 100


class ContractViolationError(ValueError):
    """Input breaks a documented precondition (shape, symmetry, orthonormality)."""


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted ascending; column j of `vectors` pairs with values[j]."""

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class SVDFactors:
    """Full factors: left (m x m), singulars (min(m,n), descending), right (n x n)."""

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def reconstruct(self):
        m = self.left.shape[0]
        n = self.right.shape[0]
        sigma = np.zeros((m, n))
        k = len(self.singulars)
        sigma[:k, :k] = np.diag(self.singulars)
        return self.left @ sigma @ self.right.T


def _as_square_symmetric(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractViolationError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractViolationError("matrix has non-finite entries")
    scale = max(1.0, np.abs(a).max())
    if np.abs(a - a.T).max() > 1e-12 * scale:
        raise ContractViolationError("matrix is not symmetric")
    return 0.5 * (a + a.T)


def _off_diagonal_norm(a):
    mask = ~np.eye(a.shape[0], dtype=bool)
    return float(np.sqrt(np.sum(a[mask] ** 2)))


def _sign_normalize_columns(v, tol=1e-12):
    # First entry of magnitude above tol gets a positive sign.
    v = v.copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        nz = np.nonzero(np.abs(col) > tol)[0]
        if nz.size and col[nz[0]] < 0:
            v[:, j] = -col
    return v


def sym_eig(a, tol=_JACOBI_OFF_TOL):
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Returns values sorted ascending.  Within groups of (numerically) equal
    eigenvalues, eigenvectors are sign-normalized and ordered
    lexicographically so repeated calls on the same input agree entry for
    entry.
    """
    a = _as_square_symmetric(a)
    n = a.shape[0]
    if n == 0:
        return SpectralDecomposition(np.zeros(0), np.zeros((0, 0)))
    scale = max(1.0, float(np.linalg.norm(a)))
    work = a.copy()
    vecs = np.eye(n)
    for _ in range(_MAX_SWEEPS):
        if _off_diagonal_norm(work) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (work[q, q] - work[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rp, rq = work[p, :].copy(), work[q, :].copy()
                work[p, :] = c * rp - s * rq
                work[q, :] = s * rp + c * rq
                cp, cq = work[:, p].copy(), work[:, q].copy()
                work[:, p] = c * cp - s * cq
                work[:, q] = s * cp + c * cq
                work[p, q] = 0.0
                work[q, p] = 0.0
                vp, vq = vecs[:, p].copy(), vecs[:, q].copy()
                vecs[:, p] = c * vp - s * vq
                vecs[:, q] = s * vp + c * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")

    values = np.diag(work).copy()
    order = np.argsort(values, kind="stable")
    values = values[order]
    vecs = _sign_normalize_columns(vecs[:, order])

    # Lexicographic ordering inside numerically tied eigenvalue groups.
    tie_tol = 1e-12 * scale
    start = 0
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[start] <= tie_tol:
            stop += 1
        if stop - start > 1:
            cols = sorted(range(start, stop), key=lambda j: tuple(vecs[:, j]))
            vecs[:, start:stop] = vecs[:, cols]
        start = stop
    return SpectralDecomposition(values, vecs)


def orthonormal_complete(z, tol=DEFAULT_ORTH_TOL):
    """Extend a matrix with orthonormal columns to a full orthogonal basis.

    The first k columns of the result are `z` itself, exactly.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2:
        raise ContractViolationError("expected a 2-d array")
    n, k = z.shape
    if k > n:
        raise ContractViolationError(f"more columns than rows: {z.shape}")
    gram = z.T @ z
    if np.abs(gram - np.eye(k)).max() > tol:
        raise ContractViolationError("columns are not orthonormal")
    cols = [z[:, j] for j in range(k)]
    for i in range(n):
        v = np.zeros(n)
        v[i] = 1.0
        for _ in range(2):  # twice-is-enough reorthogonalization
            for c in cols:
                v = v - (c @ v) * c
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            cols.append(v / norm)
        if len(cols) == n:
            break
    if len(cols) != n:
        raise RuntimeError("failed to complete orthonormal basis")
    out = np.column_stack(cols)
    out[:, :k] = z
    return out


def svd(a):
    """Full SVD built on the symmetric Jacobi kernel applied to A^T A.

    Zero (or numerically tiny) singular values get their left vectors from an
    orthonormal completion, so `left` is always square orthogonal.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ContractViolationError("expected a 2-d array")
    if not np.all(np.isfinite(a)):
        raise ContractViolationError("matrix has non-finite entries")
    m, n = a.shape
    gram = sym_eig(a.T @ a)
    order = np.argsort(gram.values, kind="stable")[::-1]
    eigvals = gram.values[order]
    right = gram.vectors[:, order]
    r = min(m, n)
    singulars = np.sqrt(np.clip(eigvals[:r], 0.0, None))
    cutoff = 1e-12 * max(1.0, singulars[0] if r else 1.0)
    left_cols = []
    for i in range(r):
        if singulars[i] > cutoff:
            left_cols.append((a @ right[:, i]) / singulars[i])
        else:
            break
    if left_cols:
        base = np.column_stack(left_cols)
        # Products a @ v_i drift at machine precision; tighten before completing.
        for _ in range(2):
            q, _ = np.linalg.qr(base)
            base = q
        base = _sign_match(base, np.column_stack(left_cols))
        left = orthonormal_complete(base)
    else:
        left = np.eye(m)
    return SVDFactors(left, singulars, right)


def _sign_match(q, target):
    # QR may flip column signs; align with the unnormalized targets.
    q = q.copy()
    for j in range(q.shape[1]):
        if q[:, j] @ target[:, j] < 0:
            q[:, j] = -q[:, j]
    return q


def numerical_rank(m, tol=DEFAULT_RANK_TOL):
    """Number of singular values above tol * (largest singular value).

    Uses LAPACK singular values directly: rank decisions near the threshold
    need full relative accuracy, which the Gram-matrix route cannot give.
    """
    m = np.asarray(m)
    if m.size == 0:
        return 0
    if not np.all(np.isfinite(m)):
        raise ContractViolationError("matrix has non-finite entries")
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def random_orthogonal(rng, n):
    """Haar-ish random orthogonal matrix (QR of a Gaussian, signs fixed)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_stiefel(rng, n, k):
    """Random n x k frame with orthonormal columns."""
    q, r = np.linalg.qr(rng.standard_normal((n, k)))
    return q * np.sign(np.diag(r))
