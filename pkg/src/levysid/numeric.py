"""Dense numeric kernels: least squares and symmetric eigendecomposition.

Problem sizes here are tiny (K and n at most a few dozen), so the solvers
favor determinism and robustness over speed: normal equations through a
Cholesky factorization with an explicit condition estimate, a QR fallback
past cond(A) = 1e10, and a cyclic Jacobi iteration for eigenpairs.
"""

from __future__ import annotations

import warnings

import numpy as np

from .errors import (
    ConditioningWarning,
    DomainError,
    NonSymmetricError,
    RankDeficiencyError,
)

COND_THRESHOLD = 1e10

# cond(A)^2 = cond(AtA); eigenvalue ratios below this are treated as rank loss
_SINGULAR_RATIO = 1e-30


def sym_eigen(a, max_sweeps=60):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (Q, w): orthogonal Q and eigenvalues w in descending order with
    a = Q diag(w) Q^T. Sign convention: the first entry of each eigenvector
    whose magnitude exceeds 1e-12 is made positive.
    """
    A = np.array(a, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"matrix must be square, got shape {A.shape}")
    n = A.shape[0]
    scale = max(1.0, float(np.abs(A).max()))
    if float(np.abs(A - A.T).max()) > 1e-10 * scale:
        raise NonSymmetricError(
            "matrix is not symmetric within 1e-10 relative tolerance")
    A = (A + A.T) / 2.0
    V = np.eye(n)
    if n == 1:
        return V, A[0, 0:1].copy()

    fro = float(np.sqrt((A * A).sum()))
    stop = 1e-15 * max(fro, 1e-300)
    for _ in range(max_sweeps):
        # summed directly: fro^2 - diag^2 cancels catastrophically near convergence
        offdiag = A - np.diag(np.diag(A))
        off = float(np.sqrt((offdiag * offdiag).sum()))
        if off <= stop:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-36:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                # smaller-angle root, stable against theta overflow
                t = np.sign(theta) / (abs(theta) + np.sqrt(1.0 + theta * theta))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rp = A[p, :].copy()
                rq = A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp = A[:, p].copy()
                cq = A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = V[:, order]
    for k in range(n):
        col = V[:, k]
        lead = np.flatnonzero(np.abs(col) > 1e-12)

        if lead.size and col[lead[0]] < 0.0:
            V[:, k] = -col
    return V, w


def _cholesky_solve(G, C):
    L = np.linalg.cholesky(G)
    K = G.shape[0]
    Y = np.empty_like(C, dtype=np.float64)
    for i in range(K):
        Y[i] = (C[i] - L[i, :i] @ Y[:i]) / L[i, i]
    X = np.empty_like(Y)
    for i in range(K - 1, -1, -1):
        X[i] = (Y[i] - L[i + 1:, i] @ X[i + 1:]) / L[i, i]
    return X


def _gram_cond(G):
    _, w = sym_eigen(G)
    wmax = float(w[0])
    wmin = float(w[-1])
    if wmax <= 0.0:
        return np.inf, wmax, wmin
    if wmin <= wmax * _SINGULAR_RATIO:
        return np.inf, wmax, wmin
    return float(np.sqrt(wmax / wmin)), wmax, wmin


def solve_gram(G, C):
    """Solve the normal equations G x = C (G = AtA, C = AtB) for one or more
    right-hand sides. Used by the chunked regressions, where A itself is never
    materialized; past the conditioning threshold the solve switches to an
    eigendecomposition pseudo-inverse and warns.
    """
    G = np.asarray(G, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    cond, wmax, wmin = _gram_cond(G)
    if not np.isfinite(cond):
        raise RankDeficiencyError(
            "normal equations are numerically singular", cond=cond)
    if cond <= COND_THRESHOLD:
        try:
            return _cholesky_solve(G, C)
        except np.linalg.LinAlgError:
            pass  # borderline indefinite from rounding: take the eigen path
    warnings.warn(
        f"normal equations ill-conditioned (cond ~ {cond:.3e}); "
        "using eigendecomposition pseudo-inverse",
        ConditioningWarning, stacklevel=2)
    Q, w = sym_eigen(G)
    return Q @ ((Q.T @ C).T / w).T


def _qr_solve(A, B):
    Q, R = np.linalg.qr(A, mode="reduced")
    rdiag = np.abs(np.diag(R))
    if rdiag.min() <= rdiag.max() * 1e-13:
        raise RankDeficiencyError(
            "design matrix is rank deficient",
            cond=np.inf if rdiag.min() == 0.0 else rdiag.max() / rdiag.min())
    Y = Q.T @ B
    K = R.shape[0]
    X = np.empty_like(Y, dtype=np.float64)
    for i in range(K - 1, -1, -1):
        X[i] = (Y[i] - R[i, i + 1:] @ X[i + 1:]) / R[i, i]
    return X


def solve_least_squares(A, B):
    """Least-squares solution of A x = B for tall A (M >= K).

    Solves the normal equations through Cholesky while cond(A) stays below
    1e10; beyond that a ConditioningWarning is issued and a Householder QR
    path takes over. Rank-deficient systems raise RankDeficiencyError with
    the condition estimate attached.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2:
        raise DomainError(f"A must be 2-D, got shape {A.shape}")
    M, K = A.shape
    squeeze = B.ndim == 1
    if squeeze:
        B = B[:, None]
    if B.shape[0] != M:
        raise DomainError(f"B has {B.shape[0]} rows, A has {M}")
    if M < K or K < 1:
        raise DomainError(f"need M >= K >= 1, got M={M}, K={K}")

    G = A.T @ A
    C = A.T @ B
    cond, _, _ = _gram_cond(G)
    if np.isfinite(cond) and cond <= COND_THRESHOLD:
        X = _cholesky_solve(G, C)
    else:
        warnings.warn(
            f"least-squares system ill-conditioned (cond ~ {cond:.3e}); "
            "falling back to QR",
            ConditioningWarning, stacklevel=2)
        X = _qr_solve(A, B)
    return X[:, 0] if squeeze else X
