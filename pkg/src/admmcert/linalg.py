"""Dense spectral helpers: reduced SVD, spectral constants, range projections.

Everything here is plain dense double-precision linear algebra aimed at
desk-scale certification runs (dimensions up to a couple of thousand).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AssumptionError

# Singular values at or below RANK_RTOL * s_max count as zero for rank decisions.
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class SpectralSummary:
    """Spectral constants of M^T M for a dense matrix M.

    sigma_min is the smallest eigenvalue of M^T M (zero whenever the column
    rank is deficient), sigma_plus the smallest positive one, and norm_mtm
    the largest, i.e. the squared spectral norm of M.
    """

    sigma_min: float
    sigma_plus: float
    norm_mtm: float
    rank: int


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {M.shape}")
    if M.size and not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def as_vector(v, dim: int | None = None, name: str = "vector") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {v.shape}")
    if dim is not None and v.shape[0] != dim:
        raise ValueError(f"{name} must have length {dim}, got {v.shape[0]}")
    if v.size and not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    return v


def reduced_svd(M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rank-revealing factorization M = left @ diag(vals) @ right.T.

    Both factors have orthonormal columns and vals holds only the strictly
    positive singular values.  A zero matrix yields an empty (rank 0)
    factorization rather than an error.
    """
    M = as_matrix(M)
    rows, cols = M.shape
    if M.size == 0 or not M.any():
        return np.zeros((rows, 0)), np.zeros(0), np.zeros((cols, 0))
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    r = int(np.count_nonzero(s > RANK_RTOL * s[0]))
    return U[:, :r].copy(), s[:r].copy(), Vt[:r].T.copy()


def spectral_summary(B) -> SpectralSummary:
    """Extreme eigenvalues of B^T B and the rank of B.

    Raises AssumptionError for B = 0: a zero coupling matrix makes the
    splitting meaningless and every admissibility constant degenerate.
    """
    B = as_matrix(B, "B")
    if B.size == 0 or not B.any():
        raise AssumptionError("coupling matrix B must be nonzero")
    s = np.linalg.svd(B, compute_uv=False)
    r = int(np.count_nonzero(s > RANK_RTOL * s[0]))
    sigma_plus = float(s[r - 1] ** 2)
    norm_mtm = float(s[0] ** 2)
    cols = B.shape[1]
    sigma_min = sigma_plus if r == cols else 0.0
    return SpectralSummary(sigma_min=sigma_min, sigma_plus=sigma_plus,
                           norm_mtm=norm_mtm, rank=r)


def project_onto_range(S, u) -> np.ndarray:
    """Euclidean projection of u onto the column space of S."""
    S = as_matrix(S, "S")
    u = as_vector(u, S.shape[0], "u")
    left, _, _ = reduced_svd(S)
    if left.shape[1] == 0:
        return np.zeros_like(u)
    return left @ (left.T @ u)


def range_inclusion_gap(B, A, b) -> float:
    """Worst relative distance of b and the columns of A from the range of B.

    Returns max over v in {b, columns of A} of ||v - P_B(v)|| / max(1, ||v||);
    a value at numerical zero certifies that the constraint right-hand side
    and the first block's range are reachable through the second block.
    """
    B = as_matrix(B, "B")
    A = as_matrix(A, "A")
    b = as_vector(b, B.shape[0], "b")
    if A.shape[0] != B.shape[0]:
        raise ValueError(
            f"A and B must have equal row counts, got {A.shape[0]} and {B.shape[0]}")
    left, _, _ = reduced_svd(B)

    def gap_of(v):
        resid = v - left @ (left.T @ v) if left.shape[1] else v
        return float(np.linalg.norm(resid) / max(1.0, np.linalg.norm(v)))

    gap = gap_of(b)
    if A.shape[1]:
        resid = A - left @ (left.T @ A) if left.shape[1] else A
        col_gaps = np.linalg.norm(resid, axis=0) / np.maximum(
            1.0, np.linalg.norm(A, axis=0))
        gap = max(gap, float(col_gaps.max()))
    return gap
