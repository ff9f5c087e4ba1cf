"""Dense linear-algebra kernels: centering, symmetric eigendecomposition,
thin SVD, and the symmetric inverse square root with eigenvalue flooring.

Everything runs in 64-bit floats. Results are deterministic: LAPACK output is
post-processed with a fixed sign convention (the largest-magnitude entry of
each eigenvector / left-singular-vector column is made positive).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFinite, NotSymmetric, RankRequestTooLarge, ShapeMismatch

SYMMETRY_RTOL = 1e-9

Matrix = np.ndarray


def as_matrix(x, name: str = "matrix") -> Matrix:
    """Coerce to a validated 2-D float64 array (finite, at least 1x1)."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeMismatch(f"{name} must be 2-D, got ndim={a.ndim}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeMismatch(f"{name} must have at least one row and column, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} contains NaN or Inf")
    return a


@dataclass(frozen=True)
class SymEig:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""

    eigenvalues: np.ndarray
    eigenvectors: Matrix


@dataclass(frozen=True)
class ThinSvd:
    """Top-k singular triplets, singular values descending and nonnegative."""

    u: Matrix
    singular_values: np.ndarray
    vt: Matrix


def center_columns(x: Matrix) -> tuple[Matrix, np.ndarray]:
    """Subtract the column means; returns (centered, means)."""
    a = as_matrix(x)
    means = a.mean(axis=0)
    return a - means, means


def _fix_column_signs(u: Matrix, vt: Matrix | None = None) -> tuple[Matrix, Matrix | None]:
    # Sign convention: largest-magnitude entry of each column of u positive.
    # Ties resolve to the first occurrence (np.argmax on |column|).
    u = u.copy()
    vt = None if vt is None else vt.copy()
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0:
            u[:, j] = -u[:, j]
            if vt is not None:
                vt[j, :] = -vt[j, :]
    return u, vt


def _check_symmetric(s: Matrix, name: str) -> Matrix:
    a = as_matrix(s, name)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got {a.shape}")
    norm = np.linalg.norm(a)
    asym = np.linalg.norm(a - a.T)
    if asym > SYMMETRY_RTOL * max(norm, 1e-300):
        raise NotSymmetric(
            f"{name} asymmetry {asym:.3e} exceeds {SYMMETRY_RTOL:.0e} relative tolerance"
        )
    # Symmetrize exactly so eigh sees a bitwise-symmetric operand.
    return (a + a.T) / 2.0


def sym_eig(s: Matrix) -> SymEig:
    """Eigendecomposition of a symmetric matrix, sorted descending."""
    a = _check_symmetric(s, "s")
    evals, evecs = np.linalg.eigh(a)
    evals = evals[::-1].copy()
    evecs = evecs[:, ::-1]
    evecs, _ = _fix_column_signs(evecs)
    return SymEig(eigenvalues=evals, eigenvectors=evecs)


def sym_inv_sqrt(s: Matrix, eig_floor: float) -> Matrix:
    """Inverse square root of a symmetric matrix with eigenvalue flooring.

    Returns B = Q diag(max(lambda, eig_floor))^(-1/2) Q^T. Flooring (rather
    than truncation) keeps the result full rank, which downstream matrix
    inversions rely on.
    """
    if not (eig_floor > 0):
        raise ValueError("eig_floor must be positive")
    eig = sym_eig(s)
    floored = np.maximum(eig.eigenvalues, eig_floor)
    q = eig.eigenvectors
    b = (q / np.sqrt(floored)) @ q.T
    # Enforce exact symmetry lost to floating-point accumulation.
    return (b + b.T) / 2.0


def thin_svd(a: Matrix, k: int) -> ThinSvd:
    """Top-k singular triplets of a dense matrix, deterministic signs."""
    m = as_matrix(a, "a")
    max_k = min(m.shape)
    if not (1 <= k <= max_k):
        raise RankRequestTooLarge(f"k={k} outside [1, {max_k}] for shape {m.shape}")
    u, s, vt = np.linalg.svd(m, full_matrices=False)
    u, vt = u[:, :k], vt[:k, :]
    u, vt = _fix_column_signs(u, vt)
    return ThinSvd(u=u, singular_values=s[:k].copy(), vt=vt)
