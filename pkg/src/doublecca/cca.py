"""Regularized canonical correlation analysis.

Given two views of the same samples (rows aligned), find projection matrices
that maximize the correlation between the projected coordinates under
unit-covariance constraints. Solved by whitening the cross-covariance and
taking its thin SVD:

    B_a = (S_aa + ridge_a)^(-1/2),  B_b = (S_bb + ridge_b)^(-1/2)
    U, S, Vt = svd(B_a @ S_ab @ B_b)
    W_a = B_a @ U_k,  W_b = B_b @ V_k

Covariances are plain Gram matrices of the centered data (no 1/(n-1) factor;
any consistent scaling cancels in the products the pipeline consumes). The
ridge is relative, reg_eps * trace/dim per view, so it is unit-free and the
fit is invariant to rescaling a view.

With reg_eps > 0 the stored ``correlations`` are the singular values of the
regularized problem and can sit slightly below the per-column Pearson
correlation of the projected training data; the two agree within tight
tolerance only at reg_eps = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateView, RankRequestTooLarge, ShapeMismatch
from .numerics import Matrix, as_matrix, center_columns, sym_inv_sqrt, thin_svd


@dataclass(frozen=True)
class CcaConfig:
    out_dim: int
    reg_eps: float = 1e-4
    eig_floor: float = 1e-10  # relative to the largest eigenvalue per view

    def __post_init__(self) -> None:
        if self.out_dim < 1:
            raise ValueError("out_dim must be >= 1")
        if self.reg_eps < 0:
            raise ValueError("reg_eps must be >= 0")
        if not (self.eig_floor > 0):
            raise ValueError("eig_floor must be > 0")


@dataclass(frozen=True)
class CcaTransform:
    """A fitted CCA: projections, stored means, canonical correlations."""

    w_a: Matrix
    w_b: Matrix
    mean_a: np.ndarray
    mean_b: np.ndarray
    correlations: np.ndarray
    config: CcaConfig = field(repr=False)


def _regularized_gram(xc: Matrix, reg_eps: float, name: str) -> Matrix:
    s = xc.T @ xc
    tr = float(np.trace(s))
    if tr <= 0.0:
        raise DegenerateView(f"view {name} has zero total variance")
    if reg_eps > 0:
        s = s + (reg_eps * tr / s.shape[0]) * np.eye(s.shape[0])
    return s


def _whitener(s_reg: Matrix, eig_floor_rel: float) -> Matrix:
    lam_max = float(np.linalg.eigvalsh(s_reg)[-1])
    return sym_inv_sqrt(s_reg, eig_floor_rel * lam_max)


def fit_cca(x_a: Matrix, x_b: Matrix, config: CcaConfig) -> CcaTransform:
    """Fit regularized CCA on two row-aligned views.

    Raises ShapeMismatch when row counts differ, RankRequestTooLarge when
    out_dim exceeds min(d_a, d_b, rows - 1), DegenerateView when a view has
    no variance.
    """
    a = as_matrix(x_a, "x_a")
    b = as_matrix(x_b, "x_b")
    if a.shape[0] != b.shape[0]:
        raise ShapeMismatch(f"row counts differ: {a.shape[0]} vs {b.shape[0]}")
    if a.shape[0] < 2:
        raise ShapeMismatch("CCA needs at least 2 samples")
    limit = min(a.shape[1], b.shape[1], a.shape[0] - 1)
    if config.out_dim > limit:
        raise RankRequestTooLarge(
            f"out_dim={config.out_dim} exceeds min(d_a, d_b, rows - 1) = {limit}"
        )

    ac, mean_a = center_columns(a)
    bc, mean_b = center_columns(b)
    s_aa = _regularized_gram(ac, config.reg_eps, "A")
    s_bb = _regularized_gram(bc, config.reg_eps, "B")
    s_ab = ac.T @ bc

    white_a = _whitener(s_aa, config.eig_floor)
    white_b = _whitener(s_bb, config.eig_floor)
    svd = thin_svd(white_a @ s_ab @ white_b, config.out_dim)

    return CcaTransform(
        w_a=white_a @ svd.u,
        w_b=white_b @ svd.vt.T,
        mean_a=mean_a,
        mean_b=mean_b,
        correlations=svd.singular_values,
        config=config,
    )


def project(t: CcaTransform, x: Matrix, side: str) -> Matrix:
    """Project new data with a fitted transform; side is "a" or "b"."""
    key = side.lower()
    if key not in ("a", "b"):
        raise ValueError("side must be 'a' or 'b'")
    w = t.w_a if key == "a" else t.w_b
    mean = t.mean_a if key == "a" else t.mean_b
    m = as_matrix(x, "x")
    if m.shape[1] != w.shape[0]:
        raise ShapeMismatch(f"expected {w.shape[0]} columns for side {key}, got {m.shape[1]}")
    return (m - mean) @ w


def canonical_correlations(t: CcaTransform) -> np.ndarray:
    """The achieved correlation of each projected coordinate pair."""
    return t.correlations.copy()
