import numpy as np
import pytest

from doublecca.cca import CcaTransform
from doublecca.numerics import center_columns


def regularized_gram(x: np.ndarray, reg_eps: float) -> np.ndarray:
    xc, _ = center_columns(x)
    s = xc.T @ xc
    if reg_eps > 0:
        s = s + (reg_eps * np.trace(s) / s.shape[0]) * np.eye(s.shape[0])
    return s


def assert_cca_constraints(t: CcaTransform, x_a: np.ndarray, x_b: np.ndarray, tol: float = 1e-6):
    """Unit-covariance constraint check against the fit-time regularized Gram."""
    for w, x in ((t.w_a, x_a), (t.w_b, x_b)):
        s_reg = regularized_gram(x, t.config.reg_eps)
        gram = w.T @ s_reg @ w
        np.testing.assert_allclose(gram, np.eye(w.shape[1]), atol=tol)


def poincare_exp_map(v: np.ndarray) -> np.ndarray:
    """Test-only inverse of the log map: v -> tanh(||v||) * v / ||v||."""
    v = np.asarray(v, dtype=np.float64)
    norms = np.linalg.norm(v, axis=1)
    scale = np.ones_like(norms)
    nz = norms > 0
    scale[nz] = np.tanh(norms[nz]) / norms[nz]
    return v * scale[:, None]


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
