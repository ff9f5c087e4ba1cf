import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from doublecca.cca import CcaConfig, canonical_correlations, fit_cca, project
from doublecca.errors import DegenerateView, RankRequestTooLarge, ShapeMismatch

from conftest import assert_cca_constraints, regularized_gram


# -- independent oracles --------------------------------------------------------

def oracle_correlations_generalized_eig(x_a, x_b, out_dim, reg_eps=0.0):
    """Top canonical correlations via the symmetric generalized eigenproblem

        [0   Sxy] w = rho [Sxx  0 ] w
        [Syx 0  ]         [0   Syy]

    solved by scipy, a completely different route from whitening + SVD.
    """
    from scipy.linalg import eigh

    xa_c = x_a - x_a.mean(axis=0)
    xb_c = x_b - x_b.mean(axis=0)
    sxx = xa_c.T @ xa_c
    syy = xb_c.T @ xb_c
    sxy = xa_c.T @ xb_c
    if reg_eps > 0:
        sxx = sxx + (reg_eps * np.trace(sxx) / sxx.shape[0]) * np.eye(sxx.shape[0])
        syy = syy + (reg_eps * np.trace(syy) / syy.shape[0]) * np.eye(syy.shape[0])
    da, db = sxx.shape[0], syy.shape[0]
    lhs = np.zeros((da + db, da + db))
    lhs[:da, da:] = sxy
    lhs[da:, :da] = sxy.T
    rhs = np.zeros_like(lhs)
    rhs[:da, :da] = sxx
    rhs[da:, da:] = syy
    evals = eigh(lhs, rhs, eigvals_only=True)
    return np.sort(evals)[::-1][:out_dim]


def oracle_correlations_maximization(x_a, x_b, out_dim, seed=7, restarts=12):
    """Numerical maximization of corr(X_a u, X_b v) over unit-variance
    directions, deflating by covariance-orthogonality to earlier pairs."""
    from scipy.optimize import minimize

    xa_c = x_a - x_a.mean(axis=0)
    xb_c = x_b - x_b.mean(axis=0)
    sxx = xa_c.T @ xa_c
    syy = xb_c.T @ xb_c
    sxy = xa_c.T @ xb_c
    da = sxx.shape[0]
    rng = np.random.default_rng(seed)

    found_u: list[np.ndarray] = []
    found_v: list[np.ndarray] = []
    rhos = []
    for _ in range(out_dim):
        cons = [
            {"type": "eq", "fun": lambda w: w[:da] @ sxx @ w[:da] - 1.0},
            {"type": "eq", "fun": lambda w: w[da:] @ syy @ w[da:] - 1.0},
        ]
        for up in found_u:
            cons.append({"type": "eq", "fun": lambda w, up=up: w[:da] @ sxx @ up})
        for vp in found_v:
            cons.append({"type": "eq", "fun": lambda w, vp=vp: w[da:] @ syy @ vp})

        def neg_corr(w):
            return -(w[:da] @ sxy @ w[da:])

        best = None
        for _ in range(restarts):
            u0 = rng.standard_normal(da)
            v0 = rng.standard_normal(syy.shape[0])
            u0 /= np.sqrt(u0 @ sxx @ u0)
            v0 /= np.sqrt(v0 @ syy @ v0)
            res = minimize(
                neg_corr,
                np.concatenate([u0, v0]),
                constraints=cons,
                method="SLSQP",
                options={"maxiter": 800, "ftol": 1e-14},
            )
            if res.success and (best is None or res.fun < best.fun):
                best = res
        assert best is not None, "oracle optimizer failed to converge"
        found_u.append(best.x[:da])
        found_v.append(best.x[da:])
        rhos.append(-best.fun)
    return np.asarray(rhos)


# -- fit ------------------------------------------------------------------------

class TestFitCca:
    def test_identical_views_correlate_perfectly(self, rng):
        x = rng.standard_normal((20, 3))
        t = fit_cca(x, x, CcaConfig(out_dim=3, reg_eps=0.0))
        np.testing.assert_allclose(t.correlations, np.ones(3), atol=1e-8)

    def test_invariant_to_invertible_map(self, rng):
        x = rng.standard_normal((25, 4))
        r = rng.standard_normal((4, 4)) + 4.0 * np.eye(4)
        t = fit_cca(x, x @ r, CcaConfig(out_dim=4, reg_eps=0.0))
        np.testing.assert_allclose(t.correlations, np.ones(4), atol=1e-8)

    def test_matches_maximization_oracle(self, rng):
        x_a = rng.standard_normal((40, 4))
        x_b = rng.standard_normal((40, 3))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=2, reg_eps=0.0))
        oracle = oracle_correlations_maximization(x_a, x_b, out_dim=2)
        np.testing.assert_allclose(t.correlations, oracle, atol=1e-6)

    def test_matches_generalized_eig_oracle(self, rng):
        x_a = rng.standard_normal((60, 5))
        x_b = rng.standard_normal((60, 4))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=3, reg_eps=0.0))
        oracle = oracle_correlations_generalized_eig(x_a, x_b, out_dim=3)
        np.testing.assert_allclose(t.correlations, oracle, atol=1e-6)

    def test_constraints_hold(self, rng):
        x_a = rng.standard_normal((30, 5))
        x_b = rng.standard_normal((30, 4))
        for reg in (0.0, 1e-4, 1e-2):
            t = fit_cca(x_a, x_b, CcaConfig(out_dim=3, reg_eps=reg))
            assert_cca_constraints(t, x_a, x_b)

    def test_row_count_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            fit_cca(rng.standard_normal((10, 3)), rng.standard_normal((11, 3)), CcaConfig(2))

    def test_rank_request_too_large(self, rng):
        x = rng.standard_normal((4, 6))
        with pytest.raises(RankRequestTooLarge):
            fit_cca(x, x, CcaConfig(out_dim=4))  # rows - 1 = 3

    def test_degenerate_view(self):
        x_a = np.ones((10, 3))  # zero variance after centering
        x_b = np.random.default_rng(0).standard_normal((10, 3))
        with pytest.raises(DegenerateView):
            fit_cca(x_a, x_b, CcaConfig(out_dim=1))

    def test_correlations_within_bounds_and_sorted(self, rng):
        x_a = rng.standard_normal((50, 6))
        x_b = 0.5 * x_a[:, :4] + 0.8 * rng.standard_normal((50, 4))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=4))
        c = t.correlations
        assert np.all(c >= -1e-9) and np.all(c <= 1 + 1e-6)
        assert np.all(np.diff(c) <= 1e-12)

    def test_deterministic(self, rng):
        x_a = rng.standard_normal((30, 5))
        x_b = rng.standard_normal((30, 4))
        t1 = fit_cca(x_a, x_b, CcaConfig(out_dim=3))
        t2 = fit_cca(x_a.copy(), x_b.copy(), CcaConfig(out_dim=3))
        np.testing.assert_array_equal(t1.w_a, t2.w_a)
        np.testing.assert_array_equal(t1.w_b, t2.w_b)

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 10_000), scale=st.floats(1e-3, 1e3))
    def test_scale_robustness(self, seed, scale):
        gen = np.random.default_rng(seed)
        x_a = gen.standard_normal((30, 4))
        x_b = gen.standard_normal((30, 3))
        base = fit_cca(x_a, x_b, CcaConfig(out_dim=2, reg_eps=0.0))
        scaled = fit_cca(x_a * scale, x_b, CcaConfig(out_dim=2, reg_eps=0.0))
        np.testing.assert_allclose(base.correlations, scaled.correlations, atol=1e-8)

    def test_scale_robustness_survives_relative_ridge(self, rng):
        # The ridge is trace-scaled, so even regularized fits ignore units.
        x_a = rng.standard_normal((30, 4))
        x_b = rng.standard_normal((30, 3))
        base = fit_cca(x_a, x_b, CcaConfig(out_dim=2, reg_eps=1e-3))
        scaled = fit_cca(x_a * 37.0, x_b, CcaConfig(out_dim=2, reg_eps=1e-3))
        np.testing.assert_allclose(base.correlations, scaled.correlations, atol=1e-8)


# -- project --------------------------------------------------------------------

class TestProject:
    def test_training_projection_satisfies_constraint(self, rng):
        x_a = rng.standard_normal((40, 5))
        x_b = rng.standard_normal((40, 4))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=3, reg_eps=1e-4))
        z = project(t, x_a, "a")
        # Projected data reproduces the fit-time unit-covariance constraint
        # once the ridge term is accounted for.
        ridge = regularized_gram(x_a, t.config.reg_eps) - regularized_gram(x_a, 0.0)
        gram = z.T @ z + t.w_a.T @ ridge @ t.w_a
        np.testing.assert_allclose(gram, np.eye(3), atol=1e-6)

    def test_mean_row_maps_to_zero(self, rng):
        x_a = rng.standard_normal((15, 4))
        x_b = rng.standard_normal((15, 3))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=2))
        z = project(t, t.mean_a.reshape(1, -1), "a")
        np.testing.assert_allclose(z, 0.0, atol=1e-12)

    def test_perfectly_correlated_pair_projects_identically(self, rng):
        x = rng.standard_normal((20, 3))
        t = fit_cca(x, x, CcaConfig(out_dim=3, reg_eps=0.0))
        z_a = project(t, x, "a")
        z_b = project(t, x, "b")
        for j in range(3):
            r = np.corrcoef(z_a[:, j], z_b[:, j])[0, 1]
            assert abs(r - 1.0) < 1e-8

    def test_wrong_width_rejected(self, rng):
        x_a = rng.standard_normal((10, 4))
        x_b = rng.standard_normal((10, 3))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=2))
        with pytest.raises(ShapeMismatch):
            project(t, rng.standard_normal((5, 3)), "a")


# -- canonical correlations -------------------------------------------------------

class TestCanonicalCorrelations:
    def test_identical_views(self, rng):
        x = rng.standard_normal((20, 3))
        t = fit_cca(x, x, CcaConfig(out_dim=3, reg_eps=0.0))
        np.testing.assert_allclose(canonical_correlations(t), np.ones(3), atol=1e-8)

    def test_equals_pearson_of_projections(self, rng):
        x_a = rng.standard_normal((80, 5))
        x_b = 0.6 * x_a[:, :3] + rng.standard_normal((80, 3))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=3, reg_eps=0.0))
        z_a = project(t, x_a, "a")
        z_b = project(t, x_b, "b")
        pearson = [np.corrcoef(z_a[:, j], z_b[:, j])[0, 1] for j in range(3)]
        np.testing.assert_allclose(canonical_correlations(t), pearson, atol=1e-6)

    def test_independent_noise_stays_small(self):
        gen = np.random.default_rng(99)
        x_a = gen.standard_normal((500, 4))
        x_b = gen.standard_normal((500, 3))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=3, reg_eps=0.0))
        oracle = oracle_correlations_generalized_eig(x_a, x_b, out_dim=3)
        np.testing.assert_allclose(t.correlations, oracle, atol=1e-6)
        assert t.correlations.max() < 0.3

    def test_non_increasing(self, rng):
        x_a = rng.standard_normal((60, 6))
        x_b = rng.standard_normal((60, 5))
        t = fit_cca(x_a, x_b, CcaConfig(out_dim=5))
        assert np.all(np.diff(canonical_correlations(t)) <= 1e-12)
