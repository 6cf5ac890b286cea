import numpy as np
import pytest
from scipy.optimize import minimize

from progpipe import models
from progpipe.errors import DataError
from progpipe.models import (
    CartParams,
    ElasticNetParams,
    ForestParams,
    GbmParams,
    GpParams,
    SvmParams,
    mean_deviance_gradient,
    train_cart,
    train_elastic_net,
    train_gbm,
    train_gp_rbf,
    train_random_forest,
    train_svm_rbf,
)


def six_point_data():
    """Small set for penalized optimizer comparisons."""
    X = np.asarray([[0.2, 1.1], [-0.7, 0.3], [1.4, -0.5],
                    [-1.1, -0.9], [0.6, 0.8], [-0.3, 1.5]])
    y = np.asarray([1, 0, 1, 0, 1, 0])
    return X, y


def overlapping_data():
    """Non-separable set so the unpenalized MLE stays finite."""
    r = np.random.default_rng(3)
    X = r.normal(size=(40, 3))
    eta = 0.8 * X[:, 0] - 0.5 * X[:, 2]
    y = (r.random(40) < 1 / (1 + np.exp(-eta))).astype(int)
    return X, y


def en_objective(X, y, lam, alpha):
    def f(theta):
        b0, beta = theta[0], theta[1:]
        eta = b0 + X @ beta
        nll = np.mean(np.log1p(np.exp(-np.abs(eta))) + np.maximum(eta, 0) - y * eta)
        return nll + lam * (alpha * np.abs(beta).sum()
                            + (1 - alpha) / 2 * (beta**2).sum())
    return f


def separable_blobs(rng, n=200, p=4, gap=3.0):
    n_pos = n // 2
    X = rng.normal(size=(n, p))
    X[:n_pos, 0] += gap
    y = np.asarray([1] * n_pos + [0] * (n - n_pos))
    return X, y


def train_auc(model, X, y):
    from progpipe.metrics import auc

    return auc(models.predict_proba(model, X), y)


class TestElasticNet:
    def test_unpenalized_score_equations(self):
        X, y = overlapping_data()
        model = train_elastic_net(X, y, ElasticNetParams(0.0, 0.5))
        grad = mean_deviance_gradient(X, y, model.intercept, model.coef)
        assert np.abs(grad).max() < 1e-6

    def test_matches_numeric_optimizer(self):
        X, y = six_point_data()
        lam, alpha = 0.05, 0.3
        model = train_elastic_net(X, y, ElasticNetParams(lam, alpha))
        res = minimize(en_objective(X, y, lam, alpha), np.zeros(3),
                       method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
        np.testing.assert_allclose(
            np.concatenate(([model.intercept], model.coef)), res.x, atol=1e-5
        )

    def test_constant_features_balanced_labels(self):
        X = np.ones((4, 2))
        X -= X.mean(axis=0)  # all-zero columns
        y = np.asarray([1, 0, 1, 0])
        model = train_elastic_net(X, y, ElasticNetParams(0.1, 0.5))
        assert model.intercept == pytest.approx(0.0, abs=1e-12)
        assert np.all(model.coef == 0.0)
        assert models.predict_proba(model, X)[0] == pytest.approx(0.5)

    def test_ridge_shrinkage_monotone(self, rng):
        X, y = separable_blobs(rng, n=60, gap=1.0)
        small = train_elastic_net(X, y, ElasticNetParams(1.0, 0.0))
        large = train_elastic_net(X, y, ElasticNetParams(10.0, 0.0))
        assert np.linalg.norm(large.coef) <= np.linalg.norm(small.coef) + 1e-12

    def test_lasso_kills_all_coefficients(self, rng):
        X, y = separable_blobs(rng, n=40, gap=1.0)
        model = train_elastic_net(X, y, ElasticNetParams(5.0, 1.0))
        assert np.all(model.coef == 0.0)

    def test_param_validation(self):
        with pytest.raises(DataError):
            ElasticNetParams(-1.0, 0.5)
        with pytest.raises(DataError):
            ElasticNetParams(1.0, 1.5)


class TestCart:
    def test_pure_root(self):
        X = np.arange(25, dtype=float).reshape(-1, 1)
        y = np.ones(25, dtype=int)
        model = train_cart(X, y, CartParams(1))
        assert np.all(models.predict_proba(model, X) == 1.0)

    def test_threshold_at_closest_cross_label_midpoint(self):
        x = np.concatenate([np.linspace(-3, -0.4, 12), np.linspace(0.2, 3, 12)])
        y = (x >= 0).astype(int)
        model = train_cart(x.reshape(-1, 1), y, CartParams(1, minsplit=2, minbucket=1))
        root = model.root
        # oracle: enumerate all midpoints; the best Gini split is the gap
        assert root.threshold == pytest.approx((-0.4 + 0.2) / 2)
        probs = models.predict_proba(model, x.reshape(-1, 1))
        np.testing.assert_array_equal(probs, y.astype(float))

    def test_large_alpha_collapses_to_base_rate(self):
        x = np.concatenate([np.linspace(-3, -0.4, 15), np.linspace(0.2, 3, 10)])
        y = (x >= 0).astype(int)
        model = train_cart(x.reshape(-1, 1), y, CartParams(cp_index=250_000,
                                                           minsplit=2, minbucket=1))
        probs = models.predict_proba(model, x.reshape(-1, 1))
        assert np.all(probs == pytest.approx(10 / 25))

    def test_exhaustive_split_oracle(self, rng):
        # root split must match brute force over all feature/midpoint pairs
        X = rng.normal(size=(30, 3))
        y = (X[:, 1] + 0.3 * rng.normal(size=30) > 0).astype(int)
        model = train_cart(X, y, CartParams(1, minsplit=30, minbucket=1))

        def gini(labels):
            if len(labels) == 0:
                return 0.0
            p = labels.mean()
            return 2 * p * (1 - p)

        best = None
        for f in range(3):
            vals = np.unique(X[:, f])
            for a, b in zip(vals, vals[1:]):
                thr = (a + b) / 2
                left = y[X[:, f] <= thr]
                right = y[X[:, f] > thr]
                gain = gini(y) - (len(left) * gini(left) + len(right) * gini(right)) / 30
                key = (-gain, f, thr)
                if best is None or key < best:
                    best = key
        assert model.root.feature == best[1]
        assert model.root.threshold == pytest.approx(best[2])


class TestRandomForest:
    def test_reduces_to_cart(self, rng):
        X = rng.normal(size=(60, 4))
        y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
        rf = train_random_forest(
            X, y,
            ForestParams(mtry=4, max_depth=None, min_rows=7,
                         min_split_improvement=0.0, n_trees=1, bootstrap=False),
            rng=np.random.default_rng(0),
        )
        cart = train_cart(X, y, CartParams(cp_index=0))
        np.testing.assert_array_equal(
            models.predict_proba(rf, X), models.predict_proba(cart, X)
        )

    def test_constant_features_predict_base_rate(self, rng):
        X = np.zeros((40, 3))
        y = np.asarray([1] * 10 + [0] * 30)
        rf = train_random_forest(X, y, ForestParams(mtry=3, n_trees=10),
                                 rng=np.random.default_rng(1))
        probs = models.predict_proba(rf, X)
        assert np.all(probs == pytest.approx(0.25, abs=0.15))  # bootstrap jitter

    def test_separable_high_auc(self, rng):
        X, y = separable_blobs(rng, n=200, gap=3.0)
        rf = train_random_forest(
            X, y, ForestParams(mtry=2, min_rows=1, n_trees=100),
            rng=np.random.default_rng(2),
        )
        assert train_auc(rf, X, y) >= 0.99

    def test_same_rng_stream_reproduces(self, rng):
        X, y = separable_blobs(rng, n=80, gap=1.0)
        p1 = models.predict_proba(
            train_random_forest(X, y, ForestParams(mtry=2, n_trees=15),
                                rng=np.random.default_rng(7)), X)
        p2 = models.predict_proba(
            train_random_forest(X, y, ForestParams(mtry=2, n_trees=15),
                                rng=np.random.default_rng(7)), X)
        np.testing.assert_array_equal(p1, p2)


class TestGbm:
    def test_single_stump_recovers_threshold(self):
        x = np.concatenate([np.linspace(-3, -0.4, 12), np.linspace(0.2, 3, 12)])
        y = (x >= 0).astype(int)
        model = train_gbm(x.reshape(-1, 1), y,
                          GbmParams(n_trees=1, max_depth=1, learn_rate=1.0,
                                    min_rows=1, min_split_improvement=0.0))
        assert model.trees[0].threshold == pytest.approx((-0.4 + 0.2) / 2)

    def test_vanishing_learn_rate_gives_base_rate(self, rng):
        X, y = separable_blobs(rng, n=50, gap=2.0)
        model = train_gbm(X, y, GbmParams(n_trees=1, max_depth=3,
                                          learn_rate=1e-9, min_rows=1))
        probs = models.predict_proba(model, X)
        assert np.all(np.abs(probs - y.mean()) < 1e-6)

    def test_training_logloss_nonincreasing(self, rng):
        X, y = separable_blobs(rng, n=100, gap=1.0)
        model = train_gbm(X, y, GbmParams(n_trees=40, max_depth=3,
                                          learn_rate=0.11, min_rows=5))
        losses = np.asarray(model.train_logloss)
        assert np.all(np.diff(losses) <= 1e-12)

    def test_degenerate_base_rate_clipped(self):
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = np.ones(10, dtype=int)
        model = train_gbm(X, y, GbmParams(n_trees=2, max_depth=2, learn_rate=0.1))
        probs = models.predict_proba(model, X)
        assert np.all(np.isfinite(probs)) and np.all(probs <= 1.0)


class TestSvm:
    def test_symmetric_pair(self):
        X = np.asarray([[-1.0], [1.0]])
        y = np.asarray([0, 1])
        for c, sigma in [(0.5, 0.3), (2.0, 1.0)]:
            model = train_svm_rbf(X, y, SvmParams(c, sigma),
                                  rng=np.random.default_rng(0))
            assert model.decision_scores(np.asarray([[0.0]]))[0] == pytest.approx(0.0, abs=1e-9)
            assert models.predict_proba(model, np.asarray([[0.0]]))[0] == pytest.approx(0.5, abs=1e-6)

    def test_kkt_audit(self, rng):
        X, y = separable_blobs(rng, n=60, gap=1.0)
        params = SvmParams(1.0, 0.5)
        model = train_svm_rbf(X, y, params, rng=np.random.default_rng(0))
        assert model.kkt_violation <= 1e-3

    def test_box_constraints(self, rng):
        from progpipe.models.svm import _Smo, rbf_kernel

        X, y = separable_blobs(rng, n=50, gap=0.5)
        y_pm = np.where(y == 1, 1.0, -1.0)
        smo = _Smo(rbf_kernel(X, X, 0.5), y_pm, c=1.0)
        smo.solve()
        assert np.all(smo.alpha >= -1e-12) and np.all(smo.alpha <= 1.0 + 1e-12)
        assert smo.max_kkt_violation() <= 1e-3

    def test_separable_perfect_training_accuracy(self, rng):
        X, y = separable_blobs(rng, n=80, p=2, gap=4.0)
        model = train_svm_rbf(X, y, SvmParams(100.0, 0.5),
                              rng=np.random.default_rng(0))
        pred = (models.predict_proba(model, X) >= 0.5).astype(int)
        assert np.all(pred == y)


class TestGp:
    def test_single_positive_point(self):
        X = np.asarray([[0.5]])
        y = np.asarray([1])
        model = train_gp_rbf(X, y, GpParams(1.0))
        assert models.predict_proba(model, X)[0] > 0.5

    def test_mirrored_pair_symmetry(self):
        X = np.asarray([[1.2], [-1.2]])
        y = np.asarray([1, 0])
        model = train_gp_rbf(X, y, GpParams(0.8))
        p0 = models.predict_proba(model, np.asarray([[0.0]]))[0]
        assert p0 == pytest.approx(0.5, abs=1e-9)

    def test_mode_gradient_converged(self, rng):
        X, y = separable_blobs(rng, n=60, gap=1.0)
        model = train_gp_rbf(X, y, GpParams(0.5))
        assert model.mode_grad_norm < 1e-8

    def test_probabilities_in_unit_interval(self, rng):
        X, y = separable_blobs(rng, n=40, gap=2.0)
        model = train_gp_rbf(X, y, GpParams(1.5))
        probs = models.predict_proba(model, rng.normal(size=(30, 4)))
        assert np.all((probs >= 0) & (probs <= 1))


class TestPredictProba:
    def test_deterministic_repeat_calls(self, rng):
        X, y = separable_blobs(rng, n=50, gap=1.0)
        model = train_gbm(X, y, GbmParams(n_trees=10, max_depth=3, min_rows=2))
        p1 = models.predict_proba(model, X)
        p2 = models.predict_proba(model, X)
        np.testing.assert_array_equal(p1, p2)

    def test_dimension_mismatch(self, rng):
        X, y = separable_blobs(rng, n=30, gap=1.0)
        model = train_elastic_net(X, y, ElasticNetParams(0.1, 0.5))
        with pytest.raises(DataError):
            models.predict_proba(model, np.zeros((3, 7)))

    def test_zero_model_outputs_half(self):
        model = models.ElasticNetModel(0.0, np.zeros(3))
        assert np.all(models.predict_proba(model, np.ones((4, 3))) == 0.5)

    def test_missing_values_rejected_at_train(self):
        X = np.asarray([[1.0, np.nan], [2.0, 3.0]])
        with pytest.raises(DataError):
            models.train("EN", X, [0, 1], ElasticNetParams())


class TestPermutationEquivariance:
    def test_deterministic_models_row_permutation(self, rng):
        X, y = separable_blobs(rng, n=40, gap=1.0)
        perm = rng.permutation(40)
        grid = [
            ("EN", ElasticNetParams(0.1, 0.5), 1e-6),
            ("CART", CartParams(5), 0.0),
            ("GP", GpParams(0.5), 1e-8),
        ]
        probe = rng.normal(size=(10, 4))
        for algo, params, tol in grid:
            a = models.predict_proba(models.train(algo, X, y, params), probe)
            b = models.predict_proba(models.train(algo, X[perm], y[perm], params), probe)
            np.testing.assert_allclose(a, b, atol=max(tol, 1e-12))

    def test_svm_decision_function_stable(self, rng):
        X, y = separable_blobs(rng, n=40, gap=1.5)
        perm = rng.permutation(40)
        probe = rng.normal(size=(10, 4))
        a = train_svm_rbf(X, y, SvmParams(1.0, 0.5), np.random.default_rng(0))
        b = train_svm_rbf(X[perm], y[perm], SvmParams(1.0, 0.5),
                          np.random.default_rng(0))
        np.testing.assert_allclose(
            a.decision_scores(probe), b.decision_scores(probe), atol=5e-3
        )
