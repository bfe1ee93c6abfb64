import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from gsaudit import classifiers as clf
from gsaudit.classifiers import (
    FitConfig,
    LinearModel,
    fit_adaboost,
    fit_boosted_trees,
    fit_linear_svm,
    fit_logistic,
    grid_search,
    hinge_objective,
    logistic_loss_grad,
    model_from_dict,
    model_to_dict,
    predict_classes,
    predict_scores,
)
from gsaudit.eval import auc
from gsaudit.features import ClassWeights, balanced_weights

EVEN = ClassWeights(1.0, 1.0)


def separable_2d():
    X = sp.csr_matrix(np.array([[2.0, 0.1], [1.5, 0.3], [0.1, 2.0], [0.2, 1.4]]))
    y = np.array([1, 1, 0, 0], dtype=np.uint8)
    return X, y


def random_problem(rng, n=24, d=5, sparse_zeros=True):
    X = rng.normal(size=(n, d))
    if sparse_zeros:
        X[rng.random((n, d)) < 0.4] = 0.0
    w = rng.normal(size=d)
    y = (X @ w + 0.3 * rng.normal(size=n) > 0).astype(np.uint8)
    if y.min() == y.max():  # force both classes
        y[0] = 1 - y[0]
    return sp.csr_matrix(X), y


# -- logistic regression ------------------------------------------------------


def test_logistic_separable_perfect_training_accuracy():
    X, y = separable_2d()
    model = fit_logistic(X, y, EVEN, FitConfig(C=10.0))
    assert model.converged
    assert np.array_equal(predict_classes(model, X), y)


def test_logistic_converged_gradient_near_zero():
    X, y = separable_2d()
    model = fit_logistic(X, y, EVEN, FitConfig(C=1.0, tol=1e-8))
    assert model.converged
    _, grad_w, grad_b = logistic_loss_grad(X, y, EVEN, 1.0, model.weights, model.bias)
    assert max(np.max(np.abs(grad_w)), abs(grad_b)) <= 1e-5


def test_logistic_label_flip_negates_parameters():
    rng = np.random.default_rng(3)
    X, y = random_problem(rng)
    cfg = FitConfig(C=1.0, tol=1e-12, max_iterations=5000)
    a = fit_logistic(X, y, EVEN, cfg)
    b = fit_logistic(X, 1 - y, EVEN, cfg)
    assert np.max(np.abs(a.weights + b.weights)) <= 1e-6
    assert abs(a.bias + b.bias) <= 1e-6


def test_logistic_gradient_matches_finite_differences():
    rng = np.random.default_rng(11)
    for _ in range(5):
        X, y = random_problem(rng, n=12, d=4)
        weights = balanced_weights(y)
        w = rng.normal(size=4)
        b = float(rng.normal())
        value, grad_w, grad_b = logistic_loss_grad(X, y, weights, 2.0, w, b)
        h = 1e-6
        for j in range(4):
            e = np.zeros(4)
            e[j] = h
            up, _, _ = logistic_loss_grad(X, y, weights, 2.0, w + e, b)
            down, _, _ = logistic_loss_grad(X, y, weights, 2.0, w - e, b)
            fd = (up - down) / (2 * h)
            assert abs(fd - grad_w[j]) <= 1e-5 * max(1.0, abs(grad_w[j]))


def test_logistic_objective_beats_zero_vector():
    rng = np.random.default_rng(5)
    X, y = random_problem(rng)
    model = fit_logistic(X, y, EVEN, FitConfig())
    at_solution, _, _ = logistic_loss_grad(X, y, EVEN, 1.0, model.weights, model.bias)
    at_zero, _, _ = logistic_loss_grad(X, y, EVEN, 1.0, np.zeros(X.shape[1]), 0.0)
    assert at_solution <= at_zero


def test_logistic_deterministic_bit_identical():
    rng = np.random.default_rng(7)
    X, y = random_problem(rng)
    a = fit_logistic(X, y, EVEN, FitConfig())
    b = fit_logistic(X, y, EVEN, FitConfig())
    assert np.array_equal(a.weights, b.weights) and a.bias == b.bias


def test_logistic_rejects_nan_and_single_class():
    X = sp.csr_matrix(np.array([[1.0, np.nan], [0.5, 1.0]]))
    with pytest.raises(ValueError, match="NaN"):
        fit_logistic(X, np.array([1, 0]), EVEN, FitConfig())
    X2, _ = separable_2d()
    with pytest.raises(ValueError, match="both classes"):
        fit_logistic(X2, np.ones(4, dtype=int), EVEN, FitConfig())


# -- linear SVM ---------------------------------------------------------------


def test_svm_separable_zero_hinge_margin_one():
    X, y = separable_2d()
    model = fit_linear_svm(X, y, EVEN, FitConfig(C=100.0, tol=1e-8, max_iterations=20000))
    y_signed = np.where(y == 1, 1.0, -1.0)
    margins = y_signed * (X @ model.weights + model.bias)
    assert np.all(margins >= 1.0 - 1e-6)
    obj = hinge_objective(X, y, EVEN, 100.0, model.weights, model.bias)
    hinge_part = obj - (model.weights @ model.weights + model.bias**2) / 200.0
    assert hinge_part <= 1e-8


def test_svm_label_flip_negates_scores():
    rng = np.random.default_rng(13)
    X, y = random_problem(rng)
    cfg = FitConfig(C=1.0, tol=1e-10, max_iterations=20000, seed=5)
    a = fit_linear_svm(X, y, EVEN, cfg)
    b = fit_linear_svm(X, 1 - y, EVEN, cfg)
    assert np.max(np.abs(predict_scores(a, X) + predict_scores(b, X))) <= 1e-8


def test_svm_duplicated_rows_same_direction():
    X, y = separable_2d()
    cfg = FitConfig(C=50.0, tol=1e-10, max_iterations=50000)
    a = fit_linear_svm(X, y, EVEN, cfg)
    X2 = sp.vstack([X, X]).tocsr()
    y2 = np.concatenate([y, y])
    b = fit_linear_svm(X2, y2, EVEN, cfg)
    wa = np.concatenate([a.weights, [a.bias]])
    wb = np.concatenate([b.weights, [b.bias]])
    cosine = wa @ wb / (np.linalg.norm(wa) * np.linalg.norm(wb))
    assert cosine >= 0.999
    assert np.array_equal(predict_classes(a, X), predict_classes(b, X))


def test_svm_score_scale_invariance():
    X, y = separable_2d()
    model = fit_linear_svm(X, y, EVEN, FitConfig(C=10.0))
    scores = predict_scores(model, X)
    scaled = LinearModel(model.weights * 3.0, model.bias * 3.0, "hinge",
                         model.converged, model.iterations)
    assert np.array_equal(predict_classes(model, X), predict_classes(scaled, X))
    assert auc(scores, y) == auc(predict_scores(scaled, X), y)


def test_svm_deterministic_under_seed():
    rng = np.random.default_rng(17)
    X, y = random_problem(rng)
    a = fit_linear_svm(X, y, EVEN, FitConfig(seed=3))
    b = fit_linear_svm(X, y, EVEN, FitConfig(seed=3))
    assert np.array_equal(a.weights, b.weights)


def test_minority_weight_raises_minority_recall():
    # overlapping 1-D clusters, 20 majority negatives vs 6 minority positives
    rng = np.random.default_rng(23)
    neg = rng.normal(0.0, 1.0, size=20)
    pos = rng.normal(1.0, 1.0, size=6)
    X = sp.csr_matrix(np.concatenate([pos, neg]).reshape(-1, 1))
    y = np.array([1] * 6 + [0] * 20, dtype=np.uint8)
    for fitter in (fit_logistic, fit_linear_svm):
        recalls = []
        for w_pos in (1.0, 4.0, 16.0):
            model = fitter(X, y, ClassWeights(w_pos, 1.0), FitConfig(C=1.0))
            preds = predict_classes(model, X)
            recalls.append(((preds == 1) & (y == 1)).sum() / 6)
        assert recalls == sorted(recalls)
        assert recalls[-1] > recalls[0]


# -- AdaBoost -----------------------------------------------------------------


def brute_force_best_stump(X_dense, y_signed, dist):
    """Exhaustive threshold/polarity search, the oracle for the sparse search."""
    best = (None, None, None, np.inf)
    n, d = X_dense.shape
    for j in range(d):
        col = X_dense[:, j]
        candidates = np.unique(col)
        thresholds = np.concatenate([[candidates[0] - 1.0],
                                     (candidates[:-1] + candidates[1:]) / 2.0,
                                     [candidates[-1] + 1.0]])
        for theta in thresholds:
            for pol in (1, -1):
                pred = np.where(col > theta, pol, -pol)
                err = float(dist[pred != y_signed].sum())
                if err < best[3] - 1e-12:
                    best = (j, theta, pol, err)
    return best


def test_adaboost_single_round_equals_best_stump():
    rng = np.random.default_rng(29)
    X_dense = rng.normal(size=(18, 4))
    X_dense[rng.random((18, 4)) < 0.5] = 0.0
    y = (X_dense[:, 1] > 0.2).astype(np.uint8)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    ensemble = fit_adaboost(sp.csr_matrix(X_dense), y, EVEN, rounds=1)
    assert len(ensemble.stumps) == 1
    dist = np.full(18, 1.0 / 18)
    _, _, _, best_err = brute_force_best_stump(X_dense, np.where(y == 1, 1.0, -1.0), dist)
    assert ensemble.train_errors[0] == pytest.approx(best_err, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_stump_search_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n, d = 12, 3
    X_dense = np.round(rng.normal(size=(n, d)), 2)
    X_dense[rng.random((n, d)) < 0.5] = 0.0
    y = rng.integers(0, 2, size=n).astype(np.uint8)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    dist = rng.random(n) + 0.05
    dist /= dist.sum()

    index = clf._StumpIndex(sp.csr_matrix(X_dense))
    y_signed = np.where(y == 1, 1.0, -1.0)
    stump, err = index.best_stump(dist, y_signed)
    _, _, _, best_err = brute_force_best_stump(X_dense, y_signed, dist)
    assert err == pytest.approx(best_err, abs=1e-10)
    # the returned stump's own error matches its reported error
    pred = np.where(X_dense[:, stump.feature] > stump.threshold,
                    stump.polarity, -stump.polarity)
    assert float(dist[pred != y_signed].sum()) == pytest.approx(err, abs=1e-10)
    # and the index applies it consistently
    assert np.array_equal(index.apply(stump), pred)


def test_adaboost_threshold_split_perfect():
    X = sp.csr_matrix(np.array([[0.1], [0.2], [0.3], [1.1], [1.2], [1.4]]))
    y = np.array([0, 0, 0, 1, 1, 1], dtype=np.uint8)
    ensemble = fit_adaboost(X, y, EVEN, rounds=5)
    assert np.array_equal(predict_classes(ensemble, X), y)
    assert len(ensemble.stumps) == 1  # perfect stump stops the loop


def test_adaboost_accepted_errors_below_half(small_corpus):
    from gsaudit.features import build_normalized_features

    fm = build_normalized_features(small_corpus, None)
    weights = balanced_weights(fm.labels)
    ensemble = fit_adaboost(fm.X, fm.labels, weights, rounds=12)
    assert all(err < 0.5 for err in ensemble.train_errors)
    # recompute the distribution trajectory and check each reported error
    dist = weights.per_sample(fm.labels).astype(float)
    dist /= dist.sum()
    y_signed = np.where(fm.labels == 1, 1.0, -1.0)
    dense = fm.X.toarray()
    for stump, reported in zip(ensemble.stumps, ensemble.train_errors):
        pred = np.where(dense[:, stump.feature] > stump.threshold,
                        stump.polarity, -stump.polarity)
        err = float(dist[pred != y_signed].sum())
        assert err == pytest.approx(reported, abs=1e-9)
        dist = dist * np.exp(-stump.alpha * y_signed * pred)
        dist /= dist.sum()


def test_adaboost_constant_features_total():
    X = sp.csr_matrix(np.ones((6, 2)))
    y = np.array([1, 0, 1, 0, 1, 0], dtype=np.uint8)
    ensemble = fit_adaboost(X, y, EVEN, rounds=3)
    assert len(ensemble.stumps) >= 1  # degenerate data still yields a stump


# -- gradient-boosted trees ---------------------------------------------------


def test_gbt_zero_rounds_predicts_weighted_prior():
    X = sp.csr_matrix(np.eye(5))
    y = np.array([1, 1, 1, 0, 0], dtype=np.uint8)
    model = fit_boosted_trees(X, y, EVEN, FitConfig(rounds=0))
    assert np.allclose(predict_scores(model, X), 0.6)
    weighted = fit_boosted_trees(X, y, ClassWeights(1.0, 1.5), FitConfig(rounds=0))
    assert np.allclose(predict_scores(weighted, X), 3.0 / (3.0 + 1.5 * 2.0))


def test_gbt_training_loss_non_increasing():
    rng = np.random.default_rng(31)
    X, y = random_problem(rng, n=40, d=6)
    model = fit_boosted_trees(X, y, balanced_weights(y), FitConfig(rounds=20, depth=3))
    losses = model.train_loss
    assert len(losses) == 21
    assert all(b <= a + 1e-9 for a, b in zip(losses, losses[1:]))


def test_gbt_step_function_learned_quickly():
    X = sp.csr_matrix(np.linspace(0, 1, 30).reshape(-1, 1))
    y = (np.linspace(0, 1, 30) > 0.55).astype(np.uint8)
    model = fit_boosted_trees(X, y, EVEN, FitConfig(rounds=5, depth=2))
    assert np.array_equal(predict_classes(model, X), y)


def test_gbt_deterministic():
    rng = np.random.default_rng(37)
    X, y = random_problem(rng, n=30, d=5)
    a = fit_boosted_trees(X, y, EVEN, FitConfig(rounds=8))
    b = fit_boosted_trees(X, y, EVEN, FitConfig(rounds=8))
    assert np.array_equal(predict_scores(a, X), predict_scores(b, X))


# -- prediction and dispatch --------------------------------------------------


def test_zero_logistic_model_scores_half():
    model = LinearModel(np.zeros(3), 0.0, "logistic", True, 0)
    X = sp.csr_matrix(np.arange(12.0).reshape(4, 3))
    assert np.allclose(predict_scores(model, X), 0.5)


def test_logistic_score_matches_sigmoid_dot_product():
    rng = np.random.default_rng(41)
    X, y = random_problem(rng)
    model = fit_logistic(X, y, EVEN, FitConfig())
    scores = predict_scores(model, X)
    manual = 1.0 / (1.0 + np.exp(-(X.toarray() @ model.weights + model.bias)))
    assert np.allclose(scores, manual, atol=1e-12)


def test_positive_weight_monotonicity():
    model = LinearModel(np.array([0.8, -0.2]), 0.1, "logistic", True, 0)
    low = predict_scores(model, sp.csr_matrix(np.array([[1.0, 0.5]])))
    high = predict_scores(model, sp.csr_matrix(np.array([[2.0, 0.5]])))
    assert high > low


def test_dimension_mismatch_rejected():
    model = LinearModel(np.zeros(3), 0.0, "logistic", True, 0)
    with pytest.raises(ValueError, match="does not match"):
        predict_scores(model, sp.csr_matrix(np.ones((2, 5))))


def test_fit_dispatcher_and_unknown_kind():
    X, y = separable_2d()
    for kind in ("lr", "svm", "adaboost", "gbt"):
        model = clf.fit(kind, X, y, EVEN, clf.default_config(kind))
        assert predict_scores(model, X).shape == (4,)
    with pytest.raises(ValueError, match="unknown classifier"):
        clf.fit("mystery", X, y, EVEN, FitConfig())


# -- grid search ---------------------------------------------------------------


def grid_problem(n=60, seed=43):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 4))
    y = (X[:, 0] + 0.5 * rng.normal(size=n) > 0).astype(np.uint8)
    return sp.csr_matrix(X), y


def test_grid_search_single_config():
    X, y = grid_problem()
    only = FitConfig(C=0.5)
    result = grid_search(X, y, "lr", [only], seed=1)
    assert result.best == only


def test_grid_search_prefers_better_config():
    X, y = grid_problem()
    weak = FitConfig(C=1e-8)  # so under-regularized it stays near the prior
    strong = FitConfig(C=1.0)
    result = grid_search(X, y, "lr", [weak, strong], seed=1)
    assert result.best == strong
    assert result.mean_scores[1] > result.mean_scores[0]


def test_grid_search_tie_breaks_toward_smaller_c():
    X, y = separable_2d()
    X = sp.vstack([X] * 6).tocsr()
    y = np.tile(y, 6)
    a, b = FitConfig(C=10.0), FitConfig(C=1.0)
    result = grid_search(X, y, "lr", [a, b], inner_k=2, seed=1)
    assert result.mean_scores[0] == result.mean_scores[1] == 1.0
    assert result.best == b


def test_grid_search_determinism():
    X, y = grid_problem()
    grid = [FitConfig(C=c) for c in (0.1, 1.0)]
    a = grid_search(X, y, "lr", grid, seed=9)
    b = grid_search(X, y, "lr", grid, seed=9)
    assert a == b


def test_grid_search_records_failures(monkeypatch):
    X, y = grid_problem()
    bad, good = FitConfig(C=123.0), FitConfig(C=1.0)
    real_fit = clf.fit

    def flaky_fit(kind, matrix, labels, weights, config):
        if config.C == 123.0:
            raise ValueError("planted failure")
        return real_fit(kind, matrix, labels, weights, config)

    monkeypatch.setattr(clf, "fit", flaky_fit)
    result = grid_search(X, y, "lr", [bad, good], seed=2)
    assert result.best == good
    assert np.isnan(result.mean_scores[0])
    assert any("planted failure" in f for f in result.failures)

    def always_fail(kind, matrix, labels, weights, config):
        raise ValueError("nope")

    monkeypatch.setattr(clf, "fit", always_fail)
    with pytest.raises(ValueError, match="every grid config failed"):
        grid_search(X, y, "lr", [bad], seed=2)


def test_grid_search_validation():
    X, y = grid_problem()
    with pytest.raises(ValueError, match="non-empty"):
        grid_search(X, y, "lr", [], seed=0)
    with pytest.raises(ValueError, match="objective"):
        grid_search(X, y, "lr", [FitConfig()], objective="accuracy")


# -- serialization --------------------------------------------------------------


def test_model_serialization_round_trip(tmp_path):
    X, y = separable_2d()
    for kind in ("lr", "svm", "adaboost", "gbt"):
        model = clf.fit(kind, X, y, EVEN, clf.default_config(kind))
        doc = model_to_dict(model, clf.default_config(kind))
        assert doc["format"] == "gs-audit/model-v1"
        again = model_from_dict(doc)
        assert np.allclose(predict_scores(model, X), predict_scores(again, X))
        path = tmp_path / f"{kind}.json"
        clf.save_model(model, path, clf.default_config(kind))
        assert np.allclose(predict_scores(clf.load_model(path), X),
                           predict_scores(model, X))


def test_fit_config_validation():
    with pytest.raises(ValueError):
        FitConfig(C=-1.0)
    with pytest.raises(ValueError):
        FitConfig(max_iterations=0)
    with pytest.raises(ValueError):
        FitConfig(tol=0.0)


def test_native_lr_matches_scipy_at_full_scale(ml1m_corpus):
    # independent solver route: same objective handed to scipy's L-BFGS-B
    # must land on the same optimum as the in-repo driver
    import scipy.optimize

    from gsaudit.features import build_normalized_features, make_holdout_split
    from gsaudit.stereotype import default_model

    fm = build_normalized_features(ml1m_corpus, default_model())
    y = fm.labels
    train_idx, test_idx = make_holdout_split(y, 0.2, 3).holdout_indices()
    weights = balanced_weights(y[train_idx])
    X, yy = fm.X[train_idx], y[train_idx]
    mine = fit_logistic(X, yy, weights, FitConfig())
    assert mine.converged

    y_signed = np.where(yy == 1, 1.0, -1.0)
    c = weights.per_sample(yy)
    d = X.shape[1]

    def objective(theta):
        w, b = theta[:d], theta[d]
        z = y_signed * (X @ w + b)
        value = float(np.dot(c, np.logaddexp(0.0, -z))) + 0.5 * float(w @ w)
        r = -c * y_signed / (1.0 + np.exp(z))
        grad = np.empty(d + 1)
        grad[:d] = X.T @ r + w
        grad[d] = r.sum()
        return value, grad

    reference = scipy.optimize.minimize(
        objective, np.zeros(d + 1), jac=True, method="L-BFGS-B",
        options={"maxiter": 3000, "gtol": 1e-9, "ftol": 1e-15},
    )
    ours = objective(np.concatenate([mine.weights, [mine.bias]]))[0]
    assert ours <= reference.fun + 1e-6
    ref_model = LinearModel(reference.x[:d], float(reference.x[d]), "logistic", True, 0)
    from gsaudit.eval import auc as auc_fn

    ours_auc = auc_fn(predict_scores(mine, fm.X[test_idx]), y[test_idx])
    ref_auc = auc_fn(predict_scores(ref_model, fm.X[test_idx]), y[test_idx])
    assert abs(ours_auc - ref_auc) <= 1e-4
