"""Tests for the four from-scratch classifiers."""

import math

import numpy as np
import pytest

from generank import classifiers
from generank.classifiers import (
    ConvergenceError,
    TrainSet,
    knn_classify,
    mlp_loss_and_grad,
    mlp_predict,
    mlp_train,
    nbc_predict,
    nbc_train,
    svm_kkt_violation,
    svm_predict,
    svm_train,
)


def _separable(rng, n_per_class=12, dim=3, margin=2.0):
    a = rng.normal(-margin, 0.6, (n_per_class, dim))
    b = rng.normal(margin, 0.6, (n_per_class, dim))
    features = np.vstack([a, b])
    labels = np.array([0] * n_per_class + [1] * n_per_class)
    return TrainSet(features, labels)


# ---------------------------------------------------------------------------
# training-set validation


def test_trainset_validation():
    with pytest.raises(ValueError):
        TrainSet(np.ones(4), np.array([0, 0, 1, 1]))
    with pytest.raises(ValueError):
        TrainSet(np.ones((4, 2)), np.array([0, 0, 1, 2]))
    with pytest.raises(ValueError):
        TrainSet(np.ones((4, 2)), np.array([0, 0, 0, 0]))
    with pytest.raises(ValueError):
        TrainSet(np.array([[np.inf, 1.0], [0.0, 1.0]]), np.array([0, 1]))
    with pytest.raises(ValueError):
        TrainSet(np.ones((4, 2)), np.array([0, 0, 1]))


def test_query_dimension_checked():
    train = TrainSet(np.ones((4, 3)), np.array([0, 0, 1, 1]))
    with pytest.raises(ValueError):
        knn_classify(train, np.ones(2), 1)


# ---------------------------------------------------------------------------
# k nearest neighbours


def test_knn_matches_brute_force_majority():
    # odd k on two classes: majority is unambiguous, so an independent
    # brute-force count must agree with the fast path
    rng = np.random.default_rng(500)
    for trial in range(100):
        n = int(rng.integers(6, 30))
        dim = int(rng.integers(1, 6))
        features = rng.normal(size=(n, dim))
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        train = TrainSet(features, labels)
        query = rng.normal(size=dim)
        k = int(rng.choice([1, 3, 5]))
        k = min(k, n if n % 2 == 1 else n - 1)
        mine = knn_classify(train, query, k)
        dist = np.linalg.norm(features - query, axis=1)
        top = np.argsort(dist, kind="stable")[:k]
        expected = int(labels[top].sum() * 2 > k)
        assert mine == expected


def test_knn_single_neighbour():
    train = TrainSet(np.array([[0.0], [10.0]]), np.array([0, 1]))
    assert knn_classify(train, [2.0], 1) == 0
    assert knn_classify(train, [8.0], 1) == 1


def test_knn_split_vote_uses_summed_distance():
    train = TrainSet(np.array([[0.0], [1.0]]), np.array([0, 1]))
    assert knn_classify(train, [0.4], 2) == 0
    assert knn_classify(train, [0.6], 2) == 1


def test_knn_full_tie_goes_to_class_zero():
    # equal votes and equal summed distances, labels in both arrangements
    train = TrainSet(np.array([[0.0], [2.0]]), np.array([0, 1]))
    assert knn_classify(train, [1.0], 2) == 0
    flipped = TrainSet(np.array([[0.0], [2.0]]), np.array([1, 0]))
    assert knn_classify(flipped, [1.0], 2) == 0


def test_knn_distance_tie_prefers_earlier_row():
    # two training points at the same distance fight for the k=1 slot;
    # the stable sort keeps the earlier row
    train = TrainSet(np.array([[1.0], [-1.0], [5.0]]), np.array([1, 0, 0]))
    assert knn_classify(train, [0.0], 1) == 1


def test_knn_k_bounds():
    train = TrainSet(np.ones((4, 2)), np.array([0, 0, 1, 1]))
    with pytest.raises(ValueError):
        knn_classify(train, np.ones(2), 0)
    with pytest.raises(ValueError):
        knn_classify(train, np.ones(2), 5)


# ---------------------------------------------------------------------------
# linear SVM


def test_svm_two_point_textbook_case():
    train = TrainSet(np.array([[-1.0], [1.0]]), np.array([0, 1]))
    model = svm_train(train, c=10.0)
    assert model.weights[0] == pytest.approx(1.0, abs=1e-9)
    assert model.bias == pytest.approx(0.0, abs=1e-9)
    np.testing.assert_allclose(model.dual_coefficients, [0.5, 0.5], atol=1e-9)
    assert svm_predict(model, [0.3]) == 1
    assert svm_predict(model, [-0.3]) == 0


def test_svm_dual_feasibility_and_kkt_on_random_separable_sets():
    rng = np.random.default_rng(501)
    for trial in range(10):
        train = _separable(rng, n_per_class=int(rng.integers(5, 15)))
        c = float(rng.choice([0.1, 1.0, 10.0]))
        model = svm_train(train, c)
        alpha = model.dual_coefficients
        y = np.where(train.labels == 1, 1.0, -1.0)
        assert (alpha >= -1e-12).all()
        assert (alpha <= c + 1e-12).all()
        assert abs(float(alpha @ y)) <= 1e-9
        assert svm_kkt_violation(model, train) < 1e-3
        correct = sum(
            svm_predict(model, x) == lab
            for x, lab in zip(train.features, train.labels)
        )
        assert correct == train.n_samples


def test_svm_support_indices_match_positive_alphas():
    rng = np.random.default_rng(502)
    train = _separable(rng)
    model = svm_train(train, 1.0)
    expected = np.flatnonzero(model.dual_coefficients > 1e-8)
    np.testing.assert_array_equal(model.support_indices, expected)


def test_svm_bounded_alphas_use_midpoint_bias():
    # c small enough that every support vector saturates: the bias must
    # come from the midpoint rule yet still separate the classes
    train = TrainSet(np.array([[-1.0], [1.0]]), np.array([0, 1]))
    model = svm_train(train, c=0.01)
    assert model.dual_coefficients[0] == pytest.approx(0.01, abs=1e-12)
    assert model.bias == pytest.approx(0.0, abs=1e-12)
    assert svm_predict(model, [0.5]) == 1
    assert svm_predict(model, [-0.5]) == 0


def test_svm_overlapping_classes_still_converge():
    rng = np.random.default_rng(503)
    features = rng.normal(0.0, 1.0, (30, 2))
    labels = (features[:, 0] + rng.normal(0.0, 1.5, 30) > 0).astype(int)
    if labels.min() == labels.max():
        labels[0] = 1 - labels[0]
    train = TrainSet(features, labels)
    model = svm_train(train, 1.0)
    assert svm_kkt_violation(model, train) < 1e-3


def test_svm_convergence_budget_raises(monkeypatch):
    monkeypatch.setattr(classifiers, "_SVM_MAX_ITER", 0)
    train = TrainSet(np.array([[-1.0], [1.0]]), np.array([0, 1]))
    with pytest.raises(ConvergenceError, match="violation gap"):
        svm_train(train, 1.0)


def test_svm_rejects_nonpositive_c():
    train = TrainSet(np.array([[-1.0], [1.0]]), np.array([0, 1]))
    with pytest.raises(ValueError):
        svm_train(train, 0.0)


# ---------------------------------------------------------------------------
# kernel-density naive Bayes


def test_nbc_posteriors_sum_to_one():
    rng = np.random.default_rng(504)
    for trial in range(50):
        train = _separable(rng, n_per_class=int(rng.integers(3, 10)), dim=4)
        model = nbc_train(train, float(rng.choice([0.5, 1.0, 2.0])))
        _, posteriors = nbc_predict(model, rng.normal(size=4))
        assert posteriors.shape == (2,)
        assert (posteriors >= 0.0).all()
        assert abs(posteriors.sum() - 1.0) <= 1e-12


def test_nbc_symmetric_case_is_exactly_half():
    train = TrainSet(np.array([[-1.0], [1.0]]), np.array([0, 1]))
    model = nbc_train(train)
    label, posteriors = nbc_predict(model, [0.0])
    assert posteriors[0] == 0.5
    assert posteriors[1] == 0.5
    assert label == 0  # exact tie resolves to class 0


def test_nbc_silverman_bandwidth_value():
    rng = np.random.default_rng(505)
    a = rng.normal(0.0, 2.0, (8, 1))
    b = rng.normal(5.0, 1.0, (6, 1))
    train = TrainSet(np.vstack([a, b]), np.array([0] * 8 + [1] * 6))
    model = nbc_train(train)
    sigma_a = a.std(ddof=1)
    assert model.bandwidths[0, 0] == pytest.approx(
        1.06 * sigma_a * 8 ** (-0.2), rel=1e-12
    )
    doubled = nbc_train(train, bandwidth_multiplier=2.0)
    np.testing.assert_allclose(doubled.bandwidths, 2.0 * model.bandwidths, rtol=1e-15)


def test_nbc_matches_direct_density_computation():
    rng = np.random.default_rng(506)
    for trial in range(20):
        train = _separable(rng, n_per_class=6, dim=3, margin=1.0)
        model = nbc_train(train)
        query = rng.normal(size=3)
        label, posteriors = nbc_predict(model, query)

        joint = np.empty(2)
        for cls in (0, 1):
            V = train.features[train.labels == cls]
            n_c = len(V)
            like = 1.0
            for j in range(3):
                h = model.bandwidths[cls, j]
                dens = np.exp(-0.5 * ((query[j] - V[:, j]) / h) ** 2)
                like *= dens.sum() / (n_c * h * math.sqrt(2.0 * math.pi))
            joint[cls] = like * n_c / train.n_samples
        expected = joint / joint.sum()
        np.testing.assert_allclose(posteriors, expected, rtol=1e-10)
        assert label == int(expected[1] > expected[0])


def test_nbc_priors_reflect_class_sizes():
    rng = np.random.default_rng(507)
    features = rng.normal(size=(10, 2))
    labels = np.array([0] * 7 + [1] * 3)
    model = nbc_train(TrainSet(features, labels))
    np.testing.assert_allclose(np.exp(model.log_priors), [0.7, 0.3], rtol=1e-12)


def test_nbc_constant_feature_stays_finite():
    features = np.column_stack([np.ones(8), np.arange(8.0)])
    labels = np.array([0] * 4 + [1] * 4)
    model = nbc_train(TrainSet(features, labels))
    label, posteriors = nbc_predict(model, [1.0, 3.2])
    assert np.isfinite(posteriors).all()
    assert label in (0, 1)


def test_nbc_rejects_nonpositive_multiplier():
    train = TrainSet(np.ones((4, 1)) * np.arange(4)[:, None], np.array([0, 0, 1, 1]))
    with pytest.raises(ValueError):
        nbc_train(train, 0.0)


# ---------------------------------------------------------------------------
# multilayer perceptron


def test_mlp_gradient_matches_finite_differences():
    rng = np.random.default_rng(508)
    d, h, n = 4, 3, 12
    features = rng.normal(size=(n, d))
    targets = rng.integers(0, 2, n).astype(np.float64)
    n_params = d * h + h + h + 1
    vec = rng.normal(0.0, 0.5, n_params)
    _, grad = mlp_loss_and_grad(vec, features, targets, h, ridge=0.01)

    eps = 1e-6
    worst = 0.0
    for i in range(n_params):
        probe = vec.copy()
        probe[i] += eps
        up, _ = mlp_loss_and_grad(probe, features, targets, h, ridge=0.01)
        probe[i] -= 2.0 * eps
        down, _ = mlp_loss_and_grad(probe, features, targets, h, ridge=0.01)
        numeric = (up - down) / (2.0 * eps)
        denom = max(abs(numeric), abs(grad[i]), 1e-8)
        worst = max(worst, abs(numeric - grad[i]) / denom)
    assert worst < 1e-6


def test_mlp_ridge_term_excludes_biases():
    rng = np.random.default_rng(509)
    d, h, n = 3, 2, 8
    features = rng.normal(size=(n, d))
    targets = rng.integers(0, 2, n).astype(np.float64)
    n_params = d * h + h + h + 1
    vec = rng.normal(size=n_params)
    loss_a, _ = mlp_loss_and_grad(vec, features, targets, h, ridge=0.0)
    loss_b, _ = mlp_loss_and_grad(vec, features, targets, h, ridge=0.4)
    w1 = vec[: d * h]
    w2 = vec[d * h + h : d * h + h + h]
    penalty = 0.5 * 0.4 * (float(w1 @ w1) + float(w2 @ w2))
    assert loss_b - loss_a == pytest.approx(penalty, rel=1e-12)


def test_mlp_trains_separable_data():
    rng = np.random.default_rng(510)
    train = _separable(rng, n_per_class=10, dim=2)
    model = mlp_train(train, hidden_count=3, ridge=0.001, seed=0)
    correct = 0
    for x, lab in zip(train.features, train.labels):
        label, prob = mlp_predict(model, x)
        assert 0.0 <= prob <= 1.0
        correct += label == lab
    assert correct == train.n_samples


def test_mlp_loss_trace_non_increasing():
    rng = np.random.default_rng(511)
    train = _separable(rng, n_per_class=8, dim=3)
    model = mlp_train(train, hidden_count=4, seed=1)
    trace = np.asarray(model.loss_trace)
    assert len(trace) >= 2
    assert len(trace) <= classifiers._MLP_MAX_ITER + 1
    assert (np.diff(trace) <= 1e-12).all()


def test_mlp_deterministic_per_seed():
    rng = np.random.default_rng(512)
    train = _separable(rng, n_per_class=6, dim=2)
    model_a = mlp_train(train, hidden_count=3, seed=7)
    model_b = mlp_train(train, hidden_count=3, seed=7)
    np.testing.assert_array_equal(model_a.w1, model_b.w1)
    np.testing.assert_array_equal(model_a.w2, model_b.w2)
    assert model_a.loss_trace == model_b.loss_trace
    model_c = mlp_train(train, hidden_count=3, seed=8)
    assert model_a.loss_trace != model_c.loss_trace


def test_mlp_rejects_bad_shape_arguments():
    train = TrainSet(np.array([[-1.0], [1.0]]), np.array([0, 1]))
    with pytest.raises(ValueError):
        mlp_train(train, hidden_count=0)
    with pytest.raises(ValueError):
        mlp_train(train, hidden_count=2, ridge=-0.1)
    model = mlp_train(train, hidden_count=2)
    with pytest.raises(ValueError):
        mlp_predict(model, np.ones(3))
