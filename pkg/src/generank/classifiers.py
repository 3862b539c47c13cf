"""Four small two-class learners used by the benchmark harness.

All operate on a samples-by-features matrix with 0/1 labels: a
k-nearest-neighbour voter, a linear soft-margin SVM solved by pairwise
coordinate optimization on the dual, a naive Bayes classifier with
Gaussian kernel density estimates per feature, and a single-hidden-layer
perceptron trained by scaled conjugate gradients. Nothing here depends
on the ranking code; the cross-validation harness wires them together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit, logsumexp

from generank.dataio import VARIANCE_FLOOR


class ConvergenceError(RuntimeError):
    """Raised when an iterative solver exhausts its iteration budget."""


@dataclass
class TrainSet:
    """Validated training data: ``features`` is (n_samples, n_features)."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be 2-D")
        n = self.features.shape[0]
        if self.labels.shape != (n,):
            raise ValueError("labels must align with feature rows")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain non-finite values")
        if not np.isin(self.labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        for cls in (0, 1):
            if not (self.labels == cls).any():
                raise ValueError(f"class {cls} has no training samples")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


def _validate_query(train: TrainSet, query) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (train.n_features,):
        raise ValueError(
            f"query must have {train.n_features} features, got shape {q.shape}"
        )
    if not np.isfinite(q).all():
        raise ValueError("query contains non-finite values")
    return q


# --------------------------------------------------------------------------
# k nearest neighbours


def knn_classify(train: TrainSet, query, k: int) -> int:
    """Majority vote of the k nearest training points (Euclidean).

    Distance ties resolve toward the smaller sample index; a split vote
    goes to the class with the smaller summed neighbour distance, and
    class 0 if even that ties.
    """
    if not 1 <= k <= train.n_samples:
        raise ValueError(f"k must be in [1, {train.n_samples}]")
    q = _validate_query(train, query)
    dist = np.sqrt(((train.features - q) ** 2).sum(axis=1))
    nearest = np.argsort(dist, kind="stable")[:k]
    votes = np.bincount(train.labels[nearest], minlength=2)
    if votes[1] != votes[0]:
        return int(votes[1] > votes[0])
    sums = np.zeros(2)
    for i in nearest:
        sums[train.labels[i]] += dist[i]
    return int(sums[1] < sums[0])


# --------------------------------------------------------------------------
# linear support vector machine


@dataclass
class SvmModel:
    weights: np.ndarray
    bias: float
    dual_coefficients: np.ndarray
    support_indices: np.ndarray
    c: float
    kkt_gap: float


_SVM_MAX_ITER = 100_000
_SVM_STOP_TOL = 1e-3
_SVM_SV_TOL = 1e-8


def svm_train(train: TrainSet, c: float) -> SvmModel:
    """Soft-margin linear SVM fitted on the dual.

    Repeatedly optimizes the maximally violating pair of dual variables
    until the violation gap drops below 1e-3; class 0 maps to y = -1.
    Raises :class:`ConvergenceError` if the budget of 100000 updates is
    exhausted first.
    """
    if c <= 0.0:
        raise ValueError("c must be positive")
    X = train.features
    y = np.where(train.labels == 1, 1.0, -1.0)
    n = train.n_samples
    K = X @ X.T
    Q = (y[:, None] * y[None, :]) * K
    alpha = np.zeros(n)
    grad = -np.ones(n)

    gap = math.inf
    for _ in range(_SVM_MAX_ITER):
        f = -y * grad
        up = ((y > 0.0) & (alpha < c)) | ((y < 0.0) & (alpha > 0.0))
        low = ((y < 0.0) & (alpha < c)) | ((y > 0.0) & (alpha > 0.0))
        f_up = np.where(up, f, -np.inf)
        f_low = np.where(low, f, np.inf)
        i = int(np.argmax(f_up))
        j = int(np.argmin(f_low))
        gap = f_up[i] - f_low[j]
        if gap < _SVM_STOP_TOL:
            break

        old_i, old_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
            if quad <= 0.0:
                quad = 1e-12
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0.0 and alpha[j] < 0.0:
                alpha[j] = 0.0
                alpha[i] = diff
            elif diff <= 0.0 and alpha[i] < 0.0:
                alpha[i] = 0.0
                alpha[j] = -diff
            if diff > 0.0:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = c - diff
            else:
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = c + diff
        else:
            quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            if quad <= 0.0:
                quad = 1e-12
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            alpha[i] -= delta
            alpha[j] += delta
            if total > c:
                if alpha[i] > c:
                    alpha[i] = c
                    alpha[j] = total - c
            else:
                if alpha[j] < 0.0:
                    alpha[j] = 0.0
                    alpha[i] = total
            if total > c:
                if alpha[j] > c:
                    alpha[j] = c
                    alpha[i] = total - c
            else:
                if alpha[i] < 0.0:
                    alpha[i] = 0.0
                    alpha[j] = total
        grad += Q[:, i] * (alpha[i] - old_i) + Q[:, j] * (alpha[j] - old_j)
    else:
        f = -y * grad
        up = ((y > 0.0) & (alpha < c)) | ((y < 0.0) & (alpha > 0.0))
        low = ((y < 0.0) & (alpha < c)) | ((y > 0.0) & (alpha > 0.0))
        gap = float(np.where(up, f, -np.inf).max() - np.where(low, f, np.inf).min())
        raise ConvergenceError(
            f"dual optimization stalled: violation gap {gap:.3e} after "
            f"{_SVM_MAX_ITER} updates"
        )

    weights = X.T @ (alpha * y)
    decisions = X @ weights
    on_margin = (alpha > _SVM_SV_TOL) & (alpha < c - _SVM_SV_TOL)
    if on_margin.any():
        bias = float((y[on_margin] - decisions[on_margin]).mean())
    else:
        # No free support vector: center the boundary between the
        # innermost decision values of the two classes.
        bias = -0.5 * float(decisions[y < 0].max() + decisions[y > 0].min())

    support = np.flatnonzero(alpha > _SVM_SV_TOL)
    return SvmModel(weights, bias, alpha, support, float(c), float(gap))


def svm_predict(model: SvmModel, query) -> int:
    q = np.asarray(query, dtype=np.float64)
    if q.shape != model.weights.shape:
        raise ValueError("query dimension does not match the model")
    return int(float(q @ model.weights + model.bias) > 0.0)


def svm_kkt_violation(model: SvmModel, train: TrainSet) -> float:
    """Recompute the violating-pair gap m(alpha) - M(alpha) from a model."""
    y = np.where(train.labels == 1, 1.0, -1.0)
    alpha = model.dual_coefficients
    c = model.c
    grad = y * (train.features @ model.weights) - 1.0
    f = -y * grad
    up = ((y > 0.0) & (alpha < c)) | ((y < 0.0) & (alpha > 0.0))
    low = ((y < 0.0) & (alpha < c)) | ((y > 0.0) & (alpha > 0.0))
    return float(np.where(up, f, -np.inf).max() - np.where(low, f, np.inf).min())


# --------------------------------------------------------------------------
# kernel-density naive Bayes


@dataclass
class NbcModel:
    class_values: tuple
    bandwidths: np.ndarray
    log_priors: np.ndarray


def nbc_train(train: TrainSet, bandwidth_multiplier: float = 1.0) -> NbcModel:
    """Per class and feature, a Gaussian KDE with Silverman bandwidths.

    The bandwidth is ``multiplier * 1.06 * sigma * n^(-1/5)`` with the
    feature's standard deviation floored, so constant features stay
    usable.
    """
    if bandwidth_multiplier <= 0.0:
        raise ValueError("bandwidth_multiplier must be positive")
    values = []
    bandwidths = np.empty((2, train.n_features))
    priors = np.empty(2)
    for cls in (0, 1):
        V = train.features[train.labels == cls]
        n_c = V.shape[0]
        var = V.var(axis=0, ddof=1) if n_c > 1 else np.zeros(train.n_features)
        sigma = np.sqrt(np.maximum(var, VARIANCE_FLOOR))
        bandwidths[cls] = bandwidth_multiplier * 1.06 * sigma * n_c ** (-0.2)
        priors[cls] = n_c / train.n_samples
        values.append(V)
    return NbcModel(tuple(values), bandwidths, np.log(priors))


def nbc_predict(model: NbcModel, query):
    """Returns ``(label, posteriors)``; a posterior tie goes to class 0."""
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (model.bandwidths.shape[1],):
        raise ValueError("query dimension does not match the model")
    log_joint = np.empty(2)
    for cls in (0, 1):
        V = model.class_values[cls]
        h = model.bandwidths[cls]
        z = (q[None, :] - V) / h[None, :]
        log_kde = logsumexp(-0.5 * z * z, axis=0)
        log_kde -= math.log(V.shape[0]) + np.log(h * math.sqrt(2.0 * math.pi))
        log_joint[cls] = model.log_priors[cls] + float(log_kde.sum())
    posteriors = np.exp(log_joint - logsumexp(log_joint))
    # guard the unit-sum invariant against rounding when the shifted
    # log joints are huge in magnitude
    posteriors /= posteriors.sum()
    label = int(posteriors[1] > posteriors[0])
    return label, posteriors


# --------------------------------------------------------------------------
# single-hidden-layer perceptron, scaled conjugate gradient


@dataclass
class MlpModel:
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float
    ridge: float
    loss_trace: list = field(default_factory=list)


_MLP_GRAD_TOL = 1e-5
_MLP_MAX_ITER = 500
_SCG_SIGMA0 = 1e-4


def _unpack(wvec: np.ndarray, d: int, h: int):
    w1 = wvec[: d * h].reshape(d, h)
    b1 = wvec[d * h : d * h + h]
    w2 = wvec[d * h + h : d * h + 2 * h]
    b2 = wvec[-1]
    return w1, b1, w2, b2


def mlp_loss_and_grad(wvec, features, targets, hidden_count, ridge):
    """Penalized cross-entropy and its exact gradient.

    Logistic activations on both layers; the ridge penalty covers the
    weight matrices but not the biases. The log arguments are clipped,
    which leaves the gradient untouched anywhere the outputs are not
    saturated past 1e-12.
    """
    X = np.asarray(features, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    w = np.asarray(wvec, dtype=np.float64)
    d = X.shape[1]
    h = int(hidden_count)
    w1, b1, w2, b2 = _unpack(w, d, h)

    hidden = expit(X @ w1 + b1)
    out = expit(hidden @ w2 + b2)
    safe = np.clip(out, 1e-12, 1.0 - 1e-12)
    loss = -float((t * np.log(safe) + (1.0 - t) * np.log(1.0 - safe)).sum())
    loss += 0.5 * ridge * (float((w1 * w1).sum()) + float((w2 * w2).sum()))

    delta_out = out - t
    g_w2 = hidden.T @ delta_out + ridge * w2
    g_b2 = float(delta_out.sum())
    delta_hidden = (delta_out[:, None] * w2[None, :]) * hidden * (1.0 - hidden)
    g_w1 = X.T @ delta_hidden + ridge * w1
    g_b1 = delta_hidden.sum(axis=0)

    grad = np.concatenate([g_w1.ravel(), g_b1, g_w2, [g_b2]])
    return loss, grad


def mlp_train(
    train: TrainSet,
    hidden_count: int,
    ridge: float = 0.01,
    seed: int = 0,
    max_iter: int = _MLP_MAX_ITER,
    grad_tol: float = _MLP_GRAD_TOL,
) -> MlpModel:
    """Fit by scaled conjugate gradients.

    Deterministic given the seed; stops when the gradient norm falls
    below ``grad_tol`` or after ``max_iter`` iterations. Only accepted
    steps extend the loss trace, so it is non-increasing.
    """
    if hidden_count < 1:
        raise ValueError("hidden_count must be >= 1")
    if ridge < 0.0:
        raise ValueError("ridge must be >= 0")
    rng = np.random.default_rng(seed)
    d = train.n_features
    h = int(hidden_count)
    w1 = rng.uniform(-0.5, 0.5, (d, h)) / math.sqrt(d)
    b1 = np.zeros(h)
    w2 = rng.uniform(-0.5, 0.5, h) / math.sqrt(h)
    w = np.concatenate([w1.ravel(), b1, w2, [0.0]])
    X = train.features
    t = train.labels.astype(np.float64)

    def f_and_g(vec):
        return mlp_loss_and_grad(vec, X, t, h, ridge)

    n_params = len(w)
    loss, grad = f_and_g(w)
    trace = [loss]
    r = -grad
    p = r.copy()
    success = True
    lam = 1e-6
    lam_bar = 0.0
    delta = 0.0
    for k in range(1, max_iter + 1):
        if np.linalg.norm(r) < grad_tol:
            break
        p_sq = float(p @ p)
        if p_sq == 0.0:
            break
        if success:
            sigma = _SCG_SIGMA0 / math.sqrt(p_sq)
            _, grad_probe = f_and_g(w + sigma * p)
            s = (grad_probe - grad) / sigma
            delta = float(p @ s)
        # Levenberg-style shift keeps the curvature estimate positive.
        delta += (lam - lam_bar) * p_sq
        if delta <= 0.0:
            lam_bar = 2.0 * (lam - delta / p_sq)
            delta = -delta + lam * p_sq
            lam = lam_bar
        mu = float(p @ r)
        if mu == 0.0:
            # Search direction orthogonal to the gradient: restart along
            # steepest descent rather than divide by zero below.
            p = r.copy()
            success = True
            continue
        alpha = mu / delta
        loss_new, grad_new = f_and_g(w + alpha * p)
        comparison = 2.0 * delta * (loss - loss_new) / (mu * mu)
        if comparison >= 0.0:
            w = w + alpha * p
            loss = loss_new
            grad = grad_new
            r_new = -grad
            lam_bar = 0.0
            success = True
            trace.append(loss)
            if k % n_params == 0:
                p = r_new.copy()
            else:
                beta = float((r_new @ r_new - r_new @ r) / mu)
                p = r_new + beta * p
            r = r_new
            if comparison >= 0.75:
                lam *= 0.25
        else:
            lam_bar = lam
            success = False
        if comparison < 0.25:
            lam += delta * (1.0 - comparison) / p_sq

    w1, b1, w2, b2 = _unpack(w, d, h)
    return MlpModel(w1.copy(), b1.copy(), w2.copy(), float(b2), ridge, trace)


def mlp_predict(model: MlpModel, query):
    """Returns ``(label, probability_of_class_1)``."""
    q = np.asarray(query, dtype=np.float64)
    if q.shape != (model.w1.shape[0],):
        raise ValueError("query dimension does not match the model")
    hidden = expit(q @ model.w1 + model.b1)
    prob = float(expit(hidden @ model.w2 + model.b2))
    return int(prob > 0.5), prob
