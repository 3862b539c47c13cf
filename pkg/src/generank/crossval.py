"""Nested leave-one-out evaluation of ranking/classifier pairs.

The outer loop is leave-one-out: genes are ranked on the training fold
(or once on the full data, if asked), the top-k genes become features,
and an inner stratified cross-validation picks the classifier's
hyperparameter before the held-out sample is predicted. Sweeping k
yields accuracy-versus-gene-count curves; a one-way ANOVA compares the
resulting accuracy groups across ranking methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import betainc

from generank import fgf as fgf_mod
from generank import gaopt
from generank.classifiers import (
    TrainSet,
    knn_classify,
    mlp_predict,
    mlp_train,
    nbc_predict,
    nbc_train,
    svm_predict,
    svm_train,
)
from generank.dataio import VARIANCE_FLOOR, Dataset
from generank.rankers import rank_genes

METHODS = ("ttest", "wilcoxon", "roc", "fgf")
CLASSIFIERS = ("knn", "svm", "nbc", "mlp")

KNN_GRID = (1, 3, 5, 7, 9)
SVM_GRID = (0.01, 0.1, 1.0, 10.0, 100.0)
NBC_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)

MAX_INNER_FOLDS = 10
DEFAULT_K_MAX = 50


@dataclass
class SweepResult:
    """Accuracy by gene count for one method/classifier pair."""

    method: str
    classifier: str
    accuracy_by_k: dict
    best_k: int
    best_accuracy: float


@dataclass(frozen=True)
class AnovaResult:
    f_statistic: float
    p_value: float
    df_between: int
    df_within: int


def _derived_seed(*parts) -> int:
    """Independent child stream for one (seed, fold, ...) coordinate."""
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def stratified_folds(labels, n_folds: int, seed: int) -> np.ndarray:
    """Fold assignment, shuffling each class then dealing round-robin.

    The deal position carries over from one class to the next, so both
    the per-class and the overall fold sizes differ by at most one. With
    ``n_folds`` at most the smaller class count, every fold holds at
    least one sample of each class.
    """
    labels = np.asarray(labels)
    if n_folds < 2:
        raise ValueError("n_folds must be >= 2")
    rng = np.random.default_rng(seed)
    assignment = np.empty(len(labels), dtype=np.int64)
    offset = 0
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        rng.shuffle(members)
        assignment[members] = (offset + np.arange(len(members))) % n_folds
        offset = (offset + len(members)) % n_folds
    return assignment


def _scale_fit(features: np.ndarray):
    """Per-feature mean and floored standard deviation of a train block."""
    mu = features.mean(axis=0)
    var = features.var(axis=0, ddof=1)
    var = np.where(var > 0.0, var, var + VARIANCE_FLOOR)
    return mu, np.sqrt(var)


def _hyper_grid(classifier: str, n_features: int):
    """Candidate values in tie-break preference order (simplest first)."""
    if classifier == "knn":
        return list(KNN_GRID)
    if classifier == "svm":
        return list(SVM_GRID)
    if classifier == "nbc":
        return sorted(NBC_GRID, key=lambda m: (abs(m - 1.0), m))
    if classifier == "mlp":
        d = n_features
        return sorted({1, math.ceil(d / 2), d, 2 * d})
    raise ValueError(
        f"unknown classifier {classifier!r}, expected one of {', '.join(CLASSIFIERS)}"
    )


def _fit_and_predict(classifier, hyper, train_x, train_y, queries, seed):
    """Train one classifier on standardized features and label queries.

    Feature scaling always comes from the training block, so held-out
    samples never influence it.
    """
    mu, sd = _scale_fit(train_x)
    train = TrainSet((train_x - mu) / sd, train_y)
    scaled = (np.asarray(queries, dtype=np.float64) - mu) / sd
    if classifier == "knn":
        k = min(int(hyper), train.n_samples)
        return np.array([knn_classify(train, q, k) for q in scaled])
    if classifier == "svm":
        model = svm_train(train, hyper)
        return np.array([svm_predict(model, q) for q in scaled])
    if classifier == "nbc":
        model = nbc_train(train, hyper)
        return np.array([nbc_predict(model, q)[0] for q in scaled])
    if classifier == "mlp":
        model = mlp_train(train, hyper, seed=seed)
        return np.array([mlp_predict(model, q)[0] for q in scaled])
    raise ValueError(
        f"unknown classifier {classifier!r}, expected one of {', '.join(CLASSIFIERS)}"
    )


def inner_search(features, labels, classifier: str, seed: int = 0):
    """Pick a hyperparameter by stratified cross-validation.

    Uses up to ten folds, degraded to the smaller class count; pooled
    accuracy decides, ties going to the simpler candidate (smaller k or
    C, bandwidth multiplier nearest 1, fewer hidden nodes). Returns
    ``(best_value, best_accuracy)``.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    grid = _hyper_grid(classifier, features.shape[1])
    min_count = int(np.bincount(labels, minlength=2).min())
    n_folds = min(MAX_INNER_FOLDS, min_count)
    if n_folds < 2:
        # Too little data to cross-validate; fall back to the simplest
        # candidate.
        return grid[0], float("nan")

    folds = stratified_folds(labels, n_folds, seed)
    best_value = None
    best_correct = -1
    for position, value in enumerate(grid):
        correct = 0
        for fold in range(n_folds):
            test_mask = folds == fold
            train_mask = ~test_mask
            predicted = _fit_and_predict(
                classifier,
                value,
                features[train_mask],
                labels[train_mask],
                features[test_mask],
                _derived_seed(seed, fold, position),
            )
            correct += int((predicted == labels[test_mask]).sum())
        if correct > best_correct:
            best_correct = correct
            best_value = value
    return best_value, best_correct / len(labels)


def _rank_on(dataset: Dataset, method: str, fgf_params):
    if method == "fgf":
        return fgf_mod.fgf_rank(dataset, fgf_params)
    return rank_genes(dataset, method)


def _train_fold_dataset(dataset: Dataset, keep: np.ndarray) -> Dataset:
    return Dataset(
        dataset.matrix[:, keep],
        dataset.gene_ids,
        dataset.labels[keep],
        dataset.class_names,
    )


def _resolve_fgf_params(dataset, method, fgf_params, reoptimize, ga_config):
    if method != "fgf" or reoptimize:
        return fgf_params
    if fgf_params is None:
        config = ga_config if ga_config is not None else gaopt.GaConfig()
        fgf_params, _ = gaopt.optimize_fgf(dataset, config)
    return fgf_params


def loocv_accuracy(
    dataset: Dataset,
    method: str,
    classifier: str,
    k_genes: int,
    fgf_params=None,
    rank_scope: str = "train",
    seed: int = 0,
    reoptimize_fgf: bool = False,
    ga_config=None,
    _ranking_cache: dict = None,
) -> float:
    """Leave-one-out accuracy for one ranking/classifier/gene-count pick.

    ``rank_scope="train"`` re-ranks genes inside every fold (each class
    then needs at least three samples so folds stay valid);
    ``rank_scope="full"`` ranks once on all samples. Fuzzy-filter
    parameters default to one optimization on the full data; with
    ``reoptimize_fgf`` the genetic search reruns per fold on a
    fold-derived seed. The top-k genes enter the classifier as a set, in
    gene-index order. The result is ``correct / n_samples``.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {', '.join(METHODS)}")
    if classifier not in CLASSIFIERS:
        raise ValueError(
            f"unknown classifier {classifier!r}, expected one of {', '.join(CLASSIFIERS)}"
        )
    if k_genes < 1:
        raise ValueError("k_genes must be >= 1")
    if rank_scope not in ("train", "full"):
        raise ValueError("rank_scope must be 'train' or 'full'")
    k = min(k_genes, dataset.n_genes)
    fgf_params = _resolve_fgf_params(dataset, method, fgf_params, reoptimize_fgf, ga_config)
    cache = _ranking_cache if _ranking_cache is not None else {}

    n = dataset.n_samples
    if rank_scope == "full" and "full" not in cache:
        cache["full"] = _rank_on(dataset, method, fgf_params)

    correct = 0
    for held_out in range(n):
        keep = np.arange(n) != held_out
        if rank_scope == "full":
            ranking = cache["full"]
        else:
            if held_out not in cache:
                fold_data = _train_fold_dataset(dataset, keep)
                fold_params = fgf_params
                if method == "fgf" and reoptimize_fgf:
                    config = ga_config if ga_config is not None else gaopt.GaConfig()
                    config = replace(config, seed=_derived_seed(config.seed, held_out))
                    fold_params, _ = gaopt.optimize_fgf(fold_data, config)
                cache[held_out] = _rank_on(fold_data, method, fold_params)
            ranking = cache[held_out]
        genes = np.sort(ranking.order[:k])
        features = dataset.matrix[genes][:, keep].T
        fold_labels = dataset.labels[keep]
        query = dataset.matrix[genes][:, held_out]

        hyper, _ = inner_search(
            features, fold_labels, classifier, _derived_seed(seed, held_out, k)
        )
        predicted = _fit_and_predict(
            classifier,
            hyper,
            features,
            fold_labels,
            query[None, :],
            _derived_seed(seed, held_out, k, 1),
        )
        correct += int(predicted[0] == dataset.labels[held_out])
    return correct / n


def sweep_gene_counts(
    dataset: Dataset,
    method: str,
    classifier: str,
    k_max: int = DEFAULT_K_MAX,
    fgf_params=None,
    rank_scope: str = "train",
    seed: int = 0,
    reoptimize_fgf: bool = False,
    ga_config=None,
) -> SweepResult:
    """Accuracy at every gene count from 1 to k_max (capped at n_genes).

    Rankings are computed once per fold and shared across gene counts.
    ``best_k`` is the smallest count reaching the best accuracy.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    k_top = min(k_max, dataset.n_genes)
    fgf_params = _resolve_fgf_params(dataset, method, fgf_params, reoptimize_fgf, ga_config)
    cache = {}
    accuracy_by_k = {}
    for k in range(1, k_top + 1):
        accuracy_by_k[k] = loocv_accuracy(
            dataset,
            method,
            classifier,
            k,
            fgf_params=fgf_params,
            rank_scope=rank_scope,
            seed=seed,
            reoptimize_fgf=reoptimize_fgf,
            ga_config=ga_config,
            _ranking_cache=cache,
        )
    best_k = min(accuracy_by_k, key=lambda k: (-accuracy_by_k[k], k))
    return SweepResult(method, classifier, accuracy_by_k, best_k, accuracy_by_k[best_k])


def anova_oneway(groups) -> AnovaResult:
    """Classic one-way fixed-effects ANOVA over two or more groups.

    Identical values everywhere make the test meaningless and raise;
    zero within-group scatter with differing means yields an infinite F
    and a zero p-value.
    """
    arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(arrays) < 2:
        raise ValueError("need at least two groups")
    for g in arrays:
        if g.ndim != 1 or len(g) < 1:
            raise ValueError("each group must be a non-empty 1-D array")
        if not np.isfinite(g).all():
            raise ValueError("groups contain non-finite values")
    n_total = sum(len(g) for g in arrays)
    n_groups = len(arrays)
    df_between = n_groups - 1
    df_within = n_total - n_groups
    if df_within < 1:
        raise ValueError("need more observations than groups")
    pooled = np.concatenate(arrays)
    if (pooled == pooled[0]).all():
        raise ValueError("degenerate: all observations are identical")
    grand = pooled.mean()
    ss_between = sum(len(g) * (g.mean() - grand) ** 2 for g in arrays)
    ss_within = sum(float(((g - g.mean()) ** 2).sum()) for g in arrays)
    ms_between = ss_between / df_between
    if ss_within == 0.0:
        return AnovaResult(math.inf, 0.0, df_between, df_within)
    ms_within = ss_within / df_within
    f_stat = ms_between / ms_within
    p = float(betainc(df_within / 2.0, df_between / 2.0, df_within / (df_within + df_between * f_stat)))
    return AnovaResult(float(f_stat), p, df_between, df_within)


def save_sweep(result: SweepResult, path) -> None:
    """Write ``k<TAB>accuracy`` rows in ascending k."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k\taccuracy\n")
        for k in sorted(result.accuracy_by_k):
            fh.write(f"{k}\t{result.accuracy_by_k[k]!r}\n")
