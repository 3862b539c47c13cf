"""Gene ranking toolkit for two-class expression studies.

Combines a tunable fuzzy-inference gene filter with three classical
rankers, four small classifiers and a nested leave-one-out benchmark
harness. See the README for the pipeline overview and CLI usage.
"""

__version__ = "0.1.0"

from generank.dataio import Dataset, load_dataset, quantile_normalize, standardize_genes
from generank.fgf import FgfParams, FuzzyRegion, compute_fuzzy_inputs, fgf_rank
from generank.gaopt import GaConfig, optimize_fgf, separability_index
from generank.rankers import rank_genes, roc_test, welch_t_test, wilcoxon_test

__all__ = [
    "__version__",
    "Dataset",
    "load_dataset",
    "quantile_normalize",
    "standardize_genes",
    "FgfParams",
    "FuzzyRegion",
    "compute_fuzzy_inputs",
    "fgf_rank",
    "GaConfig",
    "optimize_fgf",
    "separability_index",
    "rank_genes",
    "welch_t_test",
    "wilcoxon_test",
    "roc_test",
]
