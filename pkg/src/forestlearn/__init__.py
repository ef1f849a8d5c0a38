"""Forest-structured model learning from categorical data with missing cells.

The package learns an undirected acyclic dependency structure (a forest)
over the columns of a categorical data frame, scores structures by an
exact Bayesian criterion that remains well defined when cells are
missing, and provides a lossless codec whose code length realizes the
same score.
"""

from forestlearn.dataframe import (
    MISSING,
    CategoricalTable,
    PairCounts,
    ParseError,
    index_sets,
    pair_counts,
    parse_table,
)
from forestlearn.bayes_measure import (
    DirichletPrior,
    log_bayes_measure,
    predictive_probability,
)
from forestlearn.mi_estimators import (
    EstimatorKind,
    EstimatorWeights,
    consistent_weight,
    empirical_mi,
    penalized_mi,
    posterior_weight,
    weight_matrix,
)
from forestlearn.forest_learn import (
    Forest,
    enumerate_forests,
    kruskal_positive,
    learn_forest,
    log_forest_measure,
    log_forest_prior,
    log_forest_score,
    maximum_weight_forest,
)
from forestlearn.universal_code import (
    CodedFrame,
    CorruptStreamError,
    DescriptionLength,
    SourceSpec,
    conditional_entropy,
    decode,
    description_length,
    encode,
    forest_entropy,
    redundancy_report,
)
from forestlearn.simulator import (
    ForestModel,
    masked_hub_model,
    posterior_inconsistency_threshold,
    run_trials,
    sample_frame,
)

__version__ = "0.1.0"

__all__ = [
    "MISSING",
    "CategoricalTable",
    "PairCounts",
    "ParseError",
    "index_sets",
    "pair_counts",
    "parse_table",
    "DirichletPrior",
    "log_bayes_measure",
    "predictive_probability",
    "EstimatorKind",
    "EstimatorWeights",
    "empirical_mi",
    "penalized_mi",
    "posterior_weight",
    "consistent_weight",
    "weight_matrix",
    "Forest",
    "enumerate_forests",
    "kruskal_positive",
    "learn_forest",
    "log_forest_measure",
    "log_forest_prior",
    "log_forest_score",
    "maximum_weight_forest",
    "CodedFrame",
    "CorruptStreamError",
    "DescriptionLength",
    "SourceSpec",
    "conditional_entropy",
    "decode",
    "description_length",
    "encode",
    "forest_entropy",
    "redundancy_report",
    "ForestModel",
    "masked_hub_model",
    "posterior_inconsistency_threshold",
    "run_trials",
    "sample_frame",
    "__version__",
]
