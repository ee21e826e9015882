"""Discrete Bayesian networks: structure learning, exact inference, decisions."""

from .core import (
    Cpt,
    DagBayesError,
    DagStructure,
    Dataset,
    DiscreteBayesNet,
    SufficientStats,
    Variable,
    equivalence_signature,
    joint_probability,
    parent_config_index,
    tally_sufficient_stats,
    uniform_network,
    validate_network,
)
from .infer import ImpossibleEvidenceError, PosteriorTable, Query, query_eliminate, query_enumeration
from .score import (
    bde_hyperparams,
    cf_from_lr,
    family_log_ml,
    network_log_ml,
    network_log_ml_interventional,
    odds_update,
    prequential_log_ml,
    structure_posterior,
)
from .search import StructureConstraints, enumerate_structures, exhaustive_search, greedy_search

__all__ = [
    "Cpt",
    "DagBayesError",
    "DagStructure",
    "Dataset",
    "DiscreteBayesNet",
    "SufficientStats",
    "Variable",
    "equivalence_signature",
    "joint_probability",
    "parent_config_index",
    "tally_sufficient_stats",
    "uniform_network",
    "validate_network",
    "bde_hyperparams",
    "cf_from_lr",
    "family_log_ml",
    "network_log_ml",
    "network_log_ml_interventional",
    "odds_update",
    "prequential_log_ml",
    "structure_posterior",
    "ImpossibleEvidenceError",
    "PosteriorTable",
    "Query",
    "query_eliminate",
    "query_enumeration",
    "StructureConstraints",
    "enumerate_structures",
    "exhaustive_search",
    "greedy_search",
]

__version__ = "0.1.0"
