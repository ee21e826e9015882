"""BDe priors, Bayesian structure scores and posteriors over structures.

Hyperparameters for a family are ``ess * p(child, parents)`` under a prior
network, so Markov-equivalent structures receive identical scores. When no
prior network is given the joint is taken to be uniform (the BDeu special
case, ``ess / (r_i * q_i)`` per cell).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import conjugate
from .conjugate import DirichletParams
from .core import (
    DagBayesError,
    DagStructure,
    Dataset,
    DiscreteBayesNet,
    DomainMismatchError,
    family_counts,
    parent_config_index,
    tally_sufficient_stats,
)
from .infer import marginal_joint

LogPrior = Callable[[DagStructure], float]


def uniform_log_prior(structure: DagStructure) -> float:
    """Unnormalized uniform structure prior."""
    return 0.0


def _check_ess(ess: float) -> float:
    ess = float(ess)
    if not ess > 0 or not math.isfinite(ess):
        raise DagBayesError(f"equivalent sample size must be positive, got {ess}")
    return ess


def _check_prior_domain(variables, prior_net):
    if prior_net is not None and tuple(prior_net.variables) != tuple(variables):
        raise DomainMismatchError("prior network is over a different domain")


def family_hyperparams(variables, child: int, parents: Sequence[int],
                       prior_net: DiscreteBayesNet | None, ess: float) -> np.ndarray:
    """Alpha matrix of shape (q, r) for one family."""
    cards = [v.cardinality for v in variables]
    r = cards[child]
    q = int(np.prod([cards[p] for p in parents], dtype=np.int64)) if parents else 1
    if prior_net is None:
        return np.full((q, r), ess / (q * r))
    joint = marginal_joint(prior_net, list(parents) + [child])
    alpha = ess * joint.reshape(q, r)
    if np.any(alpha <= 0):
        raise DagBayesError(
            f"prior network gives zero probability to a configuration of "
            f"{variables[child].name} and its parents"
        )
    return alpha


@dataclass(frozen=True)
class BdePrior:
    structure: DagStructure
    alphas: tuple[np.ndarray, ...]  # per variable, shape (q_i, r_i)
    ess: float
    provenance: str

    def family(self, i: int) -> list[DirichletParams]:
        return [DirichletParams(row) for row in self.alphas[i]]


def bde_hyperparams(structure: DagStructure, prior_net: DiscreteBayesNet | None,
                    ess: float) -> BdePrior:
    """Dirichlet hyperparameters for every family of ``structure``."""
    ess = _check_ess(ess)
    _check_prior_domain(structure.variables, prior_net)
    alphas = tuple(
        family_hyperparams(structure.variables, i, ps, prior_net, ess)
        for i, ps in enumerate(structure.parents)
    )
    return BdePrior(structure, alphas, ess, "uniform" if prior_net is None else "prior network")


def family_log_ml(counts: np.ndarray, alphas: np.ndarray) -> float:
    """Sum over parent configurations of the Dirichlet-multinomial log ML."""
    counts = np.asarray(counts)
    alphas = np.asarray(alphas)
    if counts.shape != alphas.shape:
        raise conjugate.DimensionMismatchError(
            f"counts shape {counts.shape} does not match hyperparameters {alphas.shape}"
        )
    total = 0.0
    for a_row, n_row in zip(alphas, counts):
        if n_row.any():
            total += conjugate.log_marginal_likelihood(DirichletParams(a_row), n_row)
    return total


def network_log_ml(structure: DagStructure, data: Dataset,
                   prior_net: DiscreteBayesNet | None, ess: float) -> float:
    """log p(D | structure); forced cells are excluded from their own family."""
    if tuple(structure.variables) != tuple(data.variables):
        raise DomainMismatchError("dataset variables do not match the structure's domain")
    prior = bde_hyperparams(structure, prior_net, ess)
    stats = tally_sufficient_stats(structure, data)
    total = 0.0
    for i in range(structure.n):
        total += family_log_ml(stats.counts[i], prior.alphas[i])
    return total


def network_log_ml_interventional(structure: DagStructure, data: Dataset,
                                  prior_net: DiscreteBayesNet | None, ess: float) -> float:
    """Score for data mixing observations with interventions.

    A forced value supplies a parent configuration for its children but adds
    nothing to its own family. The tally already applies that rule, so this is
    the observational score evaluated on the same statistics.
    """
    return network_log_ml(structure, data, prior_net, ess)


def prequential_log_ml(structure: DagStructure, data: Dataset,
                       prior_net: DiscreteBayesNet | None, ess: float) -> float:
    """Sum of one-step-ahead predictive log probabilities, case by case."""
    if tuple(structure.variables) != tuple(data.variables):
        raise DomainMismatchError("dataset variables do not match the structure's domain")
    prior = bde_hyperparams(structure, prior_net, ess)
    cards = structure.cardinalities
    running = [np.zeros_like(a) for a in prior.alphas]
    total = 0.0
    for case, forced in zip(data.cases, data.forced):
        for i, ps in enumerate(structure.parents):
            if forced[i]:
                continue
            j = parent_config_index([cards[p] for p in ps], [int(case[p]) for p in ps])
            k = int(case[i])
            probs = conjugate.predictive(DirichletParams(prior.alphas[i][j]), running[i][j])
            total += math.log(probs[k])
            running[i][j, k] += 1
    return total


@dataclass(frozen=True)
class StructureScore:
    structure: DagStructure
    log_ml: float
    log_prior: float

    @property
    def log_posterior_unnormalized(self) -> float:
        return self.log_ml + self.log_prior

    def sort_key(self):
        return (-self.log_posterior_unnormalized, self.structure.edges())


def normalize_log(values: Sequence[float]) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise DagBayesError("nothing to normalize")
    w = np.exp(v - v.max())
    return w / w.sum()


class FamilyScorer:
    """Memoized family scores over one dataset and prior.

    Scores depend only on (child, parent set), so any number of candidate
    structures can be scored by summing cached family terms.
    """

    def __init__(self, data: Dataset, prior_net: DiscreteBayesNet | None, ess: float,
                 log_prior: LogPrior = uniform_log_prior):
        self.data = data
        self.variables = data.variables
        self.prior_net = prior_net
        self.ess = _check_ess(ess)
        self.log_prior = log_prior
        _check_prior_domain(self.variables, prior_net)
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def family(self, child: int, parents: Sequence[int]) -> float:
        key = (child, tuple(parents))
        hit = self._cache.get(key)
        if hit is None:
            alphas = family_hyperparams(self.variables, child, key[1], self.prior_net, self.ess)
            hit = family_log_ml(family_counts(self.data, child, key[1]), alphas)
            self._cache[key] = hit
        return hit

    def log_ml(self, structure: DagStructure) -> float:
        total = 0.0
        for i, ps in enumerate(structure.parents):
            total += self.family(i, ps)
        return total

    def score(self, structure: DagStructure) -> StructureScore:
        return StructureScore(structure, self.log_ml(structure), float(self.log_prior(structure)))


def structure_posterior(candidates: Sequence[DagStructure], structure_log_priors: Sequence[float] | None,
                        data: Dataset, prior_net: DiscreteBayesNet | None, ess: float) -> np.ndarray:
    """Posterior probability of each candidate, normalized over the list."""
    if not candidates:
        raise DagBayesError("need at least one candidate structure")
    if structure_log_priors is None:
        structure_log_priors = [0.0] * len(candidates)
    if len(structure_log_priors) != len(candidates):
        raise DagBayesError("one log prior per candidate required")
    if not all(math.isfinite(p) for p in structure_log_priors):
        raise DagBayesError("structure log priors must be finite")
    scorer = FamilyScorer(data, prior_net, ess)
    logs = [scorer.log_ml(s) + lp for s, lp in zip(candidates, structure_log_priors)]
    return normalize_log(logs)


def odds_update(prior_odds: float, lam: float) -> float:
    """Posterior odds = likelihood ratio times prior odds."""
    if not prior_odds > 0:
        raise DagBayesError("prior odds must be positive")
    if lam < 0:
        raise DagBayesError("likelihood ratio must be nonnegative")
    return lam * prior_odds


def odds_to_probability(odds: float) -> float:
    return 1.0 if math.isinf(odds) else odds / (1.0 + odds)


def cf_from_lr(lam: float) -> float:
    """Certainty factor (lambda - 1) / (lambda + 1), in [-1, 1)."""
    if lam < 0:
        raise DagBayesError("likelihood ratio must be nonnegative")
    if math.isinf(lam):
        return 1.0
    return (lam - 1.0) / (lam + 1.0)
