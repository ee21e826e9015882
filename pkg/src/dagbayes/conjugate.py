"""Beta/Dirichlet conjugate updating for a single discrete variable."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .core import DagBayesError


class DimensionMismatchError(DagBayesError):
    pass


class NonPositiveSampleSizeError(DagBayesError):
    """Elicited judgements imply no finite, positive equivalent sample size."""


@dataclass(frozen=True)
class DirichletParams:
    alphas: np.ndarray

    def __post_init__(self):
        a = np.array(self.alphas, dtype=np.float64).reshape(-1)
        if a.size < 1:
            raise DagBayesError("need at least one hyperparameter")
        if not np.all(a > 0) or not np.all(np.isfinite(a)):
            raise DagBayesError("Dirichlet hyperparameters must be finite and strictly positive")
        a.setflags(write=False)
        object.__setattr__(self, "alphas", a)

    @property
    def total(self) -> float:
        return float(self.alphas.sum())

    def mean(self) -> np.ndarray:
        return self.alphas / self.alphas.sum()

    def __eq__(self, other):
        return isinstance(other, DirichletParams) and np.array_equal(self.alphas, other.alphas)

    def __hash__(self):
        return hash(self.alphas.tobytes())


def Beta(a: float, b: float) -> DirichletParams:
    return DirichletParams(np.array([a, b], dtype=float))


def _counts(prior: DirichletParams, counts: Sequence[int]) -> np.ndarray:
    n = np.asarray(counts, dtype=np.float64).reshape(-1)
    if n.shape != prior.alphas.shape:
        raise DimensionMismatchError(
            f"{n.size} counts for a {prior.alphas.size}-state prior"
        )
    if np.any(n < 0):
        raise DagBayesError("counts must be nonnegative")
    return n


def update(prior: DirichletParams, counts: Sequence[int]) -> DirichletParams:
    """Posterior hyperparameters: prior alpha plus observed counts."""
    return DirichletParams(prior.alphas + _counts(prior, counts))


def predictive(prior: DirichletParams, counts: Sequence[int]) -> np.ndarray:
    """Probability of each state on the next draw, (alpha_k + N_k) / (alpha + N)."""
    n = _counts(prior, counts)
    post = prior.alphas + n
    return post / post.sum()


def log_marginal_likelihood(prior: DirichletParams, counts: Sequence[int]) -> float:
    """ln p(D) for a sequence with the given counts (not the multinomial coefficient).

    Uses Gamma(a_k + N_k) / Gamma(a_k) per state, so that exp() of the result
    equals the product of one-step-ahead predictives.
    """
    n = _counts(prior, counts)
    a = prior.alphas
    return float(
        gammaln(a.sum()) - gammaln(a.sum() + n.sum())
        + np.sum(gammaln(a + n) - gammaln(a))
    )


def elicit_imagined_data(p_first: float, p_second_given_first: float) -> DirichletParams:
    """Beta hyperparameters from two judgements about imagined tosses.

    ``p_first`` is the probability of heads on the first toss and
    ``p_second_given_first`` the probability of heads on the second toss
    after imagining heads on the first.
    """
    p1, p2 = float(p_first), float(p_second_given_first)
    if not 0.0 < p1 < 1.0:
        raise DagBayesError("p_first must lie strictly between 0 and 1")
    if p2 <= p1:
        raise NonPositiveSampleSizeError(
            "p_second_given_first must exceed p_first; otherwise the implied "
            "equivalent sample size is infinite or negative"
        )
    if p2 >= 1.0:
        raise NonPositiveSampleSizeError("p_second_given_first must be below 1")
    ess = (1.0 - p2) / (p2 - p1)
    return Beta(p1 * ess, (1.0 - p1) * ess)
