"""Dependency networks and ordered Gibbs sampling.

A dependency network stores one conditional ``p(X_i | parents_i)`` per
variable, where the parents may be any of the other variables and the graph
is usually cyclic. Joint queries go through a Gibbs sampler. With strictly
positive conditionals the chain has a unique stationary distribution even
when the conditionals are mutually inconsistent; that limit may depend on
the visitation order.

Random streams: a chain seeded with ``seed`` draws from
``np.random.default_rng(np.random.SeedSequence(seed))``. Parallel chains use
``SeedSequence(seed).spawn(n)``; see :func:`chain_seeds`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Cpt, DagBayesError, Dataset, DiscreteBayesNet, Variable, family_counts
from .infer import joint_table
from .score import FamilyScorer

CHUNK_SWEEPS = 1 << 15


class NonPositiveConditionalError(DagBayesError):
    pass


@dataclass(frozen=True)
class DependencyNetwork:
    variables: tuple[Variable, ...]
    parents: tuple[tuple[int, ...], ...]
    cpts: tuple[Cpt, ...]

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def check_positive(self) -> None:
        for cpt in self.cpts:
            if not np.all(cpt.rows > 0):
                raise NonPositiveConditionalError(
                    f"conditional for {self.variables[cpt.child].name} has a zero entry"
                )

    def conditional(self, i: int, state: Sequence[int]) -> np.ndarray:
        """Row of p(X_i | parents) selected by a full assignment."""
        cards = self.cardinalities
        j = 0
        for p in self.parents[i]:
            j = j * cards[p] + state[p]
        return self.cpts[i].rows[j]


def learn_depnet(data: Dataset, pseudocount: float = 1.0, prune: bool = False,
                 ess: float = 1.0) -> DependencyNetwork:
    """Smoothed conditional tables of each variable given all the others.

    With ``prune=True`` parents are dropped greedily while doing so raises the
    variable's BDeu family score (equivalent sample size ``ess``); the kept
    set is then re-estimated with the pseudocount.
    """
    if len(data) == 0:
        raise DagBayesError("cannot learn a dependency network from zero cases")
    if not pseudocount > 0:
        raise DagBayesError("pseudocount must be positive")
    n = len(data.variables)
    scorer = FamilyScorer(data, None, ess) if prune else None
    parents, cpts = [], []
    for i in range(n):
        ps = tuple(j for j in range(n) if j != i)
        if scorer is not None:
            ps = _prune(scorer, i, ps)
        counts = family_counts(data, i, ps).astype(float) + pseudocount
        parents.append(ps)
        cpts.append(Cpt(i, ps, counts / counts.sum(axis=1, keepdims=True)))
    return DependencyNetwork(data.variables, tuple(parents), tuple(cpts))


def _prune(scorer: FamilyScorer, child: int, parents: tuple[int, ...]) -> tuple[int, ...]:
    current = scorer.family(child, parents)
    while parents:
        trials = [(scorer.family(child, tuple(p for p in parents if p != drop)), drop) for drop in parents]
        best, drop = max(trials, key=lambda t: (t[0], -t[1]))
        if best <= current:
            break
        parents = tuple(p for p in parents if p != drop)
        current = best
    return parents


def depnet_from_bn(net: DiscreteBayesNet) -> DependencyNetwork:
    """Consistent dependency network: each p(X_i | all others) from the net's joint."""
    joint = joint_table(net)
    if not np.all(joint > 0):
        raise DagBayesError("network must be strictly positive to derive full conditionals")
    n = joint.ndim
    parents, cpts = [], []
    for i in range(n):
        cond = joint / joint.sum(axis=i, keepdims=True)
        others = tuple(j for j in range(n) if j != i)
        rows = np.moveaxis(cond, i, -1).reshape(-1, joint.shape[i])
        parents.append(others)
        cpts.append(Cpt(i, others, rows))
    return DependencyNetwork(net.variables, tuple(parents), tuple(cpts))


@dataclass(frozen=True)
class GibbsResult:
    joint: np.ndarray  # empirical joint, axis i = variable i
    sweeps: int
    burn_in: int
    seed: int
    order: str

    def total_variation(self, other: np.ndarray) -> float:
        return total_variation(self.joint, other)


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def chain_seeds(seed: int, n_chains: int) -> list[np.random.SeedSequence]:
    """Independent child streams for ``n_chains`` parallel chains."""
    return np.random.SeedSequence(seed).spawn(n_chains)


def _cumulative_tables(dn: DependencyNetwork):
    """Per variable, a list indexed by the joint code with X_i zeroed.

    Each entry is the cumulative conditional row, so one lookup replaces the
    parent-configuration arithmetic inside the sampling loop.
    """
    cards = dn.cardinalities
    n = len(cards)
    strides = [1] * n
    for i in range(n - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    size = strides[0] * cards[0]
    codes = np.arange(size)
    states = np.stack([(codes // strides[i]) % cards[i] for i in range(n)], axis=1)
    tables = []
    for i in range(n):
        ps = list(dn.parents[i])
        if ps:
            w = [1] * len(ps)
            for k in range(len(ps) - 2, -1, -1):
                w[k] = w[k + 1] * cards[ps[k + 1]]
            rows = states[:, ps] @ np.asarray(w)
        else:
            rows = np.zeros(size, dtype=np.int64)
        cum = np.cumsum(dn.cpts[i].rows, axis=1)[rows]
        cum[:, -1] = np.inf  # guard against rounding in the last bucket
        tables.append([tuple(r) for r in cum.tolist()])
    return strides, size, tables


def gibbs_sample(dn: DependencyNetwork, sweeps: int, burn_in: int = 0, seed: int = 0,
                 order: str = "fixed", initial: Sequence[int] | None = None,
                 seed_sequence: np.random.SeedSequence | None = None) -> GibbsResult:
    """Run one chain and return the empirical joint of the post burn-in sweeps.

    ``order`` is ``"fixed"`` (ascending index) or ``"random"`` (fresh
    permutation every sweep). Without ``initial`` the start state is drawn
    uniformly from the chain's own stream.
    """
    if not sweeps > burn_in >= 0:
        raise DagBayesError("need sweeps > burn_in >= 0")
    if order not in ("fixed", "random"):
        raise DagBayesError("order must be 'fixed' or 'random'")
    dn.check_positive()
    cards = dn.cardinalities
    n = len(cards)
    rng = np.random.default_rng(seed_sequence if seed_sequence is not None else np.random.SeedSequence(seed))
    strides, size, tables = _cumulative_tables(dn)
    if initial is None:
        state = [int(rng.integers(c)) for c in cards]
    else:
        state = [int(s) for s in initial]
        if len(state) != n or any(not 0 <= s < c for s, c in zip(state, cards)):
            raise DagBayesError("invalid initial state")
    code = sum(s * w for s, w in zip(state, strides))
    counts = np.zeros(size, dtype=np.int64)
    fixed = list(range(n))
    done = 0
    while done < sweeps:
        m = min(CHUNK_SWEEPS, sweeps - done)
        uniforms = rng.random((m, n)).tolist()
        if order == "fixed":
            orders = [fixed] * m
        else:
            orders = rng.permuted(np.tile(np.arange(n), (m, 1)), axis=1).tolist()
        recorded = []
        for u_row, visit in zip(uniforms, orders):
            for i in visit:
                base = code - state[i] * strides[i]
                cum = tables[i][base]
                u = u_row[i]
                k = 0
                while u >= cum[k]:
                    k += 1
                state[i] = k
                code = base + k * strides[i]
            recorded.append(code)
        start = max(0, burn_in - done)
        if start < m:
            counts += np.bincount(recorded[start:], minlength=size)
        done += m
    joint = (counts / counts.sum()).reshape(cards)
    return GibbsResult(joint, sweeps, burn_in, seed, order)
