"""Exact posterior queries: brute-force enumeration and variable elimination."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .core import DagBayesError, DiscreteBayesNet, config_states


class ImpossibleEvidenceError(DagBayesError):
    """Evidence has zero probability under the network."""


@dataclass(frozen=True)
class Query:
    targets: tuple[int, ...]
    evidence: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "evidence", dict(self.evidence))
        if set(self.targets) & set(self.evidence):
            raise DagBayesError("targets and evidence must be disjoint")
        if len(set(self.targets)) != len(self.targets):
            raise DagBayesError("duplicate target variable")

    def check(self, net: DiscreteBayesNet) -> None:
        cards = net.cardinalities
        for t in self.targets:
            if not 0 <= t < len(cards):
                raise DagBayesError(f"invalid target index {t}")
        for v, s in self.evidence.items():
            if not 0 <= v < len(cards):
                raise DagBayesError(f"invalid evidence variable {v}")
            if not 0 <= s < cards[v]:
                raise DagBayesError(f"invalid evidence state {s} for {net.variables[v].name}")


@dataclass(frozen=True)
class PosteriorTable:
    """Posterior over the joint states of ``targets``; axis k belongs to targets[k]."""

    targets: tuple[int, ...]
    probs: np.ndarray

    def __getitem__(self, states):
        return float(self.probs[states])

    def rows(self):
        """Yield (target state tuple, probability) in mixed-radix order."""
        cards = self.probs.shape
        for idx, p in enumerate(self.probs.reshape(-1)):
            yield config_states(cards, idx), float(p)


def joint_table(net: DiscreteBayesNet) -> np.ndarray:
    """Full joint as an n-dimensional array (axis i = variable i)."""
    cards = net.cardinalities
    n = len(cards)
    joint = np.ones(cards, dtype=np.float64)
    for cpt in net.cpts:
        axes = list(cpt.parent_order) + [cpt.child]
        arr = cpt.as_factor_array(cards)
        order = np.argsort(axes)
        arr = np.transpose(arr, order)
        shape = [1] * n
        for a in axes:
            shape[a] = cards[a]
        joint = joint * arr.reshape(shape)
    return joint


def _normalize(table: np.ndarray) -> np.ndarray:
    z = table.sum()
    if not z > 0:
        raise ImpossibleEvidenceError("evidence has zero probability")
    return table / z


def query_enumeration(net: DiscreteBayesNet, query: Query) -> PosteriorTable:
    """p(targets | evidence) by summing the explicit full joint."""
    query.check(net)
    joint = joint_table(net)
    index = [slice(None)] * joint.ndim
    for v, s in query.evidence.items():
        index[v] = slice(s, s + 1)
    reduced = joint[tuple(index)]
    hidden = tuple(i for i in range(joint.ndim) if i not in query.targets)
    marg = reduced.sum(axis=hidden) if hidden else reduced
    # remaining axes are the targets in ascending index order
    asc = sorted(query.targets)
    marg = np.transpose(marg, [asc.index(t) for t in query.targets]) if query.targets else marg
    return PosteriorTable(query.targets, _normalize(np.asarray(marg, dtype=float)))


@dataclass
class Factor:
    scope: tuple[int, ...]
    table: np.ndarray

    def __mul__(self, other: "Factor") -> "Factor":
        scope = tuple(dict.fromkeys(self.scope + other.scope))
        letters = {v: _letter(k) for k, v in enumerate(scope)}
        spec = "{},{}->{}".format(
            "".join(letters[v] for v in self.scope),
            "".join(letters[v] for v in other.scope),
            "".join(letters[v] for v in scope),
        )
        return Factor(scope, np.einsum(spec, self.table, other.table))

    def sum_out(self, var: int) -> "Factor":
        ax = self.scope.index(var)
        return Factor(self.scope[:ax] + self.scope[ax + 1:], self.table.sum(axis=ax))

    def reduce(self, evidence: Mapping[int, int]) -> "Factor":
        index, scope = [], []
        for v in self.scope:
            if v in evidence:
                index.append(evidence[v])
            else:
                index.append(slice(None))
                scope.append(v)
        return Factor(tuple(scope), self.table[tuple(index)])


def _letter(k: int) -> str:
    return "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"[k]


def relevant_variables(net: DiscreteBayesNet, keep: set[int]) -> set[int]:
    """Ancestral closure of ``keep``; every other variable is barren and sums to one."""
    out, stack = set(), list(keep)
    while stack:
        v = stack.pop()
        if v in out:
            continue
        out.add(v)
        stack.extend(net.structure.parents[v])
    return out


def min_degree_order(factors: Sequence[Factor], eliminate: set[int]) -> list[int]:
    """Greedy elimination order by fewest neighbours in the interaction graph."""
    neigh: dict[int, set[int]] = {}
    for f in factors:
        for v in f.scope:
            neigh.setdefault(v, set()).update(u for u in f.scope if u != v)
    for v in eliminate:
        neigh.setdefault(v, set())
    order = []
    remaining = set(eliminate)
    while remaining:
        v = min(remaining, key=lambda u: (len(neigh[u]), u))
        order.append(v)
        remaining.discard(v)
        nb = neigh.pop(v)
        for u in nb:
            neigh[u].discard(v)
            neigh[u].update(w for w in nb if w != u)
    return order


def query_eliminate(net: DiscreteBayesNet, query: Query) -> PosteriorTable:
    """Variable elimination after barren-node pruning."""
    query.check(net)
    cards = net.cardinalities
    keep = relevant_variables(net, set(query.targets) | set(query.evidence))
    factors = []
    for cpt in net.cpts:
        if cpt.child not in keep:
            continue
        f = Factor(tuple(cpt.parent_order) + (cpt.child,), cpt.as_factor_array(cards))
        factors.append(f.reduce(query.evidence))
    hidden = keep - set(query.targets) - set(query.evidence)
    for v in min_degree_order(factors, hidden):
        bucket = [f for f in factors if v in f.scope]
        factors = [f for f in factors if v not in f.scope]
        prod = bucket[0]
        for f in bucket[1:]:
            prod = prod * f
        factors.append(prod.sum_out(v))
    result = Factor((), np.array(1.0))
    for f in factors:
        result = result * f
    table = np.transpose(result.table, [result.scope.index(t) for t in query.targets])
    return PosteriorTable(query.targets, _normalize(np.asarray(table, dtype=float)))


def marginal_joint(net: DiscreteBayesNet, variables: Sequence[int]) -> np.ndarray:
    """Unconditioned joint over ``variables`` (axis order as given)."""
    return query_eliminate(net, Query(tuple(variables))).probs
