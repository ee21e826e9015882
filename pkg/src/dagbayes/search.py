"""Structure enumeration and search under node constraints."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb
from typing import Iterator, Sequence

import numpy as np

from .core import DagBayesError, DagStructure, Dataset, DiscreteBayesNet, Variable, is_acyclic, variable_index
from .score import FamilyScorer, LogPrior, StructureScore, normalize_log, uniform_log_prior

DEFAULT_CAP = 10**6
IMPROVE_TOL = 1e-9


class SearchTooLargeError(DagBayesError):
    pass


@dataclass(frozen=True)
class StructureConstraints:
    no_parents: frozenset[int] = frozenset()
    no_children: frozenset[int] = frozenset()
    max_parents: int | None = None

    @classmethod
    def from_names(cls, variables: Sequence[Variable], no_parents=(), no_children=(), max_parents=None):
        return cls(
            frozenset(variable_index(variables, n) for n in no_parents),
            frozenset(variable_index(variables, n) for n in no_children),
            max_parents,
        )

    def allows_parent_set(self, child: int, parents: Sequence[int]) -> bool:
        if parents and child in self.no_parents:
            return False
        if any(p in self.no_children for p in parents):
            return False
        return self.max_parents is None or len(parents) <= self.max_parents

    def allows_edge(self, parent: int, child: int) -> bool:
        return child not in self.no_parents and parent not in self.no_children

    def check(self, n: int) -> None:
        for v in self.no_parents | self.no_children:
            if not 0 <= v < n:
                raise DagBayesError(f"constraint names invalid variable index {v}")

    def admits(self, structure: DagStructure) -> bool:
        return all(self.allows_parent_set(i, ps) for i, ps in enumerate(structure.parents))


@dataclass
class SearchReport:
    ranked: list[StructureScore]
    candidates: int
    wall_time: float
    posteriors: list[float] = field(default_factory=list)


def count_dags(n: int) -> int:
    """Number of labelled DAGs on n nodes (Robinson's recurrence)."""
    a = [1]
    for m in range(1, n + 1):
        a.append(sum((-1) ** (k + 1) * comb(m, k) * 2 ** (k * (m - k)) * a[m - k]
                     for k in range(1, m + 1)))
    return a[n]


def _subsets(items: Sequence[int]):
    for r in range(len(items) + 1):
        yield from combinations(items, r)


def enumerate_structures(variables: Sequence[Variable],
                         constraints: StructureConstraints | None = None) -> Iterator[DagStructure]:
    """Yield every DAG satisfying the constraints exactly once.

    Each DAG has a unique layering: layer 0 holds its sources and every node
    in layer k has all parents in earlier layers and at least one in layer
    k - 1. Enumerating ordered layerings with those parent sets therefore
    produces each DAG once.
    """
    variables = tuple(variables)
    constraints = constraints or StructureConstraints()
    n = len(variables)
    constraints.check(n)
    parents: list[tuple[int, ...]] = [()] * n

    def options(child, earlier, prev):
        out = []
        for ps in _subsets(earlier):
            if prev.isdisjoint(ps):
                continue
            if constraints.allows_parent_set(child, ps):
                out.append(ps)
        return out

    def extend(remaining: tuple[int, ...], earlier: tuple[int, ...], prev: frozenset[int]):
        if not remaining:
            yield DagStructure(variables, tuple(parents))
            return
        for size in range(1, len(remaining) + 1):
            for layer in combinations(remaining, size):
                per_node = [options(c, earlier, prev) for c in layer]
                if any(not o for o in per_node):
                    continue
                rest = tuple(v for v in remaining if v not in layer)
                new_earlier = tuple(sorted(earlier + layer))
                for choice in product(*per_node):
                    for c, ps in zip(layer, choice):
                        parents[c] = ps
                    yield from extend(rest, new_earlier, frozenset(layer))
                for c in layer:
                    parents[c] = ()

    all_nodes = tuple(range(n))
    if n == 0:
        yield DagStructure(variables, ())
        return
    for size in range(1, n + 1):
        for layer in combinations(all_nodes, size):
            rest = tuple(v for v in all_nodes if v not in layer)
            yield from extend(rest, layer, frozenset(layer))


def _rank(scores: list[StructureScore]) -> list[StructureScore]:
    return sorted(scores, key=StructureScore.sort_key)


def exhaustive_search(data: Dataset, prior_net: DiscreteBayesNet | None, ess: float,
                      constraints: StructureConstraints | None = None, k: int = 1,
                      cap: int = DEFAULT_CAP, log_prior: LogPrior = uniform_log_prior) -> SearchReport:
    """Score every admissible DAG and return the top ``k``.

    Raises:
        SearchTooLargeError: more than ``cap`` candidates; use greedy_search.
    """
    start = time.perf_counter()
    scorer = FamilyScorer(data, prior_net, ess, log_prior)
    scores = []
    for s in enumerate_structures(data.variables, constraints):
        if len(scores) >= cap:
            raise SearchTooLargeError(
                f"more than {cap} candidate structures; use greedy_search or raise the cap"
            )
        scores.append(scorer.score(s))
    ranked = _rank(scores)
    post = normalize_log([s.log_posterior_unnormalized for s in ranked])
    return SearchReport(ranked[:k], len(scores), time.perf_counter() - start,
                        [float(p) for p in post[:k]])


def _legal_moves(parents: list[tuple[int, ...]], constraints: StructureConstraints):
    """Yield (kind, parent, child, new parent lists) for single-edge moves."""
    n = len(parents)
    for a in range(n):
        for b in range(n):
            if a == b:
                continue
            if a in parents[b]:
                dropped = tuple(p for p in parents[b] if p != a)
                yield "delete", a, b, {b: dropped}
                if constraints.allows_edge(b, a):
                    added = tuple(sorted(parents[a] + (b,)))
                    if constraints.allows_parent_set(a, added):
                        yield "reverse", a, b, {b: dropped, a: added}
            elif b not in parents[a] and constraints.allows_edge(a, b):
                added = tuple(sorted(parents[b] + (a,)))
                if constraints.allows_parent_set(b, added):
                    yield "add", a, b, {b: added}


def _hill_climb(scorer: FamilyScorer, parents: list[tuple[int, ...]],
                constraints: StructureConstraints, variables) -> list[tuple[int, ...]]:
    fam = [scorer.family(i, ps) for i, ps in enumerate(parents)]
    while True:
        best_delta, best = 0.0, None
        for kind, a, b, change in _legal_moves(parents, constraints):
            trial = list(parents)
            for v, ps in change.items():
                trial[v] = ps
            if kind != "delete" and not is_acyclic(trial):
                continue
            delta = sum(scorer.family(v, ps) - fam[v] for v, ps in change.items())
            delta += _prior_delta(scorer, variables, parents, trial)
            # strict improvement beyond rounding noise; ties keep the current graph
            if delta > best_delta + IMPROVE_TOL:
                best_delta, best = delta, change
        if best is None:
            return parents
        for v, ps in best.items():
            parents[v] = ps
            fam[v] = scorer.family(v, ps)


def _prior_delta(scorer, variables, old, new) -> float:
    if scorer.log_prior is uniform_log_prior:
        return 0.0
    return scorer.log_prior(DagStructure(variables, tuple(new))) - scorer.log_prior(
        DagStructure(variables, tuple(old)))


def _random_dag(n: int, constraints: StructureConstraints, rng: np.random.Generator) -> list[tuple[int, ...]]:
    order = [int(v) for v in rng.permutation(n)]
    parents: list[tuple[int, ...]] = [()] * n
    for pos, child in enumerate(order):
        chosen = []
        for p in order[:pos]:
            if constraints.allows_edge(p, child) and rng.random() < 0.5:
                cand = tuple(sorted(chosen + [p]))
                if constraints.allows_parent_set(child, cand):
                    chosen.append(p)
        parents[child] = tuple(sorted(chosen))
    return parents


def greedy_search(data: Dataset, prior_net: DiscreteBayesNet | None, ess: float,
                  constraints: StructureConstraints | None = None, seed: int = 0,
                  restarts: int = 10, k: int = 1,
                  log_prior: LogPrior = uniform_log_prior) -> SearchReport:
    """Hill climbing over add/delete/reverse moves with random restarts.

    The first climb starts from the empty graph; each restart starts from a
    random admissible DAG drawn with ``seed``. Only families touched by a move
    are rescored.
    """
    start = time.perf_counter()
    constraints = constraints or StructureConstraints()
    variables = data.variables
    n = len(variables)
    constraints.check(n)
    rng = np.random.default_rng(seed)
    scorer = FamilyScorer(data, prior_net, ess, log_prior)
    optima: dict[tuple, StructureScore] = {}
    starts = [[()] * n] + [_random_dag(n, constraints, rng) for _ in range(restarts)]
    for init in starts:
        result = _hill_climb(scorer, list(init), constraints, variables)
        s = DagStructure(variables, tuple(result))
        optima.setdefault(tuple(s.edges()), scorer.score(s))
    ranked = _rank(list(optima.values()))
    return SearchReport(ranked[:k], len(starts), time.perf_counter() - start)


def is_local_optimum(structure: DagStructure, data: Dataset, prior_net, ess,
                     constraints: StructureConstraints | None = None, tol: float = IMPROVE_TOL) -> bool:
    """True when no single legal edge move raises the log posterior."""
    constraints = constraints or StructureConstraints()
    scorer = FamilyScorer(data, prior_net, ess)
    base = scorer.score(structure).log_posterior_unnormalized
    parents = list(structure.parents)
    for kind, a, b, change in _legal_moves(parents, constraints):
        trial = list(parents)
        for v, ps in change.items():
            trial[v] = ps
        if not is_acyclic(trial):
            continue
        if scorer.score(DagStructure(structure.variables, tuple(trial))).log_posterior_unnormalized > base + tol:
            return False
    return True
