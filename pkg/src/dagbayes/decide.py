"""Influence diagrams and decision trees solved by maximum expected utility."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence, Union

import numpy as np

from .core import (
    Cpt,
    DagBayesError,
    DagStructure,
    DiscreteBayesNet,
    Variable,
    check_domain,
    parent_config_index,
    validate_network,
    variable_index,
)
from .infer import Query, query_eliminate


class MalformedDiagramError(DagBayesError):
    pass


class MalformedTreeError(DagBayesError):
    pass


@dataclass(frozen=True)
class DecisionVariable:
    name: str
    alternatives: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "alternatives", tuple(self.alternatives))
        if not self.alternatives:
            raise MalformedDiagramError(f"decision {self.name!r} has no alternatives")
        if len(set(self.alternatives)) != len(self.alternatives):
            raise MalformedDiagramError(f"decision {self.name!r} repeats an alternative")


@dataclass(frozen=True)
class UncertaintySpec:
    """CPT for one uncertainty node; parents may name decisions."""

    child: str
    parents: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]


class InfluenceDiagram:
    """Decisions made up front, uncertainty nodes, one deterministic outcome node.

    Internally the decisions become root variables of a Bayes net (with
    placeholder uniform tables) so that ``p(config | decisions)`` is an
    ordinary conditional query.
    """

    def __init__(self, decisions: Sequence[DecisionVariable], uncertainties: Sequence[Variable],
                 cpts: Sequence[UncertaintySpec], outcome_parents: Sequence[str],
                 outcome_labels: Sequence[str], utilities: Mapping[str, float]):
        self.decisions = tuple(decisions)
        self.uncertainties = tuple(uncertainties)
        self.cpt_specs = tuple(cpts)
        self.outcome_parents = tuple(outcome_parents)
        self.outcome_labels = tuple(outcome_labels)
        self.utilities = {k: float(v) for k, v in utilities.items()}
        self._build()

    def _build(self):
        if not self.decisions:
            raise MalformedDiagramError("an influence diagram needs at least one decision")
        dvars = []
        for d in self.decisions:
            if len(d.alternatives) >= 2:
                dvars.append(Variable(d.name, d.alternatives))
            else:
                # single-alternative decision; pad so the net variable is legal
                dvars.append(Variable(d.name, d.alternatives + ("__unused__",)))
        try:
            variables = check_domain(dvars + list(self.uncertainties))
        except DagBayesError as e:
            raise MalformedDiagramError(str(e)) from None
        cards = [v.cardinality for v in variables]
        n_dec = len(self.decisions)
        specs = {s.child: s for s in self.cpt_specs}
        parents, cpts = [], []
        for i, v in enumerate(variables):
            if i < n_dec:
                parents.append(())
                cpts.append(Cpt(i, (), np.full((1, cards[i]), 1.0 / cards[i])))
                continue
            if v.name not in specs:
                raise MalformedDiagramError(f"no CPT for uncertainty node {v.name!r}")
            spec = specs[v.name]
            try:
                pidx = tuple(variable_index(variables, p) for p in spec.parents)
            except DagBayesError as e:
                raise MalformedDiagramError(str(e)) from None
            parents.append(pidx)
            cpts.append(Cpt(i, pidx, np.asarray(spec.rows, dtype=float)))
        extra = set(specs) - {v.name for v in self.uncertainties}
        if extra:
            raise MalformedDiagramError(f"CPT given for unknown node(s) {sorted(extra)}")
        net = DiscreteBayesNet(DagStructure(variables, tuple(parents)), tuple(cpts))
        problems = validate_network(net)
        if problems:
            raise MalformedDiagramError("; ".join(str(p) for p in problems))
        self.net = net

        try:
            self._outcome_idx = tuple(variable_index(variables, p) for p in self.outcome_parents)
        except DagBayesError as e:
            raise MalformedDiagramError(str(e)) from None
        missing = [d.name for d in self.decisions if d.name not in self.outcome_parents]
        if missing:
            raise MalformedDiagramError(f"outcome node must depend on every decision; missing {missing}")
        self._outcome_cards = tuple(self._card(i) for i in self._outcome_idx)
        expected = int(np.prod(self._outcome_cards, dtype=np.int64))
        if len(self.outcome_labels) != expected:
            raise MalformedDiagramError(
                f"outcome table has {len(self.outcome_labels)} entries, expected {expected}"
            )
        unknown = sorted(set(self.outcome_labels) - set(self.utilities))
        if unknown:
            raise MalformedDiagramError(f"outcome(s) without a utility: {unknown}")
        out_of_range = [k for k, u in self.utilities.items() if not 0.0 <= u <= 1.0]
        if out_of_range:
            warnings.warn(f"utilities outside [0, 1] for {sorted(out_of_range)}", stacklevel=3)

    def _card(self, i: int) -> int:
        if i < len(self.decisions):
            return len(self.decisions[i].alternatives)
        return self.net.variables[i].cardinality

    @property
    def chance_parents(self) -> tuple[int, ...]:
        return tuple(i for i in self._outcome_idx if i >= len(self.decisions))

    def outcome(self, decision_states: Sequence[int], chance_states: Mapping[int, int]) -> str:
        states = []
        for i in self._outcome_idx:
            states.append(decision_states[i] if i < len(self.decisions) else chance_states[i])
        return self.outcome_labels[parent_config_index(self._outcome_cards, states)]

    def joint_decisions(self):
        return product(*(range(len(d.alternatives)) for d in self.decisions))

    def chance_distribution(self, decision_states: Sequence[int]) -> list[tuple[dict[int, int], float]]:
        """p(outcome's chance parents | decisions) as (configuration, probability) pairs."""
        targets = self.chance_parents
        if not targets:
            return [({}, 1.0)]
        evidence = dict(enumerate(decision_states))
        post = query_eliminate(self.net, Query(targets, evidence))
        return [(dict(zip(targets, states)), p) for states, p in post.rows()]

    def with_utilities(self, utilities: Mapping[str, float]) -> "InfluenceDiagram":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return InfluenceDiagram(self.decisions, self.uncertainties, self.cpt_specs,
                                    self.outcome_parents, self.outcome_labels, utilities)

    def transformed(self, scale: float, shift: float) -> "InfluenceDiagram":
        """Diagram with every utility mapped to ``scale * u + shift``."""
        if not scale > 0:
            raise DagBayesError("scale must be positive")
        return self.with_utilities({k: scale * u + shift for k, u in self.utilities.items()})


@dataclass(frozen=True)
class MeuResult:
    best: dict[str, str]
    expected_utility: dict[tuple[str, ...], float]

    @property
    def best_value(self) -> float:
        return self.expected_utility[tuple(self.best[k] for k in self.best)]


def meu_solve(diagram: InfluenceDiagram) -> MeuResult:
    """Expected utility of every joint decision and the maximizing one.

    Ties go to the joint decision that comes first in alternative order.
    """
    eus: dict[tuple[str, ...], float] = {}
    best_key, best_val = None, -math.inf
    for d in diagram.joint_decisions():
        eu = 0.0
        for config, p in diagram.chance_distribution(d):
            if p:
                eu += p * diagram.utilities[diagram.outcome(d, config)]
        key = tuple(dec.alternatives[s] for dec, s in zip(diagram.decisions, d))
        eus[key] = eu
        if eu > best_val:
            best_key, best_val = key, eu
    best = {dec.name: alt for dec, alt in zip(diagram.decisions, best_key)}
    return MeuResult(best, eus)


@dataclass(frozen=True)
class Leaf:
    utility: float


@dataclass(frozen=True)
class ChanceNode:
    name: str
    branches: tuple[tuple[str, float, "TreeNode"], ...]


@dataclass(frozen=True)
class DecisionNode:
    name: str
    branches: tuple[tuple[str, "TreeNode"], ...]


TreeNode = Union[Leaf, ChanceNode, DecisionNode]


def rollback(tree: TreeNode, tol: float = 1e-12) -> tuple[dict[tuple[str, ...], str], float]:
    """Average out chance nodes and fold back decisions by maximum value.

    Returns a policy keyed by the path of branch labels leading to each
    decision node on the optimal plan, and the value at the root.
    """
    policy: dict[tuple[str, ...], str] = {}

    def visit(node, path, record):
        if isinstance(node, Leaf):
            return float(node.utility)
        if isinstance(node, ChanceNode):
            if not node.branches:
                raise MalformedTreeError(f"chance node {node.name!r} has no branches")
            probs = [p for _, p, _ in node.branches]
            if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > tol:
                raise MalformedTreeError(f"branch probabilities at {node.name!r} must sum to 1")
            return sum(p * visit(child, path + (label,), record and p > 0)
                       for label, p, child in node.branches)
        if isinstance(node, DecisionNode):
            if not node.branches:
                raise MalformedTreeError(f"decision node {node.name!r} has no branches")
            # evaluate every branch without recording, then record only the chosen one
            values = [visit(child, path + (label,), False) for label, child in node.branches]
            k = int(np.argmax(values))
            if record:
                policy[path] = node.branches[k][0]
                visit(node.branches[k][1], path + (node.branches[k][0],), True)
            return values[k]
        raise MalformedTreeError(f"unknown tree node {node!r}")

    value = visit(tree, (), True)
    return policy, value


def unroll(diagram: InfluenceDiagram) -> DecisionNode:
    """Equivalent decision tree: decisions in order, then one chance node."""

    def build(level: int, chosen: tuple[int, ...]) -> TreeNode:
        if level == len(diagram.decisions):
            dist = diagram.chance_distribution(chosen)
            if not diagram.chance_parents:
                return Leaf(diagram.utilities[diagram.outcome(chosen, {})])
            branches = []
            for config, p in dist:
                label = ",".join(
                    f"{diagram.net.variables[i].name}={diagram.net.variables[i].states[s]}"
                    for i, s in sorted(config.items())
                )
                branches.append((label, p, Leaf(diagram.utilities[diagram.outcome(chosen, config)])))
            return ChanceNode("|".join(diagram.net.variables[i].name for i in diagram.chance_parents),
                              tuple(branches))
        dec = diagram.decisions[level]
        return DecisionNode(dec.name, tuple(
            (alt, build(level + 1, chosen + (k,))) for k, alt in enumerate(dec.alternatives)
        ))

    return build(0, ())


def log_score(reported: Sequence[float], observed: int) -> float:
    """Log scoring rule: natural log of the probability reported for what happened.

    A zero report at the observed state scores ``-inf``.
    """
    q = np.asarray(reported, dtype=float)
    if q.ndim != 1 or not 0 <= observed < q.size:
        raise DagBayesError("observed state out of range for the reported distribution")
    if np.any(q < 0) or abs(q.sum() - 1.0) > 1e-9:
        raise DagBayesError("reported distribution must be normalized and nonnegative")
    if q[observed] == 0:
        return -math.inf
    return math.log(q[observed])


def expected_log_score(truth: Sequence[float], reported: Sequence[float]) -> float:
    """Expectation of :func:`log_score` when outcomes follow ``truth``."""
    total = 0.0
    for k, p in enumerate(truth):
        if p > 0:
            total += p * log_score(reported, k)
    return total
