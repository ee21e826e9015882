"""Discrete variables, DAG structures, CPTs, datasets and sufficient statistics.

Parent configurations are indexed mixed-radix with the *last* listed parent
varying fastest. Every table in the package (CPT rows, count matrices,
Dirichlet hyperparameters) uses this convention.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np


class DagBayesError(Exception):
    """Base class for domain errors raised by this package."""


class DomainMismatchError(DagBayesError):
    pass


@dataclass(frozen=True)
class Variable:
    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) < 2:
            raise DagBayesError(f"variable {self.name!r} needs at least 2 states")
        if len(set(self.states)) != len(self.states):
            raise DagBayesError(f"variable {self.name!r} has duplicate state labels")

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise DagBayesError(
                f"unknown state {label!r} for variable {self.name!r}"
            ) from None


def check_domain(variables: Sequence[Variable]) -> tuple[Variable, ...]:
    variables = tuple(variables)
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise DagBayesError("variable names must be unique within a domain")
    return variables


def variable_index(variables: Sequence[Variable], name: str) -> int:
    for i, v in enumerate(variables):
        if v.name == name:
            return i
    raise DagBayesError(f"unknown variable {name!r}")


@dataclass(frozen=True)
class DagStructure:
    """Variables plus one ordered parent tuple per variable.

    Acyclicity is not enforced here; use :func:`topological_order` or
    :func:`validate_structure`.
    """

    variables: tuple[Variable, ...]
    parents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", check_domain(self.variables))
        object.__setattr__(self, "parents", tuple(tuple(p) for p in self.parents))
        if len(self.parents) != len(self.variables):
            raise DagBayesError("need exactly one parent set per variable")

    @classmethod
    def empty(cls, variables: Sequence[Variable]) -> "DagStructure":
        return cls(tuple(variables), tuple(() for _ in variables))

    @classmethod
    def from_edges(cls, variables: Sequence[Variable], edges: Iterable[tuple[int, int]]):
        parents: list[list[int]] = [[] for _ in variables]
        for p, c in edges:
            parents[c].append(p)
        return cls(tuple(variables), tuple(tuple(sorted(ps)) for ps in parents))

    @classmethod
    def from_named_edges(cls, variables: Sequence[Variable], edges: Iterable[tuple[str, str]]):
        return cls.from_edges(
            variables,
            [(variable_index(variables, a), variable_index(variables, b)) for a, b in edges],
        )

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    def edges(self) -> list[tuple[int, int]]:
        """Sorted (parent, child) pairs; also the tie-break key for rankings."""
        return sorted((p, c) for c, ps in enumerate(self.parents) for p in ps)

    def named_edges(self) -> list[tuple[str, str]]:
        return [(self.variables[p].name, self.variables[c].name) for p, c in self.edges()]

    def has_edge(self, parent: int, child: int) -> bool:
        return parent in self.parents[child]

    def children(self, i: int) -> list[int]:
        return [c for c, ps in enumerate(self.parents) if i in ps]

    def canonical(self) -> "DagStructure":
        return DagStructure(self.variables, tuple(tuple(sorted(p)) for p in self.parents))

    def describe(self) -> str:
        edges = self.named_edges()
        return ", ".join(f"{a}->{b}" for a, b in edges) if edges else "(no arcs)"


def topological_order(parents: Sequence[Sequence[int]]) -> list[int] | None:
    """Kahn's algorithm; returns None when the graph has a cycle."""
    order = _kahn(parents)
    return order if len(order) == len(parents) else None


def is_acyclic(parents: Sequence[Sequence[int]]) -> bool:
    return topological_order(parents) is not None


def parent_config_index(cardinalities: Sequence[int], states: Sequence[int]) -> int:
    """Mixed-radix index of a parent configuration, last parent fastest.

    >>> parent_config_index((2, 4, 4, 2), (1, 0, 0, 0))
    32
    """
    if len(cardinalities) != len(states):
        raise DagBayesError("cardinalities and states differ in length")
    idx = 0
    for card, s in zip(cardinalities, states):
        if not 0 <= s < card:
            raise DagBayesError(f"state {s} out of range for cardinality {card}")
        idx = idx * card + s
    return idx


def config_states(cardinalities: Sequence[int], index: int) -> tuple[int, ...]:
    """Inverse of :func:`parent_config_index`."""
    out = []
    for card in reversed(cardinalities):
        index, s = divmod(index, card)
        out.append(s)
    return tuple(reversed(out))


def _radix_weights(cardinalities: Sequence[int]) -> np.ndarray:
    w = np.ones(len(cardinalities), dtype=np.int64)
    for k in range(len(cardinalities) - 2, -1, -1):
        w[k] = w[k + 1] * cardinalities[k + 1]
    return w


@dataclass(frozen=True)
class Cpt:
    child: int
    parent_order: tuple[int, ...]
    rows: np.ndarray  # shape (n_configs, child cardinality)

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise DagBayesError(f"CPT for variable {self.child} must be a 2-d table")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "parent_order", tuple(self.parent_order))

    def row(self, parent_cards: Sequence[int], parent_states: Sequence[int]) -> np.ndarray:
        return self.rows[parent_config_index(parent_cards, parent_states)]

    def as_factor_array(self, cards: Sequence[int]) -> np.ndarray:
        """Table reshaped to axes (*parents, child)."""
        shape = tuple(cards[p] for p in self.parent_order) + (cards[self.child],)
        return self.rows.reshape(shape)


@dataclass(frozen=True)
class DiscreteBayesNet:
    structure: DagStructure
    cpts: tuple[Cpt, ...]

    def __post_init__(self):
        object.__setattr__(self, "cpts", tuple(self.cpts))

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.structure.variables

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return self.structure.cardinalities

    @classmethod
    def from_tables(cls, variables: Sequence[Variable], tables: dict) -> "DiscreteBayesNet":
        """Build a net from ``{child_name: (parent_names, rows)}``."""
        variables = check_domain(variables)
        parents, cpts = [], []
        for i, v in enumerate(variables):
            pnames, rows = tables[v.name]
            pidx = tuple(variable_index(variables, p) for p in pnames)
            parents.append(pidx)
            cpts.append(Cpt(i, pidx, np.asarray(rows, dtype=float)))
        return cls(DagStructure(variables, tuple(parents)), tuple(cpts))


def uniform_network(variables: Sequence[Variable]) -> DiscreteBayesNet:
    """Empty-graph net whose joint is uniform."""
    variables = check_domain(variables)
    cpts = tuple(
        Cpt(i, (), np.full((1, v.cardinality), 1.0 / v.cardinality))
        for i, v in enumerate(variables)
    )
    return DiscreteBayesNet(DagStructure.empty(variables), cpts)


@dataclass(frozen=True)
class Violation:
    variable: str
    rule: str
    detail: str = ""

    def __str__(self):
        return f"{self.variable}: {self.rule}" + (f" ({self.detail})" if self.detail else "")


def validate_structure(structure: DagStructure) -> list[Violation]:
    out = []
    n = structure.n
    for i, ps in enumerate(structure.parents):
        name = structure.variables[i].name
        if len(set(ps)) != len(ps):
            out.append(Violation(name, "duplicate parent"))
        for p in ps:
            if not 0 <= p < n:
                out.append(Violation(name, "invalid parent index", str(p)))
            elif p == i:
                out.append(Violation(name, "self parent"))
    if not out and not is_acyclic(structure.parents):
        involved = _cycle_members(structure.parents)
        out.append(Violation(structure.variables[involved[0]].name, "acyclicity",
                             "cycle through " + ", ".join(structure.variables[k].name for k in involved)))
    return out


def _cycle_members(parents: Sequence[Sequence[int]]) -> list[int]:
    placed = set(_kahn(parents))
    return [i for i in range(len(parents)) if i not in placed]


def _kahn(parents: Sequence[Sequence[int]]) -> list[int]:
    n = len(parents)
    indeg = [len(set(p)) for p in parents]
    children: list[list[int]] = [[] for _ in range(n)]
    for c, ps in enumerate(parents):
        for p in set(ps):
            children[p].append(c)
    ready = [i for i in range(n) if indeg[i] == 0]
    order = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for c in children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return order


def validate_network(net: DiscreteBayesNet, tol: float = 1e-12) -> list[Violation]:
    """Check every invariant of a net; an empty list means well-formed."""
    structure = net.structure
    out = validate_structure(structure)
    if len(net.cpts) != structure.n:
        out.append(Violation("<net>", "cpt count", f"{len(net.cpts)} cpts for {structure.n} variables"))
        return out
    cards = structure.cardinalities
    for i, cpt in enumerate(net.cpts):
        name = structure.variables[i].name
        if cpt.child != i:
            out.append(Violation(name, "cpt child mismatch", f"cpt lists child {cpt.child}"))
            continue
        if set(cpt.parent_order) != set(structure.parents[i]) or len(cpt.parent_order) != len(structure.parents[i]):
            out.append(Violation(name, "parent mismatch"))
            continue
        if any(not 0 <= p < structure.n for p in cpt.parent_order):
            continue
        n_rows = int(np.prod([cards[p] for p in cpt.parent_order], dtype=np.int64))
        if cpt.rows.shape != (n_rows, cards[i]):
            out.append(Violation(name, "row count", f"expected shape {(n_rows, cards[i])}, got {cpt.rows.shape}"))
            continue
        if np.any(cpt.rows < 0) or np.any(cpt.rows > 1) or not np.all(np.isfinite(cpt.rows)):
            out.append(Violation(name, "entry out of range"))
        for j, total in enumerate(cpt.rows.sum(axis=1)):
            if abs(total - 1.0) > tol:
                out.append(Violation(name, "row not normalized", f"row {j} sums to {total:.12g}"))
    return out


def joint_probability(net: DiscreteBayesNet, assignment: Sequence[int]) -> float:
    """Product of the CPT entries selected by a full assignment."""
    if len(assignment) != net.structure.n:
        raise DagBayesError("assignment must give a state for every variable")
    cards = net.cardinalities
    p = 1.0
    for cpt in net.cpts:
        pstates = [assignment[q] for q in cpt.parent_order]
        pcards = [cards[q] for q in cpt.parent_order]
        k = assignment[cpt.child]
        if not 0 <= k < cards[cpt.child]:
            raise DagBayesError(f"state {k} out of range for {net.variables[cpt.child].name}")
        p *= float(cpt.rows[parent_config_index(pcards, pstates), k])
    return p


@dataclass(frozen=True)
class Dataset:
    """Complete discrete cases; ``forced[n, i]`` marks a value set by intervention."""

    variables: tuple[Variable, ...]
    cases: np.ndarray
    forced: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        variables = check_domain(self.variables)
        cases = np.asarray(self.cases, dtype=np.int64)
        if cases.size == 0:
            cases = cases.reshape(0, len(variables))
        if cases.ndim != 2 or cases.shape[1] != len(variables):
            raise DagBayesError("cases must be an (N, n_variables) array")
        if self.forced is None:
            forced = np.zeros(cases.shape, dtype=bool)
        else:
            forced = np.asarray(self.forced, dtype=bool)
            if forced.size == 0:
                forced = forced.reshape(cases.shape)
        if forced.shape != cases.shape:
            raise DagBayesError("forced mask must have the same shape as cases")
        for i, v in enumerate(variables):
            col = cases[:, i]
            if col.size and (col.min() < 0 or col.max() >= v.cardinality):
                raise DagBayesError(f"invalid state index in column {v.name!r}")
        cases.setflags(write=False)
        forced.setflags(write=False)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "cases", cases)
        object.__setattr__(self, "forced", forced)

    def __len__(self):
        return self.cases.shape[0]

    def permuted(self, order: Sequence[int]) -> "Dataset":
        order = np.asarray(order, dtype=np.int64)
        return Dataset(self.variables, self.cases[order], self.forced[order])

    def concat(self, other: "Dataset") -> "Dataset":
        if other.variables != self.variables:
            raise DomainMismatchError("datasets have different domains")
        return Dataset(self.variables, np.vstack([self.cases, other.cases]),
                       np.vstack([self.forced, other.forced]))


def family_counts(data: Dataset, child: int, parents: Sequence[int]) -> np.ndarray:
    """Counts N[j, k] for one family; forced child cells are skipped.

    Parents are not required to form a DAG with the rest of the model, so the
    same routine serves dependency networks.
    """
    cards = [v.cardinality for v in data.variables]
    r = cards[child]
    pcards = [cards[p] for p in parents]
    q = int(np.prod(pcards, dtype=np.int64)) if parents else 1
    keep = ~data.forced[:, child]
    rows = data.cases[keep]
    if parents:
        j = rows[:, list(parents)] @ _radix_weights(pcards)
    else:
        j = np.zeros(rows.shape[0], dtype=np.int64)
    flat = np.bincount(j * r + rows[:, child], minlength=q * r)
    return flat.reshape(q, r)


@dataclass(frozen=True)
class SufficientStats:
    structure: DagStructure
    counts: tuple[np.ndarray, ...]  # per variable, shape (q_i, r_i)

    def totals(self, i: int) -> np.ndarray:
        return self.counts[i].sum(axis=1)


def tally_sufficient_stats(structure: DagStructure, data: Dataset) -> SufficientStats:
    if tuple(structure.variables) != tuple(data.variables):
        raise DomainMismatchError("dataset variables do not match the structure's domain")
    counts = tuple(family_counts(data, i, ps) for i, ps in enumerate(structure.parents))
    return SufficientStats(structure, counts)


def equivalence_signature(structure: DagStructure) -> tuple[frozenset, frozenset]:
    """Skeleton plus unshielded colliders; equal signatures mean Markov-equivalent DAGs."""
    skeleton = frozenset(frozenset((p, c)) for p, c in structure.edges())
    colliders = set()
    for c, ps in enumerate(structure.parents):
        for a, b in combinations(sorted(ps), 2):
            if frozenset((a, b)) not in skeleton:
                colliders.add((a, c, b))
    return skeleton, frozenset(colliders)
