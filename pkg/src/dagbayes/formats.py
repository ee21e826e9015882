"""Reading and writing network, case, counts and influence-diagram files.

Network file (JSON)::

    {"variables": [{"name": "X", "states": ["x0", "x1"]}, ...],
     "cpts": [{"child": "Y", "parents": ["X"], "rows": [[0.9, 0.1], ...]}, ...]}

Rows follow the parent order given in ``parents`` with the last parent
varying fastest.

Case file (CSV): a header of variable names, one row per case, state labels
in the cells. A leading ``!`` marks a value set by intervention.

Counts file: ``#`` comment lines, one header line per variable
(``NAME state state ...``), a ``---`` separator, then whitespace-separated
counts in mixed-radix order (last variable fastest).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import (
    Cpt,
    DagBayesError,
    DagStructure,
    Dataset,
    DiscreteBayesNet,
    Variable,
    check_domain,
    config_states,
    validate_network,
    variable_index,
)
from .decide import DecisionVariable, InfluenceDiagram, UncertaintySpec

FORCED_MARK = "!"


class FileFormatError(DagBayesError):
    """Malformed input file; ``row``/``column`` locate the problem when known."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.row = row
        self.column = column


# -- counts tables ---------------------------------------------------------

@dataclass(frozen=True)
class CountsTable:
    variables: tuple[Variable, ...]
    counts: np.ndarray  # flat, mixed-radix order

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count(self, states: Sequence[int]) -> int:
        cards = [v.cardinality for v in self.variables]
        idx = 0
        for c, s in zip(cards, states):
            idx = idx * c + s
        return int(self.counts[idx])

    def to_dataset(self) -> Dataset:
        """Expand into one case per counted observation, in table order."""
        cards = [v.cardinality for v in self.variables]
        configs = np.array([config_states(cards, i) for i in range(len(self.counts))],
                           dtype=np.int64).reshape(len(self.counts), len(cards))
        cases = np.repeat(configs, self.counts, axis=0)
        return Dataset(self.variables, cases)


def parse_counts_text(text: str) -> CountsTable:
    variables, body, in_body = [], [], False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "---":
            in_body = True
            continue
        if in_body:
            body.extend((lineno, tok) for tok in line.split())
        else:
            name, *states = line.split()
            try:
                variables.append(Variable(name, tuple(states)))
            except DagBayesError as e:
                raise FileFormatError(str(e), row=lineno) from None
    if not in_body:
        raise FileFormatError("missing '---' separator between header and counts")
    variables = check_domain(variables)
    expected = int(np.prod([v.cardinality for v in variables], dtype=np.int64))
    if len(body) != expected:
        raise FileFormatError(f"expected {expected} counts, found {len(body)}")
    counts = []
    for lineno, tok in body:
        try:
            c = int(tok)
        except ValueError:
            raise FileFormatError(f"count {tok!r} is not an integer", row=lineno) from None
        if c < 0:
            raise FileFormatError(f"negative count {c}", row=lineno)
        counts.append(c)
    return CountsTable(variables, np.asarray(counts, dtype=np.int64))


def parse_counts_file(path) -> tuple[CountsTable, Dataset]:
    table = parse_counts_text(Path(path).read_text())
    return table, table.to_dataset()


def serialize_counts(table: CountsTable, per_line: int | None = None) -> str:
    lines = [" ".join((v.name,) + v.states) for v in table.variables]
    lines.append("---")
    per_line = per_line or table.variables[-1].cardinality
    flat = [str(int(c)) for c in table.counts]
    for k in range(0, len(flat), per_line):
        lines.append(" ".join(flat[k:k + per_line]))
    return "\n".join(lines) + "\n"


def load_sewell_shah() -> tuple[CountsTable, Dataset]:
    """The bundled college-plans survey counts and their expanded cases."""
    text = resources.files("dagbayes").joinpath("data/sewell_shah.txt").read_text()
    table = parse_counts_text(text)
    return table, table.to_dataset()


# -- case files ------------------------------------------------------------

def parse_case_text(text: str, variables: Sequence[Variable] | None = None) -> Dataset:
    """Parse CSV cases; without ``variables``, states are taken in order of first appearance."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise FileFormatError("empty case file") from None
    if len(set(header)) != len(header):
        raise FileFormatError("duplicate column in header", row=1)
    if variables is not None:
        variables = tuple(variables)
        names = [v.name for v in variables]
        unknown = [h for h in header if h not in names]
        if unknown:
            raise FileFormatError(f"unknown variable {unknown[0]!r}", row=1, column=unknown[0])
        if set(header) != set(names):
            missing = sorted(set(names) - set(header))
            raise FileFormatError(f"missing column(s) {missing}", row=1)
    raw_rows = []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise FileFormatError(f"expected {len(header)} cells, found {len(row)}", row=rowno)
        cells = []
        for name, cell in zip(header, row):
            cell = cell.strip()
            forced = cell.startswith(FORCED_MARK)
            label = cell[1:] if forced else cell
            if not label or label.startswith(FORCED_MARK):
                raise FileFormatError(f"malformed cell {cell!r}", row=rowno, column=name)
            cells.append((label, forced))
        raw_rows.append((rowno, cells))
    if variables is None:
        seen = {h: [] for h in header}
        for _, cells in raw_rows:
            for h, (label, _) in zip(header, cells):
                if label not in seen[h]:
                    seen[h].append(label)
        for h, labels in seen.items():
            while len(labels) < 2:
                labels.append(f"_unseen{len(labels)}")
        domain = tuple(Variable(h, tuple(seen[h])) for h in header)
        column_of = list(range(len(header)))
    else:
        domain = variables
        column_of = [header.index(v.name) for v in variables]
    cases = np.zeros((len(raw_rows), len(domain)), dtype=np.int64)
    forced = np.zeros(cases.shape, dtype=bool)
    for r, (rowno, cells) in enumerate(raw_rows):
        for i, v in enumerate(domain):
            label, f = cells[column_of[i]]
            if label not in v.states:
                raise FileFormatError(f"unknown state {label!r}", row=rowno, column=v.name)
            cases[r, i] = v.states.index(label)
            forced[r, i] = f
    return Dataset(domain, cases, forced)


def parse_case_file(path, variables: Sequence[Variable] | None = None) -> Dataset:
    return parse_case_text(Path(path).read_text(), variables)


def serialize_cases(data: Dataset) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([v.name for v in data.variables])
    for case, forced in zip(data.cases, data.forced):
        writer.writerow([
            (FORCED_MARK if f else "") + v.states[int(s)]
            for v, s, f in zip(data.variables, case, forced)
        ])
    return out.getvalue()


# -- network files ---------------------------------------------------------

def _variables_from_json(items) -> tuple[Variable, ...]:
    try:
        return check_domain(Variable(str(v["name"]), tuple(str(s) for s in v["states"])) for v in items)
    except (KeyError, TypeError) as e:
        raise FileFormatError(f"malformed variable entry: {e}") from None


def network_from_dict(obj: dict) -> DiscreteBayesNet:
    variables = _variables_from_json(obj.get("variables", []))
    by_child = {}
    for entry in obj.get("cpts", []):
        child = entry.get("child")
        if child in by_child:
            raise FileFormatError(f"duplicate CPT for {child!r}")
        by_child[child] = entry
    parents, cpts = [], []
    for i, v in enumerate(variables):
        if v.name not in by_child:
            raise FileFormatError(f"no CPT for variable {v.name!r}")
        entry = by_child.pop(v.name)
        pidx = tuple(variable_index(variables, p) for p in entry.get("parents", []))
        rows = entry.get("rows")
        try:
            table = np.asarray(rows, dtype=float)
        except (TypeError, ValueError):
            raise FileFormatError(f"CPT rows for {v.name!r} are not a numeric table") from None
        if table.ndim != 2:
            raise FileFormatError(f"CPT rows for {v.name!r} must be a list of equal-length lists")
        parents.append(pidx)
        cpts.append(Cpt(i, pidx, table))
    if by_child:
        raise FileFormatError(f"CPT for unknown variable {sorted(by_child)[0]!r}")
    net = DiscreteBayesNet(DagStructure(variables, tuple(parents)), tuple(cpts))
    problems = validate_network(net, tol=1e-9)
    if problems:
        raise FileFormatError("; ".join(str(p) for p in problems))
    return net


def network_to_dict(net: DiscreteBayesNet) -> dict:
    return {
        "variables": [{"name": v.name, "states": list(v.states)} for v in net.variables],
        "cpts": [
            {
                "child": net.variables[c.child].name,
                "parents": [net.variables[p].name for p in c.parent_order],
                "rows": c.rows.tolist(),
            }
            for c in net.cpts
        ],
    }


def parse_network_text(text: str) -> DiscreteBayesNet:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"invalid JSON: {e}") from None
    return network_from_dict(obj)


def parse_network_file(path) -> DiscreteBayesNet:
    return parse_network_text(Path(path).read_text())


def serialize_network(net: DiscreteBayesNet) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


# -- influence diagrams ----------------------------------------------------

def diagram_from_dict(obj: dict) -> InfluenceDiagram:
    """``{"decisions", "uncertainties", "outcome", "utilities"}``.

    ``uncertainties`` uses the network-file syntax; its CPT parents may name
    decisions. ``outcome`` is ``{"parents": [...], "labels": [...]}`` with one
    label per parent configuration in mixed-radix order.
    """
    try:
        decisions = [DecisionVariable(d["name"], tuple(d["alternatives"])) for d in obj["decisions"]]
        unc = obj.get("uncertainties", {})
        variables = _variables_from_json(unc.get("variables", []))
        specs = [UncertaintySpec(c["child"], tuple(c.get("parents", [])),
                                 tuple(tuple(r) for r in c["rows"])) for c in unc.get("cpts", [])]
        outcome = obj["outcome"]
        return InfluenceDiagram(decisions, variables, specs, tuple(outcome["parents"]),
                                tuple(outcome["labels"]), dict(obj["utilities"]))
    except (KeyError, TypeError) as e:
        raise FileFormatError(f"malformed influence diagram: missing or invalid {e}") from None


def diagram_to_dict(diagram: InfluenceDiagram) -> dict:
    return {
        "decisions": [{"name": d.name, "alternatives": list(d.alternatives)} for d in diagram.decisions],
        "uncertainties": {
            "variables": [{"name": v.name, "states": list(v.states)} for v in diagram.uncertainties],
            "cpts": [{"child": s.child, "parents": list(s.parents), "rows": [list(r) for r in s.rows]}
                     for s in diagram.cpt_specs],
        },
        "outcome": {"parents": list(diagram.outcome_parents), "labels": list(diagram.outcome_labels)},
        "utilities": dict(diagram.utilities),
    }


def parse_diagram_file(path) -> InfluenceDiagram:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise FileFormatError(f"invalid JSON: {e}") from None
    return diagram_from_dict(obj)


def serialize_diagram(diagram: InfluenceDiagram) -> str:
    return json.dumps(diagram_to_dict(diagram), indent=2) + "\n"
