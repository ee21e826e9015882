"""Command-line entry point.

Exit codes: 0 success, 1 domain error (bad file, impossible evidence, ...),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .core import (
    DagBayesError,
    DagStructure,
    Dataset,
    config_states,
    tally_sufficient_stats,
    validate_structure,
    variable_index,
)
from .decide import meu_solve
from .depnet import depnet_from_bn, gibbs_sample, learn_depnet
from .formats import (
    load_sewell_shah,
    parse_case_file,
    parse_counts_file,
    parse_diagram_file,
    parse_network_file,
)
from .infer import Query, query_enumeration, query_eliminate
from .repro import DEFAULT_SWEEP, run_sewell_shah
from .score import bde_hyperparams, family_log_ml
from .search import StructureConstraints, exhaustive_search, greedy_search


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _csv(rows) -> str:
    out = io.StringIO()
    csv.writer(out, lineterminator="\n").writerows(rows)
    return out.getvalue()


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _names(value: str | None) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()] if value else []


def _load_data(args) -> Dataset:
    prior_domain = None
    if getattr(args, "prior_net", None) not in (None, "uniform"):
        prior_domain = parse_network_file(args.prior_net).variables
    if args.data:
        return parse_case_file(args.data, prior_domain)
    if args.counts:
        return parse_counts_file(args.counts)[1]
    return load_sewell_shah()[1]


def _load_prior(args, data: Dataset):
    if args.prior_net in (None, "uniform"):
        return None
    net = parse_network_file(args.prior_net)
    if tuple(net.variables) != tuple(data.variables):
        raise DagBayesError("prior network domain does not match the data")
    return net


def parse_edges(variables, spec: str | None) -> DagStructure:
    """``"A->B,B->C"`` into a structure over ``variables``."""
    edges = []
    for item in _names(spec):
        if "->" not in item:
            raise DagBayesError(f"edge {item!r} must look like PARENT->CHILD")
        a, b = (x.strip() for x in item.split("->", 1))
        edges.append((a, b))
    return DagStructure.from_named_edges(variables, edges)


def _add_data_args(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", help="case file (CSV)")
    src.add_argument("--counts", help="counts file")
    src.add_argument("--sewell-shah", action="store_true",
                     help="bundled college-plans counts (default when no data is given)")
    p.add_argument("--ess", type=float, default=5.0, help="equivalent sample size")
    p.add_argument("--prior-net", default="uniform", help="network file or 'uniform'")


def cmd_score(args) -> int:
    data = _load_data(args)
    prior = _load_prior(args, data)
    if args.network:
        structure = parse_network_file(args.network).structure
        if tuple(structure.variables) != tuple(data.variables):
            raise DagBayesError("network domain does not match the data")
    else:
        structure = parse_edges(data.variables, args.structure)
    problems = validate_structure(structure)
    if problems:
        raise DagBayesError("; ".join(str(p) for p in problems))
    bde = bde_hyperparams(structure, prior, args.ess)
    stats = tally_sufficient_stats(structure, data)
    rows = [["family", "parents", "log_ml"]]
    total = 0.0
    for i, v in enumerate(structure.variables):
        f = family_log_ml(stats.counts[i], bde.alphas[i])
        total += f
        rows.append([v.name, " ".join(structure.variables[p].name for p in structure.parents[i]), _fmt(f)])
    rows.append(["TOTAL", structure.describe(), _fmt(total)])
    _emit(_csv(rows), args.out)
    return 0


def cmd_search(args) -> int:
    data = _load_data(args)
    prior = _load_prior(args, data)
    constraints = StructureConstraints.from_names(
        data.variables, _names(args.no_parents), _names(args.no_children), args.max_parents)
    if args.mode == "exhaustive":
        report = exhaustive_search(data, prior, args.ess, constraints, k=args.top_k, cap=args.cap)
        posts = report.posteriors
    else:
        report = greedy_search(data, prior, args.ess, constraints, seed=args.seed,
                               restarts=args.restarts, k=args.top_k)
        posts = [None] * len(report.ranked)
    rows = [["rank", "log_ml", "log_prior", "posterior", "edges"]]
    for r, (s, p) in enumerate(zip(report.ranked, posts), start=1):
        rows.append([r, _fmt(s.log_ml), _fmt(s.log_prior), "" if p is None else _fmt(p),
                     s.structure.describe()])
    _emit(_csv(rows), args.out)
    print(f"# {report.candidates} candidates in {report.wall_time:.2f}s", file=sys.stderr)
    return 0


def _parse_evidence(net, items):
    evidence = {}
    for item in items or []:
        if "=" not in item:
            raise DagBayesError(f"evidence {item!r} must look like VAR=state")
        name, label = (x.strip() for x in item.split("=", 1))
        i = variable_index(net.variables, name)
        evidence[i] = net.variables[i].index(label)
    return evidence


def cmd_infer(args) -> int:
    net = parse_network_file(args.network)
    targets = [variable_index(net.variables, t) for t in _names(",".join(args.target))]
    if not targets:
        raise DagBayesError("need at least one --target")
    query = Query(tuple(targets), _parse_evidence(net, args.evidence))
    post = (query_enumeration if args.method == "enumeration" else query_eliminate)(net, query)
    rows = [[net.variables[t].name for t in targets] + ["probability"]]
    for states, p in post.rows():
        rows.append([net.variables[t].states[s] for t, s in zip(targets, states)] + [_fmt(p)])
    _emit(_csv(rows), args.out)
    return 0


def cmd_meu(args) -> int:
    diagram = parse_diagram_file(args.diagram)
    result = meu_solve(diagram)
    names = [d.name for d in diagram.decisions]
    rows = [names + ["expected_utility", "best"]]
    best = tuple(result.best[n] for n in names)
    for key, eu in result.expected_utility.items():
        rows.append(list(key) + [_fmt(eu), "*" if key == best else ""])
    _emit(_csv(rows), args.out)
    return 0


def cmd_gibbs(args) -> int:
    if args.network:
        dn = depnet_from_bn(parse_network_file(args.network))
    elif args.data:
        dn = learn_depnet(parse_case_file(args.data), args.pseudocount)
    else:
        raise DagBayesError("give --network or --data")
    res = gibbs_sample(dn, args.sweeps, args.burn_in, args.seed, args.order)
    rows = [[v.name for v in dn.variables] + ["probability"]]
    for idx, p in enumerate(res.joint.reshape(-1)):
        states = config_states(res.joint.shape, idx)
        rows.append([v.states[s] for v, s in zip(dn.variables, states)] + [_fmt(p)])
    _emit(_csv(rows), args.out)
    return 0


def cmd_data_validate(args) -> int:
    variables = parse_network_file(args.network).variables if args.network else None
    data = parse_case_file(args.path, variables)
    forced = int(data.forced.sum())
    print(f"ok: {len(data)} cases, {len(data.variables)} variables, {forced} forced cells")
    return 0


def cmd_repro(args) -> int:
    sweep = [float(x) for x in _names(args.sweep)] if args.sweep else list(DEFAULT_SWEEP)
    report = run_sewell_shah(args.ess, args.top_k, sweep)
    text = json.dumps(report, indent=2) + "\n"
    rows = [["rank", "log_ml", "posterior", "edges"]]
    for t in report["top"]:
        rows.append([t["rank"], _fmt(t["log_ml"]), _fmt(t["posterior"]), " ".join(t["edges"])])
    rows.append([])
    rows.append(["ess", "same_top2", "top1_log_ml", "top2_log_ml"])
    for r in report["ess_sweep"]:
        rows.append([r["ess"], r["same_top2_as_reference"]] + [_fmt(x) for x in r["log_ml"]])
    rows.append([])
    rows.append(["check", "passed"])
    for name, ok in report["checks"].items():
        rows.append([name, ok])
    table = _csv(rows)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sewell_shah_report.json").write_text(text)
        (out / "sewell_shah_report.csv").write_text(table)
    sys.stdout.write(table)
    return 0 if all(report["checks"].values()) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dagbayes", description="Score, search, query and sample discrete Bayesian networks.",
        epilog="exit codes: 0 success, 1 domain error, 2 usage error")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="log marginal likelihood of one structure")
    _add_data_args(p)
    p.add_argument("--structure", help="edges, e.g. 'SES->IQ,IQ->CP'")
    p.add_argument("--network", help="take the structure from a network file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("search", help="rank structures by posterior")
    _add_data_args(p)
    p.add_argument("--no-parents", help="comma-separated variables that may not have parents")
    p.add_argument("--no-children", help="comma-separated variables that may not have children")
    p.add_argument("--max-parents", type=int)
    p.add_argument("--top-k", type=int, default=5)
    p.add_argument("--mode", choices=("exhaustive", "greedy"), default="exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("--out")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("infer", help="posterior of target variables given evidence")
    p.add_argument("--network", required=True)
    p.add_argument("--target", action="append", required=True)
    p.add_argument("--evidence", action="append", help="VAR=state, repeatable")
    p.add_argument("--method", choices=("elimination", "enumeration"), default="elimination")
    p.add_argument("--out")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("meu", help="solve an influence diagram")
    p.add_argument("--diagram", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_meu)

    p = sub.add_parser("gibbs", help="Gibbs-sample a dependency network")
    p.add_argument("--network", help="derive a consistent dependency network from this net")
    p.add_argument("--data", help="learn a dependency network from cases")
    p.add_argument("--pseudocount", type=float, default=1.0)
    p.add_argument("--sweeps", type=int, default=100000)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", choices=("fixed", "random"), default="fixed")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gibbs)

    p = sub.add_parser("data", help="data utilities")
    dsub = p.add_subparsers(dest="data_command", required=True)
    v = dsub.add_parser("validate", help="check a case file")
    v.add_argument("path")
    v.add_argument("--network", help="validate states against this network's domain")
    v.set_defaults(func=cmd_data_validate)

    p = sub.add_parser("repro", help="reproduction runs")
    rsub = p.add_subparsers(dest="repro_command", required=True)
    r = rsub.add_parser("sewell-shah", help="constrained structure search on the college-plans data")
    r.add_argument("--ess", type=float, default=5.0)
    r.add_argument("--top-k", type=int, default=2)
    r.add_argument("--sweep", help="comma-separated ESS values (default 3,5,10,20,40)")
    r.add_argument("--out", help="directory for the JSON and CSV reports")
    r.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DagBayesError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
