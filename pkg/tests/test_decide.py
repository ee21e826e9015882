import itertools
import math
import warnings

import numpy as np
import pytest

from dagbayes.core import DagBayesError, Variable
from dagbayes.decide import (
    ChanceNode,
    DecisionNode,
    DecisionVariable,
    InfluenceDiagram,
    Leaf,
    MalformedDiagramError,
    MalformedTreeError,
    UncertaintySpec,
    expected_log_score,
    log_score,
    meu_solve,
    rollback,
    unroll,
)

from party import UTILITY, party_diagram, party_tree, simplified_party_tree


class TestParty:
    def test_expected_utilities(self):
        res = meu_solve(party_diagram())
        assert res.expected_utility[("outdoors",)] == pytest.approx(0.7, abs=1e-15)
        assert res.expected_utility[("indoors",)] == pytest.approx(0.8, abs=1e-15)
        assert res.best == {"Location": "indoors"}
        assert res.best_value == pytest.approx(0.8)

    @pytest.mark.parametrize("tree", [party_tree, simplified_party_tree])
    def test_rollback(self, tree):
        policy, value = rollback(tree())
        assert policy == {(): "indoors"}
        assert value == pytest.approx(0.8, abs=1e-15)

    def test_unroll_agrees(self):
        d = party_diagram()
        policy, value = rollback(unroll(d))
        assert policy[()] == meu_solve(d).best["Location"]
        assert value == pytest.approx(meu_solve(d).best_value, abs=1e-14)

    def test_linear_transforms_keep_choice(self):
        rng = np.random.default_rng(0)
        d = party_diagram()
        for _ in range(20):
            a, b = rng.uniform(0.01, 10), rng.uniform(-5, 5)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = meu_solve(d.transformed(a, b))
            assert res.best == {"Location": "indoors"}
            assert res.expected_utility[("indoors",)] == pytest.approx(0.8 * a + b)

    def test_nonpositive_scale(self):
        with pytest.raises(DagBayesError):
            party_diagram().transformed(0, 1)

    def test_out_of_range_utility_warns(self):
        with pytest.warns(UserWarning):
            party_diagram({**UTILITY, "indoors_rain": 3.0})


def test_single_leaf_tree():
    assert rollback(Leaf(0.37)) == ({}, 0.37)


def test_single_alternative_decision():
    d = InfluenceDiagram(
        [DecisionVariable("Go", ("yes",))],
        [Variable("W", ("a", "b"))],
        [UncertaintySpec("W", (), ((0.25, 0.75),))],
        ("Go", "W"),
        ("ya", "yb"),
        {"ya": 1.0, "yb": 0.2},
    )
    res = meu_solve(d)
    assert res.best == {"Go": "yes"}
    assert res.best_value == pytest.approx(0.25 + 0.75 * 0.2)
    assert list(res.expected_utility) == [("yes",)]


def _two_decision_diagram(rng):
    # Buy test (T) and Treat (R); Disease D; test result S depends on D and T
    d_vars = [DecisionVariable("T", ("test", "skip")), DecisionVariable("R", ("treat", "wait"))]
    D = Variable("D", ("sick", "well"))
    S = Variable("S", ("pos", "neg"))
    pd = rng.dirichlet([1, 1])
    s_rows = [rng.dirichlet([1, 1]) for _ in range(4)]
    labels = [f"o{k}" for k in range(8)]
    utils = {lab: float(u) for lab, u in zip(labels, rng.random(8))}
    diagram = InfluenceDiagram(
        d_vars, [D, S],
        [UncertaintySpec("D", (), (tuple(pd),)),
         UncertaintySpec("S", ("T", "D"), tuple(tuple(r) for r in s_rows))],
        ("T", "R", "D"), labels, utils,
    )
    return diagram, pd, utils, labels


@pytest.mark.parametrize("seed", range(5))
def test_two_decisions_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    diagram, pd, utils, labels = _two_decision_diagram(rng)
    res = meu_solve(diagram)
    brute = {}
    for t, r in itertools.product(range(2), repeat=2):
        eu = sum(pd[d] * utils[labels[t * 4 + r * 2 + d]] for d in range(2))
        brute[(("test", "skip")[t], ("treat", "wait")[r])] = eu
    for key, eu in brute.items():
        assert res.expected_utility[key] == pytest.approx(eu, abs=1e-14)
    best = max(brute, key=brute.get)
    assert (res.best["T"], res.best["R"]) == best
    _, value = rollback(unroll(diagram))
    assert value == pytest.approx(brute[best], abs=1e-14)


class TestMalformed:
    def test_no_decisions(self):
        with pytest.raises(MalformedDiagramError):
            InfluenceDiagram([], [], [], (), ("x",), {"x": 0.5})

    def test_missing_cpt(self):
        with pytest.raises(MalformedDiagramError):
            InfluenceDiagram([DecisionVariable("A", ("a", "b"))], [Variable("W", ("s", "r"))], [],
                             ("A",), ("x", "y"), {"x": 0, "y": 1})

    def test_outcome_ignores_decision(self):
        with pytest.raises(MalformedDiagramError):
            InfluenceDiagram([DecisionVariable("A", ("a", "b"))], [Variable("W", ("s", "r"))],
                             [UncertaintySpec("W", (), ((0.5, 0.5),))],
                             ("W",), ("x", "y"), {"x": 0, "y": 1})

    def test_wrong_outcome_size(self):
        with pytest.raises(MalformedDiagramError):
            InfluenceDiagram([DecisionVariable("A", ("a", "b"))], [], [], ("A",), ("x",), {"x": 0})

    def test_unknown_utility(self):
        with pytest.raises(MalformedDiagramError):
            InfluenceDiagram([DecisionVariable("A", ("a", "b"))], [], [], ("A",), ("x", "y"), {"x": 0})

    def test_bad_cpt_row(self):
        with pytest.raises(MalformedDiagramError):
            InfluenceDiagram([DecisionVariable("A", ("a", "b"))], [Variable("W", ("s", "r"))],
                             [UncertaintySpec("W", (), ((0.6, 0.5),))],
                             ("A",), ("x", "y"), {"x": 0, "y": 1})

    def test_empty_decision(self):
        with pytest.raises(MalformedDiagramError):
            DecisionVariable("A", ())

    def test_bad_tree(self):
        with pytest.raises(MalformedTreeError):
            rollback(ChanceNode("c", (("a", 0.5, Leaf(1)), ("b", 0.4, Leaf(0)))))
        with pytest.raises(MalformedTreeError):
            rollback(DecisionNode("d", ()))


class TestLogScore:
    def test_values(self):
        assert log_score([0.25, 0.75], 1) == pytest.approx(math.log(0.75))
        assert log_score([1.0, 0.0], 0) == 0.0
        assert log_score([1.0, 0.0], 1) == -math.inf

    def test_errors(self):
        with pytest.raises(DagBayesError):
            log_score([0.5, 0.5], 2)
        with pytest.raises(DagBayesError):
            log_score([0.6, 0.6], 0)

    def test_propriety_binary(self):
        for p in np.linspace(0.05, 0.95, 19):
            truth = [p, 1 - p]
            best = expected_log_score(truth, truth)
            for q in np.linspace(0.01, 0.99, 99):
                if abs(q - p) > 1e-9:
                    assert expected_log_score(truth, [q, 1 - q]) < best
