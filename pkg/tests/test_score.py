import itertools
import math
from collections import defaultdict

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagbayes.core import DagBayesError, DagStructure, Dataset, DiscreteBayesNet, equivalence_signature
from dagbayes.score import (
    FamilyScorer,
    bde_hyperparams,
    cf_from_lr,
    family_hyperparams,
    network_log_ml,
    network_log_ml_interventional,
    odds_to_probability,
    odds_update,
    prequential_log_ml,
    structure_posterior,
)
from dagbayes.search import enumerate_structures

from netgen import make_variables, random_net, random_parents, sample, urn_log_ml


def _two_xy_cases(xy_vars):
    return Dataset(xy_vars, [[0, 0], [0, 0]])


class TestTwoCaseExample:
    def test_arc_scores(self, xy_vars):
        data = _two_xy_cases(xy_vars)
        fwd = DagStructure.from_edges(xy_vars, [(0, 1)])
        back = DagStructure.from_edges(xy_vars, [(1, 0)])
        empty = DagStructure.empty(xy_vars)
        assert network_log_ml(fwd, data, None, 4) == pytest.approx(math.log(0.1), abs=1e-12)
        assert network_log_ml(back, data, None, 4) == pytest.approx(math.log(0.1), abs=1e-12)
        assert network_log_ml(empty, data, None, 4) == pytest.approx(math.log(0.09), abs=1e-12)

    def test_posterior(self, xy_vars):
        data = _two_xy_cases(xy_vars)
        cands = [DagStructure.empty(xy_vars), DagStructure.from_edges(xy_vars, [(0, 1)])]
        post = structure_posterior(cands, None, data, None, 4)
        assert post == pytest.approx([0.09 / 0.19, 0.1 / 0.19], abs=1e-12)
        assert post.round(4).tolist() == [0.4737, 0.5263]

    def test_bad_priors(self, xy_vars):
        data = _two_xy_cases(xy_vars)
        cands = [DagStructure.empty(xy_vars)]
        with pytest.raises(DagBayesError):
            structure_posterior([], None, data, None, 4)
        with pytest.raises(DagBayesError):
            structure_posterior(cands, [float("-inf")], data, None, 4)


class TestHyperparams:
    def test_uniform_prior_cells(self, xy_vars):
        s = DagStructure.from_edges(xy_vars, [(0, 1)])
        prior = bde_hyperparams(s, None, 4)
        assert np.allclose(prior.alphas[0], [[2, 2]])
        assert np.allclose(prior.alphas[1], np.ones((2, 2)))

    def test_four_states_ess_one(self):
        vs = make_variables([4])
        assert np.allclose(family_hyperparams(vs, 0, (), None, 1.0), 0.25)

    def test_skewed_prior_net(self, xy_vars):
        net = DiscreteBayesNet.from_tables(
            xy_vars, {"X": ((), [[0.9, 0.1]]), "Y": ((), [[0.5, 0.5]])}
        )
        alpha = family_hyperparams(xy_vars, 0, (), net, 10.0)
        assert alpha[0, 0] == pytest.approx(9.0)
        assert alpha.sum() == pytest.approx(10.0)

    def test_alphas_sum_to_ess(self):
        rng = np.random.default_rng(2)
        net = random_net(rng, 4, max_card=3)
        s = DagStructure(net.variables, random_parents(rng, 4))
        prior = bde_hyperparams(s, net, 7.5)
        for a in prior.alphas:
            assert a.sum() == pytest.approx(7.5)

    def test_nonpositive_ess(self, xy_vars):
        with pytest.raises(DagBayesError):
            bde_hyperparams(DagStructure.empty(xy_vars), None, 0)

    def test_zero_probability_prior_rejected(self, xy_vars):
        net = DiscreteBayesNet.from_tables(
            xy_vars, {"X": ((), [[1.0, 0.0]]), "Y": ((), [[0.5, 0.5]])}
        )
        with pytest.raises(DagBayesError):
            bde_hyperparams(DagStructure.empty(xy_vars), net, 1)


class TestInterventional:
    def test_all_forced_scores_zero(self):
        rng = np.random.default_rng(4)
        vs = make_variables([2, 3, 2])
        data = Dataset(vs, np.column_stack([rng.integers(c, size=20) for c in (2, 3, 2)]),
                       np.ones((20, 3), bool))
        for s in enumerate_structures(vs):
            assert network_log_ml_interventional(s, data, None, 3) == 0.0

    def test_single_forced_cause(self, xy_vars):
        s = DagStructure.from_edges(xy_vars, [(0, 1)])
        data = Dataset(xy_vars, [[0, 0]], [[True, False]])
        # only Y contributes: a = 1 per cell in row x, so p(y | x) = 1/2
        assert network_log_ml_interventional(s, data, None, 4) == pytest.approx(math.log(0.5), abs=1e-15)

    @pytest.mark.parametrize("seed", range(10))
    def test_mixed_matches_urn_oracle(self, seed):
        rng = np.random.default_rng(seed)
        net = random_net(rng, 4, max_card=3)
        data = sample(net, rng, 30, forced_rate=0.25)
        s = DagStructure(net.variables, random_parents(rng, 4))
        got = network_log_ml_interventional(s, data, None, 2.5)
        assert abs(got - urn_log_ml(s, data, 2.5)) < 1e-10


class TestScoreEquivalence:
    def test_reversal_with_prior_net(self):
        rng = np.random.default_rng(8)
        net = random_net(rng, 3, max_card=3)
        data = sample(net, rng, 60)
        vs = net.variables
        a = DagStructure.from_edges(vs, [(0, 1), (1, 2)])
        b = DagStructure.from_edges(vs, [(2, 1), (1, 0)])
        assert equivalence_signature(a) == equivalence_signature(b)
        assert network_log_ml(a, data, net, 6.0) == pytest.approx(network_log_ml(b, data, net, 6.0), rel=1e-10)

    def test_three_variable_classes(self):
        rng = np.random.default_rng(9)
        vs = make_variables([2, 3, 2])
        net = random_net(rng, 3, variables=vs)
        data = sample(net, rng, 40)
        groups = defaultdict(list)
        for s in enumerate_structures(vs):
            groups[equivalence_signature(s)].append(network_log_ml(s, data, None, 3.0))
        assert len(groups) == 11
        for scores in groups.values():
            assert np.allclose(scores, scores[0], rtol=1e-10, atol=0)

    def test_collider_differs(self):
        rng = np.random.default_rng(10)
        vs = make_variables([2, 2, 2])
        net = random_net(rng, 3, variables=vs)
        data = sample(net, rng, 80)
        collider = DagStructure.from_edges(vs, [(0, 2), (1, 2)])
        chain = DagStructure.from_edges(vs, [(0, 2), (2, 1)])
        assert network_log_ml(collider, data, None, 1) != pytest.approx(network_log_ml(chain, data, None, 1))


class TestDecomposition:
    def test_modularity(self):
        """A family's term depends only on its parent set, not the rest of the graph."""
        rng = np.random.default_rng(12)
        net = random_net(rng, 4, max_card=3)
        data = sample(net, rng, 50)
        vs = net.variables
        a = DagStructure.from_edges(vs, [(0, 1), (2, 3)])
        b = DagStructure.from_edges(vs, [(0, 1), (3, 2)])
        pa = bde_hyperparams(a, None, 2)
        pb = bde_hyperparams(b, None, 2)
        assert np.array_equal(pa.alphas[1], pb.alphas[1])
        scorer = FamilyScorer(data, None, 2)
        assert scorer.log_ml(a) == pytest.approx(network_log_ml(a, data, None, 2), abs=1e-10)

    def test_more_data_lowers_likelihood(self):
        rng = np.random.default_rng(13)
        net = random_net(rng, 3, max_card=2)
        data = sample(net, rng, 40)
        s = net.structure
        prev = 0.0
        for n in range(1, 41):
            cur = network_log_ml(s, Dataset(data.variables, data.cases[:n]), None, 1)
            assert cur < prev
            prev = cur

    @pytest.mark.parametrize("seed", range(10))
    def test_prequential_equals_closed_form(self, seed):
        rng = np.random.default_rng(100 + seed)
        net = random_net(rng, 4, max_card=3)
        data = sample(net, rng, 25, forced_rate=0.1)
        s = DagStructure(net.variables, random_parents(rng, 4))
        closed = network_log_ml(s, data, net, 3.0)
        seq = prequential_log_ml(s, data.permuted(rng.permutation(25)), net, 3.0)
        assert abs(closed - seq) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_order_invariance(seed):
    rng = np.random.default_rng(seed)
    net = random_net(rng, 3, max_card=3)
    data = sample(net, rng, 12)
    s = net.structure
    a = prequential_log_ml(s, data, None, 2.0)
    b = prequential_log_ml(s, data.permuted(rng.permutation(12)), None, 2.0)
    assert abs(a - b) < 1e-10


class TestOddsAndCf:
    def test_values(self):
        assert cf_from_lr(1) == 0.0
        assert cf_from_lr(0) == -1.0
        assert cf_from_lr(4) == 0.6
        assert cf_from_lr(math.inf) == 1.0
        assert odds_to_probability(odds_update(1.0, 4.0)) == 0.8

    def test_monotone(self):
        lams = np.linspace(0, 50, 500)
        cfs = [cf_from_lr(x) for x in lams]
        assert all(b > a for a, b in itertools.pairwise(cfs))

    def test_errors(self):
        with pytest.raises(DagBayesError):
            cf_from_lr(-1)
        with pytest.raises(DagBayesError):
            odds_update(0, 2)
