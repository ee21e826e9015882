import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagbayes.conjugate import (
    Beta,
    DimensionMismatchError,
    DirichletParams,
    NonPositiveSampleSizeError,
    elicit_imagined_data,
    log_marginal_likelihood,
    predictive,
    update,
)
from dagbayes.core import DagBayesError


def test_update_beta():
    assert update(Beta(1, 1), [3, 2]) == Beta(4, 3)


def test_update_zero_counts_identity():
    prior = DirichletParams([0.5, 2.0, 3.0])
    assert update(prior, [0, 0, 0]) == prior


def test_update_dirichlet():
    assert update(DirichletParams([1, 1, 1]), [0, 0, 5]) == DirichletParams([1, 1, 6])


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        update(Beta(1, 1), [1, 2, 3])
    with pytest.raises(DimensionMismatchError):
        predictive(Beta(1, 1), [1])


@pytest.mark.parametrize("prior,counts,expected", [
    (Beta(1, 1), [0, 0], [0.5, 0.5]),
    (Beta(1, 1), [3, 2], [4 / 7, 3 / 7]),
    (Beta(2, 1), [0, 0], [2 / 3, 1 / 3]),
])
def test_predictive(prior, counts, expected):
    assert np.allclose(predictive(prior, counts), expected, rtol=0, atol=1e-15)


@pytest.mark.parametrize("counts,expected", [
    ([0, 0], 0.0),
    ([1, 0], math.log(1 / 2)),
    ([2, 0], math.log(1 / 3)),
])
def test_log_marginal_likelihood(counts, expected):
    assert log_marginal_likelihood(Beta(1, 1), counts) == pytest.approx(expected, abs=1e-12)


def test_zero_counts_any_prior():
    assert log_marginal_likelihood(DirichletParams([0.3, 7.0, 2.5]), [0, 0, 0]) == 0.0


def test_improper_prior_rejected():
    with pytest.raises(DagBayesError):
        Beta(0, 0)


@settings(max_examples=200, deadline=None)
@given(
    alphas=st.lists(st.floats(0.05, 20.0), min_size=2, max_size=4),
    data=st.data(),
)
def test_log_ml_equals_sequential_predictive_product(alphas, data):
    prior = DirichletParams(alphas)
    k = len(alphas)
    seq = data.draw(st.lists(st.integers(0, k - 1), max_size=25))
    counts = np.zeros(k)
    log_prod = 0.0
    for x in seq:
        log_prod += math.log(predictive(prior, counts)[x])
        counts[x] += 1
    closed = log_marginal_likelihood(prior, counts)
    assert math.exp(closed) == pytest.approx(math.exp(log_prod), rel=1e-12, abs=0)


@settings(max_examples=100, deadline=None)
@given(alphas=st.lists(st.floats(0.05, 20.0), min_size=2, max_size=4), data=st.data())
def test_update_then_predict_equals_combined(alphas, data):
    prior = DirichletParams(alphas)
    k = len(alphas)
    a = data.draw(st.lists(st.integers(0, 30), min_size=k, max_size=k))
    b = data.draw(st.lists(st.integers(0, 30), min_size=k, max_size=k))
    combined = np.add(a, b)
    assert np.allclose(predictive(update(prior, a), b), predictive(prior, combined), atol=1e-14)
    p = predictive(prior, combined)
    assert np.all((p > 0) & (p < 1))
    assert p.sum() == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("p1,p2,expected", [
    (0.5, 0.6, (2.0, 2.0)),
    (2 / 3, 3 / 4, (2.0, 1.0)),
])
def test_elicit_imagined_data(p1, p2, expected):
    got = elicit_imagined_data(p1, p2)
    assert np.allclose(got.alphas, expected, atol=1e-12)


@pytest.mark.parametrize("p1,p2", [(0.5, 0.5), (0.5, 0.4)])
def test_elicit_no_learning_is_an_error(p1, p2):
    with pytest.raises(NonPositiveSampleSizeError):
        elicit_imagined_data(p1, p2)


@given(st.floats(0.01, 0.98), st.floats(0.001, 0.999))
def test_elicit_round_trip(p1, frac):
    p2 = p1 + frac * (1 - p1)
    if not p1 < p2 < 1:
        return
    prior = elicit_imagined_data(p1, p2)
    assert predictive(prior, [0, 0])[0] == pytest.approx(p1, abs=1e-12)
    assert predictive(prior, [1, 0])[0] == pytest.approx(p2, abs=1e-12)
