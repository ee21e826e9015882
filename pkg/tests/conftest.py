import numpy as np
import pytest

from dagbayes.core import DiscreteBayesNet, Variable

X = Variable("X", ("x", "not_x"))
Y = Variable("Y", ("y", "not_y"))


@pytest.fixture
def chain_net():
    """X -> Y with p(x)=0.5, p(y|x)=0.9, p(y|not x)=0.1."""
    return DiscreteBayesNet.from_tables(
        (X, Y),
        {"X": ((), [[0.5, 0.5]]), "Y": (("X",), [[0.9, 0.1], [0.1, 0.9]])},
    )


@pytest.fixture
def xy_vars():
    return (X, Y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
