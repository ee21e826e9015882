"""The party problem: pick a location, then the weather happens."""

from dagbayes.core import Variable
from dagbayes.decide import ChanceNode, DecisionNode, DecisionVariable, InfluenceDiagram, Leaf, UncertaintySpec

P_SUN = 0.7
UTILITY = {"outdoors_sun": 1.0, "outdoors_rain": 0.0, "indoors_sun": 0.8, "indoors_rain": 0.8}


def party_diagram(utilities=UTILITY):
    return InfluenceDiagram(
        decisions=[DecisionVariable("Location", ("outdoors", "indoors"))],
        uncertainties=[Variable("Weather", ("sun", "rain"))],
        cpts=[UncertaintySpec("Weather", (), ((P_SUN, 1 - P_SUN),))],
        outcome_parents=("Location", "Weather"),
        outcome_labels=("outdoors_sun", "outdoors_rain", "indoors_sun", "indoors_rain"),
        utilities=utilities,
    )


def party_tree():
    weather = lambda loc: ChanceNode("Weather", (  # noqa: E731
        ("sun", P_SUN, Leaf(UTILITY[f"{loc}_sun"])),
        ("rain", 1 - P_SUN, Leaf(UTILITY[f"{loc}_rain"])),
    ))
    return DecisionNode("Location", (("outdoors", weather("outdoors")), ("indoors", weather("indoors"))))


def simplified_party_tree():
    # the indoor payoff does not depend on the weather, so that branch is a leaf
    outdoors = ChanceNode("Weather", (("sun", P_SUN, Leaf(1.0)), ("rain", 1 - P_SUN, Leaf(0.0))))
    return DecisionNode("Location", (("outdoors", outdoors), ("indoors", Leaf(0.8))))
