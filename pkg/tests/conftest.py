from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from xplain import (
    Corpus,
    Global,
    Objective,
    PreferenceTuple,
    Specificity,
    build_mdp,
    paper_map,
    plan_policy,
)

from oracles import random_grid


@pytest.fixture(scope="session")
def paper_grid():
    return paper_map()


@pytest.fixture(scope="session")
def paper_mdp(paper_grid):
    return build_mdp(paper_grid)


@pytest.fixture(scope="session")
def shortest_policy(paper_mdp):
    return plan_policy(paper_mdp, Objective.SHORTEST)


@pytest.fixture(scope="session")
def safest_policy(paper_mdp):
    return plan_policy(paper_mdp, Objective.SAFEST)


@pytest.fixture
def basic_preference():
    return PreferenceTuple(
        objective=Objective.SHORTEST,
        locality=Global(),
        specificity=Specificity.EVERY_STATE,
        corpus=Corpus.CONCRETE,
    )


def seeded_grids(seed: int):
    """Strategy: small random connected grids, reproducible per seed offset."""
    return st.integers(min_value=0, max_value=2**31 - 1).map(
        lambda offset: random_grid(random.Random(seed + offset))
    )
