from fractions import Fraction
from itertools import permutations
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from rumflow.document import load
from rumflow.flows import RankingDistribution

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def uniform(alternatives) -> RankingDistribution:
    ranks = list(permutations(range(len(alternatives))))
    return RankingDistribution(tuple(alternatives), {r: Fraction(1, len(ranks)) for r in ranks})


def count_rankings(n, predicate) -> Fraction:
    """Share of the ``n!`` rankings (best-first index tuples) satisfying ``predicate``."""
    ranks = list(permutations(range(n)))
    return Fraction(sum(1 for r in ranks if predicate(r)), len(ranks))


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / f"{name}.json"


@pytest.fixture
def fixture_ds():
    return lambda name: load(FIXTURES / f"{name}.json")


# acceptance results, printed once at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
