import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sastl.signals import SpatioTemporalSignal  # noqa: E402
from sastl.spatial import DistanceIndex, PoIGraph  # noqa: E402


@pytest.fixture
def chain():
    """A -1- B -2- C, A labeled School."""
    return PoIGraph({"A": {"School"}, "B": set(), "C": set()}, [("A", "B", 1), ("B", "C", 2)])


@pytest.fixture
def chain_index(chain):
    return DistanceIndex(chain)


def signal_of(rows, variables=()):
    """``rows`` are ``(t, location, variable, value)``."""
    return SpatioTemporalSignal.from_records(rows, variables=variables)
