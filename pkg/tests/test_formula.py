import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randomized import random_formula, random_graph
from sastl import formula as F
from sastl.parser import parse
from sastl.spatial import DistanceIndex, PoIGraph, SpatialDomain, locations_in_range

INF = math.inf
x5 = F.Atomic("x", "<", 5.0)


def test_cost_atomic(chain, chain_index):
    assert F.cost(x5, "A", chain, chain_index) == 1


def test_cost_not(chain, chain_index):
    assert F.cost(F.Not(x5), "A", chain, chain_index) == 2


def test_cost_aggregate_counts_range(chain, chain_index):
    phi = F.Aggregate("avg", SpatialDomain(0, 3), "x", "<", 5.0)
    assert F.cost(phi, "A", chain, chain_index) == 3


def test_cost_count_multiplies_inner(chain, chain_index):
    inner = F.And(x5, F.Not(x5))
    phi = F.Count("avg", SpatialDomain(0, 1), inner, ">", 0.5)
    assert F.cost(phi, "A", chain, chain_index) == 2 * 3


def test_cost_empty_domain_is_clamped(chain, chain_index):
    phi = F.Aggregate("avg", SpatialDomain(10, 20), "x", "<", 5.0)
    assert F.cost(phi, "A", chain, chain_index) == 1


def test_cost_and_until_add(chain, chain_index):
    assert F.cost(F.And(x5, F.Not(x5)), "A", chain, chain_index) == 3
    assert F.cost(F.Until(x5, F.Not(x5), 0, 1), "A", chain, chain_index) == 3


def test_max_horizon():
    assert F.max_horizon(x5) == 0
    assert F.max_horizon(F.always(0, 3, F.eventually(0, 2, x5))) == 5
    assert F.max_horizon(F.And(F.always(0, 3, x5), F.eventually(1, 7, x5))) == 7


def test_free_variables():
    phi = parse("agg(avg,[0,1],true)(Noise) < 50 and count(max,[0,1],true)(y > 1 and z < 2) > 0")
    assert F.free_variables(phi) == {"Noise", "y", "z"}


def test_whole_domain_anchor():
    assert F.whole_domain_anchor(parse("everywhere([0,inf],School) x < 1"))
    assert F.whole_domain_anchor(parse("count(avg,[0,inf],true)(x < 1) > 0.5"))
    assert not F.whole_domain_anchor(parse("everywhere([0,3],School) x < 1"))
    assert not F.whole_domain_anchor(parse("x < 1"))


@pytest.mark.parametrize("kwargs", [dict(lo=2, hi=1), dict(lo=-1, hi=1), dict(lo=0, hi=INF), dict(lo=math.nan, hi=1)])
def test_until_rejects_bad_interval(kwargs):
    with pytest.raises(ValueError):
        F.Until(x5, x5, **kwargs)


def test_rejects_unknown_comparator_and_op():
    with pytest.raises(ValueError):
        F.Atomic("x", "=>", 1.0)
    with pytest.raises(ValueError):
        F.Aggregate("median", SpatialDomain(0, 1), "x", "<", 1.0)


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_cost_positive_and_monotone_in_domain(seed):
    rng = random.Random(seed)
    g = random_graph(rng, 15)
    idx = DistanceIndex(g)
    phi = random_formula(rng)
    l = rng.choice(g.nodes)
    assert F.cost(phi, l, g, idx) >= 1
    dom = SpatialDomain(0, rng.choice((0.0, 1.0, 2.0)))
    wider = SpatialDomain(0, INF)
    inner = F.Not(phi)
    assert F.cost(F.Count("max", dom, inner, ">", 0.0), l, g, idx) <= F.cost(F.Count("max", wider, inner, ">", 0.0), l, g, idx)
    n = len(locations_in_range(g, idx, l, wider))
    assert F.cost(F.Count("max", wider, inner, ">", 0.0), l, g, idx) == max(1, n) * F.cost(inner, l, g, idx)
    assert F.cost(F.And(phi, x5), l, g, idx) > F.cost(phi, l, g, idx)
