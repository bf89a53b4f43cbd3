import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import signal_of
from randomized import random_graph, random_signal
from sastl.errors import SignalFormatError, UnknownVariableError
from sastl.signals import SpatioTemporalSignal, alpha, export_csv, ingest_csv, ingest_many
from sastl.spatial import DistanceIndex, PoIGraph, Prop, SpatialDomain

INF = math.inf


def test_value_at_defined():
    sig = signal_of([(0, "A", "x", 42.0)])
    assert sig.value_at("x", 0, "A") == 42.0


def test_value_at_undefined_sample():
    sig = signal_of([(0, "A", "x", None)])
    assert sig.value_at("x", 0, "A") is None


def test_value_at_missing_sample_is_undefined():
    sig = signal_of([(0, "A", "x", 1.0)])
    assert sig.value_at("x", 5, "A") is None
    assert sig.value_at("x", 0, "B") is None


def test_value_at_unknown_variable():
    sig = signal_of([(0, "A", "x", 1.0)])
    with pytest.raises(UnknownVariableError, match="'y'"):
        sig.value_at("y", 0, "A")


def test_declared_variable_without_samples():
    sig = signal_of([(0, "A", "x", 1.0)], variables=["y"])
    assert sig.value_at("y", 0, "A") is None


def test_nan_is_undefined_and_inf_rejected():
    assert signal_of([(0, "A", "x", math.nan)]).value_at("x", 0, "A") is None
    with pytest.raises(SignalFormatError):
        signal_of([(0, "A", "x", INF)])


def test_duplicate_records_rejected():
    with pytest.raises(SignalFormatError, match="duplicate"):
        signal_of([(1, "A", "x", 1.0), (1, "A", "x", 2.0)])


def test_streams_must_increase():
    with pytest.raises(SignalFormatError):
        SpatioTemporalSignal({("x", "A"): [(1, 1.0), (0, 2.0)]})


@pytest.fixture
def three():
    g = PoIGraph({"A": {"School"}, "B": (), "C": ()}, [("A", "B", 1), ("B", "C", 1)])
    return g, DistanceIndex(g)


def test_alpha_filters_undefined(three):
    g, idx = three
    sig = signal_of([(0, "A", "x", 40.0), (0, "B", "x", None), (0, "C", "x", 60.0)])
    assert sorted(alpha(sig, "x", SpatialDomain(0, INF), 0, "A", g, idx)) == [40.0, 60.0]


def test_alpha_all_undefined_is_empty(three):
    g, idx = three
    sig = signal_of([(0, loc, "x", None) for loc in "ABC"])
    assert alpha(sig, "x", SpatialDomain(0, INF), 0, "A", g, idx) == []


def test_alpha_empty_domain(three):
    g, idx = three
    sig = signal_of([(0, loc, "x", 1.0) for loc in "ABC"])
    assert alpha(sig, "x", SpatialDomain(5, 9), 0, "A", g, idx) == []
    assert alpha(sig, "x", SpatialDomain(0, INF, Prop("Park")), 0, "A", g, idx) == []


def test_time_samples_in():
    sig = signal_of([(t, "A", "x", float(t)) for t in range(4)])
    assert sig.time_samples_in("x", "A", 1, 2) == [(1.0, 1.0), (2.0, 2.0)]
    assert sig.time_samples_in("x", "A", 0, 0) == [(0.0, 0.0)]
    assert sig.time_samples_in("x", "A", 7, 9) == []
    assert sig.time_samples_in("x", "Z", 0, 9) == []


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_csv_defined_and_undefined(tmp_path):
    sig = ingest_csv(write(tmp_path, "time,location,variable,value\n0,A,Noise,42.5\n0,B,Noise,\n1,A,Noise,NaN\n"))
    assert sig.value_at("Noise", 0, "A") == 42.5
    assert sig.value_at("Noise", 0, "B") is None
    assert sig.value_at("Noise", 1, "A") is None
    assert sig.times("Noise", "B") == [0.0]


def test_csv_duplicate_reports_both_lines(tmp_path):
    p = write(tmp_path, "time,location,variable,value\n0,A,x,1\n1,A,x,2\n0,A,x,3\n")
    with pytest.raises(SignalFormatError) as info:
        ingest_csv(p)
    assert info.value.line == 4
    assert "line 2" in str(info.value)


@pytest.mark.parametrize("body, line", [
    ("0,A,x\n", 2),
    ("0,A,x,1\nzero,A,x,1\n", 3),
    ("0,A,x,1\n1,A,x,abc\n", 3),
    ("0,A,x,1\n-1,A,x,1\n", 3),
    ("0,A,x,1\n1,A,x,inf\n", 3),
    ("0,,x,1\n", 2),
])
def test_csv_malformed_rows(tmp_path, body, line):
    with pytest.raises(SignalFormatError) as info:
        ingest_csv(write(tmp_path, "time,location,variable,value\n" + body))
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_csv_bad_header(tmp_path):
    with pytest.raises(SignalFormatError):
        ingest_csv(write(tmp_path, "t,loc,var,val\n"))


def test_ingest_many_merges_and_rejects_overlap(tmp_path):
    a = write(tmp_path, "time,location,variable,value\n0,A,x,1\n", "a.csv")
    b = write(tmp_path, "time,location,variable,value\n1,A,x,2\n0,B,y,3\n", "b.csv")
    sig = ingest_many([a, b])
    assert sig.times("x", "A") == [0.0, 1.0]
    assert sig.variables == {"x", "y"}
    with pytest.raises(SignalFormatError):
        ingest_many([a, a])


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_csv_round_trip(tmp_path_factory, seed):
    rng = random.Random(seed)
    g = random_graph(rng, 6)
    sig = random_signal(rng, g)
    # non-integral values must survive too
    sig = SpatioTemporalSignal.from_records(
        [(t, loc, var, None if v is None else v / 3) for t, loc, var, v in sig.records()])
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    export_csv(sig, path)
    assert ingest_csv(path) == sig
