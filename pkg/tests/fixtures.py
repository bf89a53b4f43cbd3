"""Hand-built city fixtures with verdicts derived by hand.

Each builder returns a :class:`Case`. Distances are in km and times in
minutes. Every graph is connected so that whole-domain requirements do not
depend on the anchor location.
"""

from __future__ import annotations

from dataclasses import dataclass

from sastl.signals import SpatioTemporalSignal
from sastl.spatial import PoIGraph

SCHOOL_NOISE = ("everywhere([0,inf],School) always[0,3] "
                "(agg(avg,[0,1],true)(Noise) < 50 and agg(max,[0,1],true)(Noise) < 80)")
STREET_AIR = "count(avg,[0,inf],Street)( always[0,2] (PMx < 150) ) > 0.9"
SCHOOL_NOISE_30 = "everywhere([0,inf],School) always[0,30] (agg(avg,[0,1],true)(Noise) < 50)"
HOSPITAL_ACCESS = ("everywhere([0,inf],true) (Accident > 0 -> count(max,[0,5],Hospital)"
                   "( always[0,60] (agg(avg,[0,2],true)(Traffic) < 0.8) ) > 0)")
EVENT_CROWD = "everywhere([0,inf],true) (Event > 0 -> always[0,10] (agg(max,[0,1],true)(Ped) < 50))"
CITY_AIR = "count(avg,[0,inf],true)( always[0,60] (agg(max,[0,1],true)(PMx) < 100) ) > 0.9"
ACCIDENT_RECOVERY = ("everywhere([0,inf],true) (Accident > 0 -> (agg(avg,[0,0.5],true)(Traffic) < 0.6 and "
                     "agg(max,[0,0.5],true)(Traffic) < 0.9) until[0,60] not (Accident > 0))")


@dataclass
class Case:
    name: str
    formula: str
    graph: PoIGraph
    signal: SpatioTemporalSignal
    t: float
    expected: bool


def _signal(rows):
    return SpatioTemporalSignal.from_records(rows)


def school_graph() -> PoIGraph:
    # S1's 1 km disc holds S1, a1, a2; S2's holds S2, b1
    return PoIGraph(
        {"S1": {"School"}, "a1": (), "a2": (), "S2": {"School"}, "b1": ()},
        [("S1", "a1", 0.5), ("S1", "a2", 0.8), ("S1", "S2", 5.0), ("S2", "b1", 1.0)],
    )


def noise_rows(times, s2_override=None):
    """Area averages are 45 dB everywhere (S1: 40, 50, 45; S2: 44, 46).

    ``s2_override=(t, v1, v2)`` replaces S2's area with v1, v2 at time t.
    """
    base = {"S1": 40.0, "a1": 50.0, "a2": 45.0, "S2": 44.0, "b1": 46.0}
    rows = []
    for t in times:
        values = dict(base)
        if s2_override and s2_override[0] == t:
            values["S2"], values["b1"] = s2_override[1], s2_override[2]
        rows += [(t, loc, "Noise", v) for loc, v in values.items()]
    return rows


def school_noise(forced=None) -> Case:
    """All school-area averages 45 dB, or S2's forced to 55 dB (50, 60) at t=2."""
    rows = noise_rows(range(4), (2, 50.0, 60.0) if forced else None)
    return Case("school-noise" + ("-violated" if forced else ""), SCHOOL_NOISE, school_graph(), _signal(rows), 0.0,
                not forced)


def street_air(bad_streets=1) -> Case:
    """10 streets plus 2 parks on a unit chain; ``bad_streets`` exceed 150 at t=1.

    Parks always exceed but are not streets. 9/10 = 0.9 is not > 0.9.
    """
    nodes = [f"st{i}" for i in range(10)] + ["park0", "park1"]
    labels = {n: {"Street"} if n.startswith("st") else {"Park"} for n in nodes}
    g = PoIGraph(labels, [(a, b, 1.0) for a, b in zip(nodes, nodes[1:])])
    rows = []
    for t in range(3):
        for i, n in enumerate(nodes):
            high = n.startswith("park") or (i < bad_streets and t == 1)
            rows.append((float(t), n, "PMx", 160.0 if high else 100.0))
    return Case(f"street-air-{bad_streets}-bad", STREET_AIR, g, _signal(rows), 0.0, bad_streets == 0)


def school_noise_30(loud=False) -> Case:
    rows = noise_rows((0, 10, 20, 30), (30, 50.0, 60.0) if loud else None)
    return Case("school-noise-30" + ("-violated" if loud else ""), SCHOOL_NOISE_30, school_graph(), _signal(rows),
                0.0, not loud)


def hospital_access(jam_h2=False) -> Case:
    """Accident at X; H1's 2 km area jams (0.9) at t=30, H2 stays at 0.5 unless ``jam_h2``."""
    g = PoIGraph({"X": (), "H1": {"Hospital"}, "r1": (), "H2": {"Hospital"}},
                 [("X", "H1", 3.0), ("X", "H2", 4.0), ("H1", "r1", 1.5)])
    rows = [(0.0, n, "Accident", 1.0 if n == "X" else 0.0) for n in g.nodes]
    for t in (0.0, 30.0, 60.0):
        rows += [(t, "H1", "Traffic", 0.9 if t == 30 else 0.5), (t, "r1", "Traffic", 0.9 if t == 30 else 0.5)]
        rows.append((t, "H2", "Traffic", 0.85 if jam_h2 and t == 60 else 0.5))
    return Case("hospital-access" + ("-violated" if jam_h2 else ""), HOSPITAL_ACCESS, g, _signal(rows), 0.0,
                not jam_h2)


def event_crowd(crowded=False) -> Case:
    """Event at E; p1 is 0.5 km away, p2 is 2.5 km away and always crowded."""
    g = PoIGraph({"E": (), "p1": (), "p2": ()}, [("E", "p1", 0.5), ("p1", "p2", 2.0)])
    rows = [(0.0, n, "Event", 1.0 if n == "E" else 0.0) for n in g.nodes]
    for t in (0.0, 5.0, 10.0):
        rows += [(t, "E", "Ped", 30.0), (t, "p1", "Ped", 55.0 if crowded and t == 10 else 40.0), (t, "p2", "Ped", 80.0)]
    return Case("event-crowd" + ("-violated" if crowded else ""), EVENT_CROWD, g, _signal(rows), 0.0, not crowded)


def city_air(bad=1) -> Case:
    """20 nodes 2 km apart so each 1 km disc is a single node; ``bad`` nodes hit 120 at t=30.

    19/20 = 0.95 > 0.9 holds, 18/20 = 0.9 does not.
    """
    nodes = [f"m{i:02d}" for i in range(20)]
    g = PoIGraph({n: () for n in nodes}, [(a, b, 2.0) for a, b in zip(nodes, nodes[1:])])
    rows = [(t, n, "PMx", 120.0 if i < bad and t == 30 else 60.0)
            for t in (0.0, 30.0, 60.0) for i, n in enumerate(nodes)]
    return Case(f"city-air-{bad}-bad", CITY_AIR, g, _signal(rows), 0.0, bad <= 1)


def accident_recovery(spike=False) -> Case:
    """Accident at X clears at t=40; traffic near X (X, n1) stays moderate until then."""
    g = PoIGraph({"X": (), "n1": (), "n2": ()}, [("X", "n1", 0.3), ("n1", "n2", 1.0)])
    rows = [(0.0, n, "Accident", 0.0) for n in ("n1", "n2")]
    rows += [(0.0, "X", "Accident", 1.0), (20.0, "X", "Accident", 1.0), (40.0, "X", "Accident", 0.0)]
    for t in (0.0, 10.0, 20.0, 30.0, 40.0):
        rows += [(t, "X", "Traffic", 0.5), (t, "n1", "Traffic", 0.95 if spike and t == 30 else 0.55)]
    return Case("accident-recovery" + ("-violated" if spike else ""), ACCIDENT_RECOVERY, g, _signal(rows), 0.0,
                not spike)


def all_cases() -> list[Case]:
    return [
        school_noise(), school_noise(forced=True),
        street_air(0), street_air(1),
        school_noise_30(), school_noise_30(loud=True),
        hospital_access(), hospital_access(jam_h2=True),
        event_crowd(), event_crowd(crowded=True),
        city_air(1), city_air(2),
        accident_recovery(), accident_recovery(spike=True),
    ]
