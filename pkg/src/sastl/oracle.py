"""Direct transcription of the satisfaction relation, for differential testing.

Nothing here is optimized or shared with :mod:`sastl.monitor`: distances
come from Floyd-Warshall, location sets and sample-time sets are recomputed
by scanning, and ``until`` is checked by literal quantification. Meant for
small instances only.
"""

from __future__ import annotations

import math
import statistics

from . import formula as F
from .errors import UnknownLocationError, UnknownVariableError
from .spatial import AnyLabel, LabelNot, LabelOr, Prop

_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def all_pairs_distances(graph) -> dict:
    nodes = list(graph.labels)
    d = {u: {v: (0.0 if u == v else math.inf) for v in nodes} for u in nodes}
    for u, v, w in graph.edges():
        if w < d[u][v]:
            d[u][v] = d[v][u] = w
    for k in nodes:
        dk = d[k]
        for i in nodes:
            dik = d[i][k]
            if dik == math.inf:
                continue
            di = d[i]
            for j in nodes:
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d


def _holds(psi, labels) -> bool:
    if isinstance(psi, AnyLabel):
        return True
    if isinstance(psi, Prop):
        return psi.name in labels
    if isinstance(psi, LabelNot):
        return not _holds(psi.arg, labels)
    if isinstance(psi, LabelOr):
        return _holds(psi.left, labels) or _holds(psi.right, labels)
    raise TypeError(psi)


class Oracle:
    def __init__(self, graph, signal):
        self.graph = graph
        self.signal = signal
        self.dist = all_pairs_distances(graph)
        self.samples: dict[tuple, float | None] = {}
        self.stream_times: dict[tuple, set] = {}
        for t, loc, var, value in signal.records():
            self.samples[(var, loc, t)] = value
            self.stream_times.setdefault((var, loc), set()).add(t)

    def domain(self, l, dom):
        return [
            l2 for l2 in self.graph.labels
            if dom.d1 <= self.dist[l][l2] <= dom.d2
            and self.dist[l][l2] < math.inf
            and _holds(dom.psi, self.graph.labels[l2])
        ]

    def streams_read(self, phi, l) -> set:
        """(variable, location) pairs whose samples ``phi`` reads at ``l``."""
        if isinstance(phi, F.TrueFormula):
            return set()
        if isinstance(phi, F.Atomic):
            return {(phi.variable, l)}
        if isinstance(phi, F.Not):
            return self.streams_read(phi.arg, l)
        if isinstance(phi, (F.And, F.Until)):
            return self.streams_read(phi.left, l) | self.streams_read(phi.right, l)
        if isinstance(phi, F.Aggregate):
            return {(phi.variable, l2) for l2 in self.domain(l, phi.domain)}
        if isinstance(phi, F.Count):
            out = set()
            for l2 in self.domain(l, phi.domain):
                out |= self.streams_read(phi.arg, l2)
            return out
        raise TypeError(phi)

    def times(self, phi, l) -> set:
        out = set()
        for key in self.streams_read(phi, l):
            out |= self.stream_times.get(key, set())
        return out

    def value(self, var, t, l):
        if var not in self.signal.variables:
            raise UnknownVariableError(var)
        return self.samples.get((var, l, t))

    def sat(self, phi, t, l) -> bool:
        if isinstance(phi, F.TrueFormula):
            return True
        if isinstance(phi, F.Atomic):
            v = self.value(phi.variable, t, l)
            return True if v is None else _CMP[phi.cmp](v, phi.c)
        if isinstance(phi, F.Not):
            return not self.sat(phi.arg, t, l)
        if isinstance(phi, F.And):
            left = self.sat(phi.left, t, l)
            right = self.sat(phi.right, t, l)
            return left and right
        if isinstance(phi, F.Until):
            t_lo, t_hi = t + phi.lo, t + phi.hi
            inner = self.times(phi.left, l)
            return any(
                self.sat(phi.right, t2, l)
                and all(self.sat(phi.left, t3, l) for t3 in inner if t < t3 < t2)
                for t2 in self.times(phi.right, l)
                if t_lo <= t2 <= t_hi
            )
        if isinstance(phi, F.Aggregate):
            values = [self.value(phi.variable, t, l2) for l2 in self.domain(l, phi.domain)]
            values = [v for v in values if v is not None]
            if not values:
                return True
            return _CMP[phi.cmp](_apply(phi.op, values), phi.c)
        if isinstance(phi, F.Count):
            marks = [1 if self.sat(phi.arg, t, l2) else 0 for l2 in self.domain(l, phi.domain)]
            if not marks:
                return True
            return _CMP[phi.cmp](_apply(phi.op, marks), phi.c)
        raise TypeError(phi)


def _apply(op, values):
    if op == "max":
        return max(values)
    if op == "min":
        return min(values)
    if op == "sum":
        return math.fsum(values)
    return statistics.fmean(values)


def oracle_monitor(phi, ctx) -> bool:
    """Reference verdict at ``(ctx.t, ctx.location)``."""
    if ctx.location not in ctx.graph.labels:
        raise UnknownLocationError(ctx.location)
    for var in F.free_variables(phi):
        if var not in ctx.signal.variables:
            raise UnknownVariableError(var)
    return Oracle(ctx.graph, ctx.signal).sat(phi, ctx.t, ctx.location)
