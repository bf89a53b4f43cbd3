"""Location graph, label expressions, spatial domains and distance-band queries."""

from __future__ import annotations

import heapq
import json
import math
import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import GraphError, UnknownLocationError

INF = math.inf


# ---------------------------------------------------------------------------
# Label expressions over location propositions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class AnyLabel:
    """The always-true label expression."""


@dataclass(frozen=True, slots=True)
class Prop:
    name: str


@dataclass(frozen=True, slots=True)
class LabelNot:
    arg: "LabelExpr"


@dataclass(frozen=True, slots=True)
class LabelOr:
    left: "LabelExpr"
    right: "LabelExpr"


LabelExpr = AnyLabel | Prop | LabelNot | LabelOr


def label_and(a: LabelExpr, b: LabelExpr) -> LabelExpr:
    return LabelNot(LabelOr(LabelNot(a), LabelNot(b)))


def eval_label_expr(psi: LabelExpr, labels) -> bool:
    """Propositional evaluation: ``Prop(p)`` holds iff ``p in labels``."""
    if isinstance(psi, AnyLabel):
        return True
    if isinstance(psi, Prop):
        return psi.name in labels
    if isinstance(psi, LabelNot):
        return not eval_label_expr(psi.arg, labels)
    if isinstance(psi, LabelOr):
        return eval_label_expr(psi.left, labels) or eval_label_expr(psi.right, labels)
    raise TypeError(f"not a label expression: {psi!r}")


def label_to_text(psi: LabelExpr) -> str:
    if isinstance(psi, AnyLabel):
        return "true"
    if isinstance(psi, Prop):
        return psi.name
    if isinstance(psi, LabelNot):
        return f"not {label_to_text(psi.arg)}"
    if isinstance(psi, LabelOr):
        return f"({label_to_text(psi.left)} or {label_to_text(psi.right)})"
    raise TypeError(f"not a label expression: {psi!r}")


@dataclass(frozen=True, slots=True)
class SpatialDomain:
    """Distance band ``[d1, d2]`` plus a label filter ``psi``."""

    d1: float
    d2: float
    psi: LabelExpr = AnyLabel()

    def __post_init__(self):
        if math.isnan(self.d1) or math.isnan(self.d2):
            raise ValueError("distance bounds must not be NaN")
        if self.d1 < 0 or self.d1 == INF:
            raise ValueError(f"d1 must be finite and non-negative, got {self.d1}")
        if self.d2 < self.d1:
            raise ValueError(f"empty distance band [{self.d1}, {self.d2}]")

    @property
    def whole(self) -> bool:
        """True when the band covers every reachable location."""
        return self.d1 == 0 and self.d2 == INF


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------


class PoIGraph:
    """Weighted undirected location graph with per-node label sets.

    Immutable after construction. ``adjacency[u]`` is a tuple of
    ``(neighbor, weight)`` pairs.
    """

    def __init__(self, labels: Mapping[str, Iterable[str]], edges: Iterable[tuple] = ()):
        self.labels: dict[str, frozenset[str]] = {}
        for node, lbls in labels.items():
            if node in self.labels:
                raise GraphError(f"duplicate node {node!r}")
            self.labels[node] = frozenset(lbls)
        adj: dict[str, dict[str, float]] = {n: {} for n in self.labels}
        for u, v, w in edges:
            for end in (u, v):
                if end not in adj:
                    raise GraphError(f"edge endpoint {end!r} is not a declared node")
            w = float(w)
            if not (w >= 0) or w == INF:
                raise GraphError(f"edge ({u!r}, {v!r}) has invalid weight {w}")
            if u == v:
                continue
            if v in adj[u]:
                raise GraphError(f"duplicate edge ({u!r}, {v!r})")
            adj[u][v] = w
            adj[v][u] = w
        self.adjacency: dict[str, tuple[tuple[str, float], ...]] = {
            n: tuple(nbrs.items()) for n, nbrs in adj.items()
        }

    @property
    def nodes(self) -> list[str]:
        return list(self.labels)

    def __len__(self):
        return len(self.labels)

    def __contains__(self, node):
        return node in self.labels

    def edges(self) -> list[tuple[str, str, float]]:
        seen = set()
        out = []
        for u, nbrs in self.adjacency.items():
            for v, w in nbrs:
                if (v, u) not in seen:
                    seen.add((u, v))
                    out.append((u, v, w))
        return out

    def require(self, node) -> None:
        if node not in self.labels:
            raise UnknownLocationError(node)

    def labeled(self, label: str) -> list[str]:
        return [n for n, lbls in self.labels.items() if label in lbls]

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": n, "labels": sorted(lbls)} for n, lbls in self.labels.items()],
            "edges": [{"u": u, "v": v, "w": w} for u, v, w in self.edges()],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PoIGraph":
        try:
            labels = {}
            for node in data["nodes"]:
                nid = str(node["id"])
                if nid in labels:
                    raise GraphError(f"duplicate node {nid!r}")
                labels[nid] = node.get("labels", [])
            edges = [(str(e["u"]), str(e["v"]), e["w"]) for e in data.get("edges", [])]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"malformed graph document: {exc}") from exc
        return cls(labels, edges)


def load_graph(path) -> PoIGraph:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphError(f"{path}: invalid JSON: {exc}") from exc
    return PoIGraph.from_dict(data)


def save_graph(graph: PoIGraph, path) -> None:
    Path(path).write_text(json.dumps(graph.to_dict(), indent=1) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Shortest paths
# ---------------------------------------------------------------------------


def _dijkstra(graph: PoIGraph, source: str, bound: float = INF, target=None) -> dict[str, float]:
    """Settled distances from ``source``; stops once the frontier exceeds ``bound``."""
    dist = {source: 0.0}
    done: dict[str, float] = {}
    heap = [(0.0, source)]
    adjacency = graph.adjacency
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        if d > bound:
            break
        done[u] = d
        if u == target:
            break
        for v, w in adjacency[u]:
            nd = d + w
            if v not in done and nd < dist.get(v, INF):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return done


def weighted_distance(graph: PoIGraph, l: str, l2: str) -> float:
    """Minimum path weight between two locations, ``inf`` if disconnected."""
    graph.require(l)
    graph.require(l2)
    return _dijkstra(graph, l, target=l2).get(l2, INF)


class _SourceEntry:
    __slots__ = ("radius", "dists", "nodes")

    def __init__(self, radius, dists, nodes):
        self.radius = radius
        self.dists = dists
        self.nodes = nodes


class DistanceIndex:
    """Lazily filled per-source distance arrays sorted by distance.

    Each source entry is valid up to ``radius``: it holds every node whose
    distance is at most that radius. Band queries bisect the array.
    """

    def __init__(self, graph: PoIGraph):
        self.graph = graph
        self._entries: dict[str, _SourceEntry] = {}
        self._lock = threading.Lock()
        self.fills = 0

    def __getstate__(self):
        return {"graph": self.graph}

    def __setstate__(self, state):
        self.__init__(state["graph"])

    def _entry(self, source: str, radius: float) -> _SourceEntry:
        entry = self._entries.get(source)
        if entry is not None and entry.radius >= radius:
            return entry
        with self._lock:
            entry = self._entries.get(source)
            if entry is not None and entry.radius >= radius:
                return entry
            if entry is not None and radius < INF:
                # grow geometrically so repeated widening stays amortized
                radius = max(radius, 2 * entry.radius)
            done = _dijkstra(self.graph, source, bound=radius)
            pairs = sorted((d, n) for n, d in done.items())
            entry = _SourceEntry(radius, [d for d, _ in pairs], [n for _, n in pairs])
            self._entries[source] = entry
            self.fills += 1
            return entry

    def band(self, source: str, d1: float, d2: float) -> list[str]:
        """Nodes with ``d1 <= d(source, node) <= d2``, closest first."""
        self.graph.require(source)
        entry = self._entry(source, d2)
        lo = bisect_left(entry.dists, d1)
        hi = bisect_right(entry.dists, d2)
        return entry.nodes[lo:hi]

    def distance(self, source: str, target: str) -> float:
        self.graph.require(source)
        self.graph.require(target)
        entry = self._entry(source, INF)
        try:
            return entry.dists[entry.nodes.index(target)]
        except ValueError:
            return INF


def locations_in_range(graph: PoIGraph, index: DistanceIndex, l: str, domain: SpatialDomain) -> list[str]:
    """Locations in the distance band whose labels satisfy the domain's filter."""
    labels = graph.labels
    psi = domain.psi
    band = index.band(l, domain.d1, domain.d2)
    if isinstance(psi, AnyLabel):
        return band
    return [n for n in band if eval_label_expr(psi, labels[n])]
