"""Seeded synthetic city fixtures: a jittered grid graph plus sampled data."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .signals import SpatioTemporalSignal, export_csv
from .spatial import PoIGraph, save_graph


@dataclass
class SyntheticParams:
    nodes: int = 100
    labels: dict[str, float] = field(default_factory=lambda: {"School": 0.05})
    variables: list[str] = field(default_factory=lambda: ["Noise"])
    samples: int = 10
    seed: int = 0
    spacing: float = 0.5
    time_step: float = 1.0
    low: float = 30.0
    high: float = 70.0
    undefined: float = 0.0

    def validate(self) -> None:
        if self.nodes < 1:
            raise ValueError("nodes must be >= 1")
        if self.samples < 0:
            raise ValueError("samples must be >= 0")
        if self.spacing <= 0 or self.time_step <= 0:
            raise ValueError("spacing and time_step must be positive")
        if not self.variables:
            raise ValueError("at least one variable is required")
        if self.low > self.high:
            raise ValueError("low must not exceed high")
        for name, frac in self.labels.items():
            if not 0 <= frac <= 1:
                raise ValueError(f"label fraction for {name!r} must lie in [0, 1]")
        if not 0 <= self.undefined <= 1:
            raise ValueError("undefined fraction must lie in [0, 1]")


def parse_params(text: str, seed: int | None = None) -> SyntheticParams:
    """``nodes=100,labels=School:0.05+Hospital:0.01,vars=Noise+PM,samples=10``."""
    p = SyntheticParams()
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"expected key=value, got {item!r}")
        key = key.strip()
        if key == "nodes":
            p.nodes = int(value)
        elif key == "labels":
            p.labels = {}
            for part in filter(None, value.split("+")):
                name, _, frac = part.partition(":")
                p.labels[name] = float(frac)
        elif key in ("vars", "variables"):
            p.variables = [v for v in value.split("+") if v]
        elif key == "samples":
            p.samples = int(value)
        elif key == "seed":
            p.seed = int(value)
        elif key in ("spacing", "time_step", "low", "high", "undefined"):
            setattr(p, key, float(value))
        else:
            raise ValueError(f"unknown synthetic parameter {key!r}")
    if seed is not None:
        p.seed = seed
    p.validate()
    return p


def node_id(i: int, n: int) -> str:
    return f"n{i:0{len(str(max(n - 1, 0)))}d}"


def gen_synthetic(params: SyntheticParams) -> tuple[PoIGraph, SpatioTemporalSignal]:
    params.validate()
    rng = random.Random(params.seed)
    n = params.nodes
    cols = math.ceil(math.sqrt(n))
    ids = [node_id(i, n) for i in range(n)]
    pos = []
    for i in range(n):
        jx, jy = rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)
        pos.append(((i % cols + jx) * params.spacing, (i // cols + jy) * params.spacing))
    edges = []
    for i in range(n):
        for j in (i + 1 if (i + 1) % cols else None, i + cols):
            if j is not None and j < n:
                w = round(math.dist(pos[i], pos[j]), 4)
                edges.append((ids[i], ids[j], w))
    labels: dict[str, set[str]] = {nid: set() for nid in ids}
    for name in sorted(params.labels):
        k = round(params.labels[name] * n)
        for nid in rng.sample(ids, k):
            labels[nid].add(name)
    graph = PoIGraph(labels, edges)

    records = []
    for var in params.variables:
        for nid in ids:
            for s in range(params.samples):
                t = s * params.time_step
                if params.undefined and rng.random() < params.undefined:
                    value = None
                else:
                    value = round(rng.uniform(params.low, params.high), 2)
                records.append((t, nid, var, value))
    signal = SpatioTemporalSignal.from_records(records, variables=params.variables)
    return graph, signal


def write_synthetic(params: SyntheticParams, graph_path, data_path) -> tuple[PoIGraph, SpatioTemporalSignal]:
    graph, signal = gen_synthetic(params)
    save_graph(graph, graph_path)
    export_csv(signal, data_path)
    return graph, signal
