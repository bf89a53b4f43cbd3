"""Boolean monitoring of SaSTL formulas at a (time, location) point.

Evaluation is over recorded samples only. An atomic predicate whose sample
is undefined (or missing at that exact time) is satisfied, and a spatial
operator over an empty value/location set is satisfied.

For ``until`` the candidate times are the recorded sample times of the
variables the right operand reads, at the locations it reads them; the
left operand must hold at its own sample times strictly between ``t`` and
the witness.
"""

from __future__ import annotations

import time
import uuid
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field

from . import formula as F
from .errors import UnknownVariableError
from .formula import compare
from .parallel import fold_partials, fold_values
from .signals import SpatioTemporalSignal
from .spatial import AnyLabel, DistanceIndex, PoIGraph, eval_label_expr, locations_in_range


@dataclass(frozen=True)
class EngineConfig:
    """``cost_ordering`` evaluates the cheaper conjunct first; ``thread_count``
    workers fold the outermost spatial operator; ``backend`` picks threads or
    processes for those workers."""

    cost_ordering: bool = True
    thread_count: int = 1
    backend: str = "process"
    min_parallel_tasks: int = 2
    count_undefined_as_satisfied: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")
        if self.backend not in ("process", "thread"):
            raise ValueError(f"unknown backend {self.backend!r}")


@dataclass
class EvalStats:
    atomic_evaluations: int = 0
    locations_visited: int = 0
    vacuity_count: int = 0
    wall_time: float = 0.0

    def absorb(self, other: "EvalStats") -> None:
        self.atomic_evaluations += other.atomic_evaluations
        self.locations_visited += other.locations_visited
        self.vacuity_count += other.vacuity_count
        self.wall_time += other.wall_time

    def to_dict(self) -> dict:
        return {
            "atomic_evaluations": self.atomic_evaluations,
            "locations_visited": self.locations_visited,
            "vacuity_count": self.vacuity_count,
            "wall_time": self.wall_time,
        }


@dataclass(frozen=True)
class EvalContext:
    signal: SpatioTemporalSignal
    graph: PoIGraph
    index: DistanceIndex
    t: float
    location: str
    config: EngineConfig = EngineConfig()


class _Run:
    __slots__ = ("stats", "parallel")

    def __init__(self, stats: EvalStats, parallel: bool):
        self.stats = stats
        self.parallel = parallel


class Monitor:
    """Evaluates formulas against one graph and signal.

    Safe to share between threads; caches (distance index, per-node cost and
    sample-time tables) fill lazily and idempotently.
    """

    def __init__(self, graph: PoIGraph, signal: SpatioTemporalSignal, config: EngineConfig | None = None,
                 index: DistanceIndex | None = None):
        self.graph = graph
        self.signal = signal
        self.config = config or EngineConfig()
        self.index = index or DistanceIndex(graph)
        self.stats = EvalStats()
        self._share_key = uuid.uuid4().hex
        self._nodes: dict[int, tuple] = {}

    def __getstate__(self):
        return {"graph": self.graph, "signal": self.signal, "config": self.config, "key": self._share_key}

    def __setstate__(self, state):
        self.__init__(state["graph"], state["signal"], state["config"])
        self._share_key = state["key"]

    # -- public entry points -------------------------------------------------

    def check(self, phi: F.Formula, t: float, location: str) -> bool:
        return self.evaluate(phi, t, location)[0]

    def evaluate(self, phi: F.Formula, t: float, location: str) -> tuple[bool, EvalStats]:
        """Verdict at ``(t, location)`` plus counters for this call."""
        self.validate(phi, t, location)
        stats = EvalStats()
        start = time.perf_counter()
        verdict = self.sat(phi, t, location, _Run(stats, self.config.thread_count > 1))
        stats.wall_time = time.perf_counter() - start
        self.stats.absorb(stats)
        return verdict, stats

    def validate(self, phi: F.Formula, t: float, location: str) -> None:
        self.graph.require(location)
        if not (t >= 0) or t == float("inf"):
            raise ValueError(f"evaluation time must be finite and non-negative, got {t}")
        for var in sorted(F.free_variables(phi)):
            if var not in self.signal.variables:
                raise UnknownVariableError(var)

    # -- dispatch --------------------------------------------------------------

    def sat(self, phi: F.Formula, t: float, l: str, run: _Run) -> bool:
        if isinstance(phi, F.Atomic):
            run.stats.atomic_evaluations += 1
            v = self.signal.value_at(phi.variable, t, l)
            if v is None:
                run.stats.vacuity_count += 1
                return True
            return compare(v, phi.cmp, phi.c)
        if isinstance(phi, F.Not):
            return not self.sat(phi.arg, t, l, run)
        if isinstance(phi, F.And):
            return self.eval_and(phi, t, l, run)
        if isinstance(phi, F.Until):
            return self.eval_until(phi, t, l, run)
        if isinstance(phi, F.Aggregate):
            return self.eval_aggregate(phi, t, l, run)
        if isinstance(phi, F.Count):
            return self.eval_count(phi, t, l, run)
        if isinstance(phi, F.TrueFormula):
            return True
        raise TypeError(f"not a formula: {phi!r}")

    def eval_and(self, phi: F.And, t: float, l: str, run: _Run) -> bool:
        first, second = phi.left, phi.right
        if self.config.cost_ordering and self.cost(second, l) < self.cost(first, l):
            first, second = second, first
        return self.sat(first, t, l, run) and self.sat(second, t, l, run)

    def eval_until(self, phi: F.Until, t: float, l: str, run: _Run) -> bool:
        right_times = self.sample_times(phi.right, l)
        lo = bisect_left(right_times, t + phi.lo)
        hi = bisect_right(right_times, t + phi.hi)
        left_times = self.sample_times(phi.left, l)
        j = bisect_right(left_times, t)
        for t2 in right_times[lo:hi]:
            while j < len(left_times) and left_times[j] < t2:
                if not self.sat(phi.left, left_times[j], l, run):
                    return False
                j += 1
            if self.sat(phi.right, t2, l, run):
                return True
        return False

    def _domain_tasks(self, domain, l):
        """Locations to visit and whether the label filter still has to run.

        Cost-ordered evaluation applies the unit-cost label test before
        touching any data; standard order reads first and filters after.
        """
        if self.config.cost_ordering or isinstance(domain.psi, AnyLabel):
            return locations_in_range(self.graph, self.index, l, domain), False
        return self.index.band(l, domain.d1, domain.d2), True

    def _use_pool(self, run: _Run, n: int) -> bool:
        return run.parallel and n >= max(2, self.config.min_parallel_tasks)

    def eval_aggregate(self, phi: F.Aggregate, t: float, l: str, run: _Run) -> bool:
        locs, filter_after = self._domain_tasks(phi.domain, l)
        if self._use_pool(run, len(locs)):
            fold = self._pooled(_AggregateTask(self, phi, t, filter_after), phi.op, locs, run)
            if fold.count == 0:
                run.stats.vacuity_count += 1
                return True
            return compare(fold.result(), phi.cmp, phi.c)
        values = []
        value_at = self.signal.value_at
        labels = self.graph.labels
        psi = phi.domain.psi
        for l2 in locs:
            run.stats.locations_visited += 1
            v = value_at(phi.variable, t, l2)
            if v is None or (filter_after and not eval_label_expr(psi, labels[l2])):
                continue
            values.append(v)
        if not values:
            run.stats.vacuity_count += 1
            return True
        return compare(fold_values(phi.op, values), phi.cmp, phi.c)

    def eval_count(self, phi: F.Count, t: float, l: str, run: _Run) -> bool:
        locs, filter_after = self._domain_tasks(phi.domain, l)
        if self._use_pool(run, len(locs)):
            fold = self._pooled(_CountTask(self, phi, t, filter_after), phi.op, locs, run)
            if fold.count == 0:
                run.stats.vacuity_count += 1
                return True
            return compare(fold.result(), phi.cmp, phi.c)
        inner = _Run(run.stats, False)
        labels = self.graph.labels
        psi = phi.domain.psi
        indicators = []
        for l2 in locs:
            run.stats.locations_visited += 1
            ok = self.sat(phi.arg, t, l2, inner)
            if filter_after and not eval_label_expr(psi, labels[l2]):
                continue
            indicators.append(1 if ok else 0)
        if not indicators:
            run.stats.vacuity_count += 1
            return True
        return compare(fold_values(phi.op, indicators), phi.cmp, phi.c)

    def _pooled(self, task, op, locs, run: _Run):
        return fold_partials(locs, op, task, self.config.thread_count, backend=self.config.backend,
                             on_harvest=run.stats.absorb)

    # -- cached per-node tables --------------------------------------------------

    def _node(self, phi):
        entry = self._nodes.get(id(phi))
        if entry is None or entry[0] is not phi:
            # the entry keeps ``phi`` alive, so its id cannot be recycled
            entry = (phi, {}, {})
            self._nodes[id(phi)] = entry
        return entry

    def cost(self, phi: F.Formula, l: str) -> int:
        """Same recursion as :func:`sastl.formula.cost`, memoized per node and location."""
        memo = self._node(phi)[1]
        value = memo.get(l)
        if value is not None:
            return value
        if isinstance(phi, (F.TrueFormula, F.Atomic)):
            value = 1
        elif isinstance(phi, F.Not):
            value = 1 + self.cost(phi.arg, l)
        elif isinstance(phi, (F.And, F.Until)):
            value = self.cost(phi.left, l) + self.cost(phi.right, l)
        elif isinstance(phi, F.Aggregate):
            value = max(1, len(locations_in_range(self.graph, self.index, l, phi.domain)))
        else:
            n = max(1, len(locations_in_range(self.graph, self.index, l, phi.domain)))
            value = n * self.cost(phi.arg, l)
        memo[l] = value
        return value

    def sample_times(self, phi: F.Formula, l: str) -> list[float]:
        """Sorted sample times of the variables ``phi`` reads when evaluated at ``l``."""
        memo = self._node(phi)[2]
        value = memo.get(l)
        if value is not None:
            return value
        if isinstance(phi, F.TrueFormula):
            value = []
        elif isinstance(phi, F.Atomic):
            value = self.signal.times(phi.variable, l)
        elif isinstance(phi, F.Not):
            value = self.sample_times(phi.arg, l)
        elif isinstance(phi, (F.And, F.Until)):
            value = _union(self.sample_times(phi.left, l), self.sample_times(phi.right, l))
        elif isinstance(phi, F.Aggregate):
            locs = locations_in_range(self.graph, self.index, l, phi.domain)
            value = _union(*(self.signal.times(phi.variable, l2) for l2 in locs))
        else:
            locs = locations_in_range(self.graph, self.index, l, phi.domain)
            value = _union(*(self.sample_times(phi.arg, l2) for l2 in locs))
        memo[l] = value
        return value


def _union(*lists):
    nonempty = [x for x in lists if x]
    if not nonempty:
        return []
    if len(nonempty) == 1:
        return nonempty[0]
    return sorted(set().union(*nonempty))


class _SpatialTask:
    """Per-location work item evaluated inside a fold worker."""

    def __init__(self, engine: Monitor, phi, t: float, filter_after: bool):
        self.engine = engine
        self.phi = phi
        self.t = t
        self.filter_after = filter_after
        self.stats = None

    def spawn(self):
        local = type(self)(self.engine, self.phi, self.t, self.filter_after)
        local.stats = EvalStats()
        return local

    def harvest(self) -> EvalStats:
        return self.stats

    def _keep(self, l2) -> bool:
        return not self.filter_after or eval_label_expr(self.phi.domain.psi, self.engine.graph.labels[l2])


class _AggregateTask(_SpatialTask):
    def __call__(self, l2):
        self.stats.locations_visited += 1
        v = self.engine.signal.value_at(self.phi.variable, self.t, l2)
        if v is None or not self._keep(l2):
            return None
        return v


class _CountTask(_SpatialTask):
    def __call__(self, l2):
        self.stats.locations_visited += 1
        ok = self.engine.sat(self.phi.arg, self.t, l2, _Run(self.stats, False))
        if not self._keep(l2):
            return None
        return 1 if ok else 0


def monitor(phi: F.Formula, ctx: EvalContext) -> bool:
    """Satisfaction of ``phi`` at ``(ctx.t, ctx.location)``."""
    return Monitor(ctx.graph, ctx.signal, ctx.config, ctx.index).check(phi, ctx.t, ctx.location)
