"""Map/reduce folding of per-location results over a pool of workers.

Workers pull one task at a time from a shared queue, fold what they compute
into a private :class:`PartialFold`, and the caller merges the partials.
Sums are accumulated as exact rationals so the reduced value does not
depend on how tasks were scheduled; only the final reduce divides for
``avg``.

Two backends exist. ``"thread"`` runs workers as threads of this process.
``"process"`` runs them in a persistent pool of worker processes, which is
what actually scales CPU-bound evaluation under CPython. Evaluators sent to
the process pool must be picklable; objects that carry a ``_share_key``
attribute are shipped to each worker once and then referenced by key.

An evaluator may optionally implement ``spawn()`` (returns the worker-local
evaluator), and the worker-local object ``harvest()`` (returns a picklable
payload collected after the worker finishes, e.g. counters).
"""

from __future__ import annotations

import atexit
import io
import itertools
import math
import multiprocessing as mp
import pickle
import queue
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Sequence

from .errors import SaSTLError

_IDENTITY = {"min": math.inf, "max": -math.inf, "sum": Fraction(0), "avg": Fraction(0)}


@dataclass(frozen=True, slots=True)
class PartialFold:
    """Running ``op`` over some elements; sums are exact ``Fraction``s."""

    op: str
    accum: Any
    count: int = 0

    @classmethod
    def identity(cls, op: str) -> "PartialFold":
        if op not in _IDENTITY:
            raise ValueError(f"unknown aggregation op {op!r}")
        return cls(op, _IDENTITY[op], 0)

    def add(self, value) -> "PartialFold":
        op = self.op
        if op == "min":
            acc = value if value < self.accum else self.accum
        elif op == "max":
            acc = value if value > self.accum else self.accum
        else:
            acc = self.accum + Fraction(value)
        return PartialFold(op, acc, self.count + 1)

    def result(self) -> float:
        """Final value; ``avg`` of nothing is NaN, other ops return their identity."""
        if self.op == "sum":
            return float(self.accum)
        if self.op == "avg":
            return float(self.accum) / self.count if self.count else math.nan
        return float(self.accum)


def merge(a: PartialFold, b: PartialFold) -> PartialFold:
    if a.op != b.op:
        raise ValueError(f"cannot merge {a.op!r} fold with {b.op!r} fold")
    if a.op == "min":
        acc = min(a.accum, b.accum)
    elif a.op == "max":
        acc = max(a.accum, b.accum)
    else:
        acc = a.accum + b.accum
    return PartialFold(a.op, acc, a.count + b.count)


def fold_values(op: str, values: Sequence[float]) -> float:
    """Sequential fold; equal bit-for-bit to ``PartialFold`` reduction."""
    if op == "min":
        return float(min(values))
    if op == "max":
        return float(max(values))
    total = math.fsum(values)
    return total if op == "sum" else total / len(values)


class WorkerError(SaSTLError):
    """A worker failed in a way that could not be attributed to a task."""


# ---------------------------------------------------------------------------
# public entry point
# ---------------------------------------------------------------------------


def parallel_fold(tasks: Sequence, op: str, evaluate: Callable, threads: int = 1, *,
                  backend: str = "thread", on_harvest: Callable | None = None) -> tuple[float, int]:
    """Fold ``evaluate(task)`` over ``tasks`` with ``op``.

    ``evaluate`` returns a number, or ``None`` to contribute nothing. Returns
    ``(value, count)`` where ``count`` is the number of folded elements. The
    first failing task in task order has its exception re-raised.
    """
    fold = fold_partials(tasks, op, evaluate, threads, backend=backend, on_harvest=on_harvest)
    return fold.result(), fold.count


def fold_partials(tasks: Sequence, op: str, evaluate: Callable, threads: int = 1, *,
                  backend: str = "thread", on_harvest: Callable | None = None) -> PartialFold:
    if threads < 1:
        raise ValueError("threads must be >= 1")
    tasks = list(tasks)
    if threads == 1:
        return _sequential(tasks, op, evaluate, on_harvest)
    if backend == "thread":
        return _thread_fold(tasks, op, evaluate, threads, on_harvest)
    if backend == "process":
        return _pool(threads).fold(tasks, op, evaluate, on_harvest)
    raise ValueError(f"unknown backend {backend!r}")


def _sequential(tasks, op, evaluate, on_harvest):
    local = evaluate.spawn() if hasattr(evaluate, "spawn") else evaluate
    acc = PartialFold.identity(op)
    for task in tasks:
        v = local(task)
        if v is not None:
            acc = acc.add(v)
    if on_harvest is not None and hasattr(local, "harvest"):
        on_harvest(local.harvest())
    return acc


def _reduce(op, partials, errors):
    if errors:
        _, exc = min(errors, key=lambda e: e[0])
        raise exc
    acc = PartialFold.identity(op)
    for p in partials:
        acc = merge(acc, p)
    return acc


# ---------------------------------------------------------------------------
# threads
# ---------------------------------------------------------------------------


class _FirstError:
    """Lowest failing task index seen so far; tasks below it always run."""

    def __init__(self):
        self.index = math.inf
        self.lock = threading.Lock()

    def record(self, idx):
        with self.lock:
            if idx < self.index:
                self.index = idx


def _thread_fold(tasks, op, evaluate, threads, on_harvest):
    work: queue.SimpleQueue = queue.SimpleQueue()
    for item in enumerate(tasks):
        work.put(item)
    for _ in range(threads):
        work.put(None)
    first = _FirstError()
    partials: list = [None] * threads
    harvests: list = [None] * threads
    errors: list = []

    def worker(wid):
        local = evaluate.spawn() if hasattr(evaluate, "spawn") else evaluate
        acc = PartialFold.identity(op)
        while True:
            item = work.get()
            if item is None:
                break
            idx, task = item
            if idx > first.index:
                continue
            try:
                v = local(task)
            except BaseException as exc:  # noqa: BLE001 - surfaced by _reduce
                first.record(idx)
                errors.append((idx, exc))
                continue
            if v is not None:
                acc = acc.add(v)
        partials[wid] = acc
        if hasattr(local, "harvest"):
            harvests[wid] = local.harvest()

    pool = [threading.Thread(target=worker, args=(w,), daemon=True) for w in range(threads)]
    for th in pool:
        th.start()
    for th in pool:
        th.join()
    if on_harvest is not None:
        for h in harvests:
            if h is not None:
                on_harvest(h)
    return _reduce(op, partials, errors)


# ---------------------------------------------------------------------------
# processes
# ---------------------------------------------------------------------------

_SHARED_CAPACITY = 4


class _SharingPickler(pickle.Pickler):
    def __init__(self, file, found: dict):
        super().__init__(file, protocol=pickle.HIGHEST_PROTOCOL)
        self.found = found

    def persistent_id(self, obj):
        if isinstance(obj, type):
            return None
        key = getattr(obj, "_share_key", None)
        if key is None:
            return None
        self.found.setdefault(key, obj)
        return key


class _SharingUnpickler(pickle.Unpickler):
    def __init__(self, file, cache):
        super().__init__(file)
        self.cache = cache

    def persistent_load(self, pid):
        return self.cache[pid]


def _touch(lru: OrderedDict, keys, shipped=None):
    for key in keys:
        if shipped is not None and key in shipped:
            lru[key] = shipped[key]
        lru.move_to_end(key)
    while len(lru) > _SHARED_CAPACITY:
        lru.popitem(last=False)


def _safe_exc(exc):
    try:
        pickle.loads(pickle.dumps(exc))
        return exc
    except Exception:
        return WorkerError(f"{type(exc).__name__}: {exc}")


def _worker_main(wid, inbox, tasks, results, first_error):
    shared: OrderedDict = OrderedDict()
    while True:
        msg = inbox.get()
        if msg is None:
            return
        job, op, keys, shipped_blobs, payload = msg
        try:
            shipped = {k: pickle.loads(b) for k, b in shipped_blobs.items()}
            _touch(shared, keys, shipped)
            evaluate = _SharingUnpickler(io.BytesIO(payload), shared).load()
            local = evaluate.spawn() if hasattr(evaluate, "spawn") else evaluate
            setup_error = None
        except BaseException as exc:  # noqa: BLE001
            local, setup_error = None, exc
        acc = PartialFold.identity(op)
        error = None
        while True:
            item = tasks.get()
            if item is None:
                break
            idx, task = item
            if setup_error is not None or idx > first_error.value:
                continue
            try:
                v = local(task)
            except BaseException as exc:  # noqa: BLE001
                with first_error.get_lock():
                    if idx < first_error.value:
                        first_error.value = idx
                if error is None or idx < error[0]:
                    error = (idx, _safe_exc(exc))
                continue
            if v is not None:
                acc = acc.add(v)
        harvest = None
        if local is not None and hasattr(local, "harvest"):
            try:
                harvest = local.harvest()
            except BaseException as exc:  # noqa: BLE001
                setup_error = setup_error or exc
        if setup_error is not None:
            error = (-1, _safe_exc(setup_error))
        results.put((job, wid, acc, error, harvest))


class _ProcessPool:
    def __init__(self, size: int):
        # fork keeps worker start cheap and needs no importable __main__
        ctx = mp.get_context("fork" if "fork" in mp.get_all_start_methods() else "spawn")
        self.size = size
        self._tasks = ctx.Queue()
        self._results = ctx.Queue()
        self._first_error = ctx.Value("q", 0)
        self._inboxes = [ctx.Queue() for _ in range(size)]
        self._procs = [
            ctx.Process(target=_worker_main, args=(w, self._inboxes[w], self._tasks, self._results,
                                                   self._first_error), daemon=True)
            for w in range(size)
        ]
        for p in self._procs:
            p.start()
        self._shared: OrderedDict = OrderedDict()
        self._jobs = itertools.count(1)
        self._lock = threading.Lock()

    def fold(self, tasks, op, evaluate, on_harvest):
        with self._lock:
            found: dict = {}
            buf = io.BytesIO()
            _SharingPickler(buf, found).dump(evaluate)
            keys = list(found)
            shipped = {k: pickle.dumps(found[k], pickle.HIGHEST_PROTOCOL) for k in keys if k not in self._shared}
            _touch(self._shared, keys, {k: True for k in shipped})
            job = next(self._jobs)
            self._first_error.value = 2**62
            msg = (job, op, keys, shipped, buf.getvalue())
            for inbox in self._inboxes:
                inbox.put(msg)
            for item in enumerate(tasks):
                self._tasks.put(item)
            for _ in self._procs:
                self._tasks.put(None)
            replies = {}
            while len(replies) < self.size:
                try:
                    reply = self._results.get(timeout=1.0)
                except queue.Empty:
                    if not all(p.is_alive() for p in self._procs):
                        self._broken()
                        raise WorkerError("a worker process died during a parallel fold") from None
                    continue
                if reply[0] == job:
                    replies[reply[1]] = reply
        partials, errors = [], []
        for wid in range(self.size):
            _, _, acc, error, harvest = replies[wid]
            partials.append(acc)
            if error is not None:
                errors.append(error)
            if on_harvest is not None and harvest is not None:
                on_harvest(harvest)
        return _reduce(op, partials, errors)

    def _broken(self):
        _POOLS.pop(self.size, None)
        self.close()

    def close(self):
        for inbox in self._inboxes:
            try:
                inbox.put(None)
            except (OSError, ValueError):
                pass
        for p in self._procs:
            p.join(timeout=1.0)
            if p.is_alive():
                p.terminate()


_POOLS: dict[int, _ProcessPool] = {}
_POOLS_LOCK = threading.Lock()


def _pool(size: int) -> _ProcessPool:
    with _POOLS_LOCK:
        pool = _POOLS.get(size)
        if pool is None:
            pool = _POOLS[size] = _ProcessPool(size)
        return pool


@atexit.register
def shutdown_pools() -> None:
    """Stop every persistent worker process."""
    with _POOLS_LOCK:
        pools = list(_POOLS.values())
        _POOLS.clear()
    for pool in pools:
        pool.close()
