"""Multi-variable spatio-temporal signals with explicit undefined samples.

A value is either a finite float or ``None`` (undefined). Internally each
``(variable, location)`` stream keeps its sorted timestamps plus a
timestamp -> value map for exact lookups.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_left, bisect_right
from pathlib import Path
from typing import Iterable, Iterator

from .errors import SignalFormatError, UnknownVariableError
from .spatial import PoIGraph, DistanceIndex, SpatialDomain, locations_in_range

CSV_HEADER = ("time", "location", "variable", "value")


def _check_time(t, line=None) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise SignalFormatError(f"invalid timestamp {t!r}", line)
    return t


class _Stream:
    __slots__ = ("times", "values")

    def __init__(self, times: list[float], values: dict[float, float | None]):
        self.times = times
        self.values = values


class SpatioTemporalSignal:
    """Immutable store of ``(variable, location) -> [(time, value)]`` streams.

    ``streams`` maps ``(variable, location)`` to a sequence of ``(t, value)``
    pairs with strictly increasing ``t``; ``value`` is a float or ``None``.
    ``variables`` may declare variables that have no samples at all.
    """

    def __init__(self, streams=None, variables: Iterable[str] = (), time_unit: str = "min"):
        self.time_unit = time_unit
        self._streams: dict[tuple[str, str], _Stream] = {}
        declared = set(variables)
        for (var, loc), samples in (streams or {}).items():
            times: list[float] = []
            values: dict[float, float | None] = {}
            for t, v in samples:
                t = _check_time(t)
                if times and t <= times[-1]:
                    raise SignalFormatError(
                        f"timestamps for ({var!r}, {loc!r}) are not strictly increasing at t={t}"
                    )
                times.append(t)
                values[t] = _check_value(v)
            self._streams[(var, loc)] = _Stream(times, values)
            declared.add(var)
        self.variables: frozenset[str] = frozenset(declared)
        self._by_var: dict[str, list[str]] = {}
        for var, loc in self._streams:
            self._by_var.setdefault(var, []).append(loc)

    @classmethod
    def from_records(cls, records: Iterable[tuple], variables: Iterable[str] = (), time_unit: str = "min"):
        """Build from ``(t, location, variable, value)`` rows in any order."""
        grouped: dict[tuple[str, str], list[tuple[float, float | None]]] = {}
        for t, loc, var, value in records:
            grouped.setdefault((var, loc), []).append((_check_time(t), value))
        for key, samples in grouped.items():
            samples.sort(key=lambda s: s[0])
            for a, b in zip(samples, samples[1:]):
                if a[0] == b[0]:
                    raise SignalFormatError(f"duplicate sample for {key!r} at t={a[0]}")
        return cls(grouped, variables=variables, time_unit=time_unit)

    def with_variables(self, extra: Iterable[str]) -> "SpatioTemporalSignal":
        """Copy declaring extra (sample-free) variables."""
        out = object.__new__(SpatioTemporalSignal)
        out.__dict__.update(self.__dict__)
        out.variables = self.variables | frozenset(extra)
        return out

    # -- queries -----------------------------------------------------------

    def require(self, variable: str) -> None:
        if variable not in self.variables:
            raise UnknownVariableError(variable)

    def value_at(self, variable: str, t: float, location: str) -> float | None:
        """The sample recorded exactly at ``t``; ``None`` if undefined or absent."""
        stream = self._streams.get((variable, location))
        if stream is None:
            if variable not in self.variables:
                raise UnknownVariableError(variable)
            return None
        return stream.values.get(t)

    def times(self, variable: str, location: str) -> list[float]:
        stream = self._streams.get((variable, location))
        return stream.times if stream is not None else []

    def time_samples_in(self, variable: str, location: str, start: float, end: float) -> list[tuple[float, float | None]]:
        """Recorded samples with ``start <= t <= end``, time ascending."""
        if start > end:
            raise ValueError(f"empty window [{start}, {end}]")
        stream = self._streams.get((variable, location))
        if stream is None:
            return []
        lo = bisect_left(stream.times, start)
        hi = bisect_right(stream.times, end)
        return [(t, stream.values[t]) for t in stream.times[lo:hi]]

    def locations(self, variable: str | None = None) -> list[str]:
        if variable is None:
            return sorted({loc for _, loc in self._streams})
        return list(self._by_var.get(variable, ()))

    def records(self) -> Iterator[tuple[float, str, str, float | None]]:
        """All samples as ``(t, location, variable, value)``."""
        for (var, loc), stream in self._streams.items():
            for t in stream.times:
                yield t, loc, var, stream.values[t]

    def time_range(self) -> tuple[float, float] | None:
        starts = [s.times[0] for s in self._streams.values() if s.times]
        if not starts:
            return None
        return min(starts), max(s.times[-1] for s in self._streams.values() if s.times)

    def __len__(self):
        return sum(len(s.times) for s in self._streams.values())

    def __eq__(self, other):
        if not isinstance(other, SpatioTemporalSignal):
            return NotImplemented
        if self.variables != other.variables or self._streams.keys() != other._streams.keys():
            return False
        for key, stream in self._streams.items():
            theirs = other._streams[key]
            if stream.times != theirs.times:
                return False
            for t in stream.times:
                a, b = stream.values[t], theirs.values[t]
                if (a is None) != (b is None) or (a is not None and a.hex() != b.hex()):
                    return False
        return True


def _check_value(v) -> float | None:
    if v is None:
        return None
    v = float(v)
    if math.isnan(v):
        return None
    if math.isinf(v):
        raise SignalFormatError(f"non-finite sample value {v}")
    return v


def alpha(signal: SpatioTemporalSignal, variable: str, domain: SpatialDomain, t: float, location: str,
          graph: PoIGraph, index: DistanceIndex) -> list[float]:
    """Defined values of ``variable`` at ``t`` over the domain around ``location``."""
    signal.require(variable)
    out = []
    for l2 in locations_in_range(graph, index, location, domain):
        v = signal.value_at(variable, t, l2)
        if v is not None:
            out.append(v)
    return out


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def ingest_csv(path, time_unit: str = "min") -> SpatioTemporalSignal:
    """Load ``time,location,variable,value`` rows; empty or ``NaN`` value is undefined."""
    seen: dict[tuple[float, str, str], int] = {}
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return SpatioTemporalSignal(time_unit=time_unit)
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise SignalFormatError(f"expected header {','.join(CSV_HEADER)}", 1)
        for row in reader:
            line = reader.line_num
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise SignalFormatError(f"expected 4 fields, got {len(row)}", line)
            t_raw, loc, var, v_raw = (field.strip() for field in row)
            try:
                t = _check_time(t_raw, line)
            except ValueError:
                raise SignalFormatError(f"bad time {t_raw!r}", line) from None
            if not loc or not var:
                raise SignalFormatError("empty location or variable", line)
            if v_raw == "" or v_raw.lower() == "nan":
                value = None
            else:
                try:
                    value = _check_value(v_raw)
                except SignalFormatError as exc:
                    raise SignalFormatError(exc.message, line) from None
                except ValueError:
                    raise SignalFormatError(f"bad value {v_raw!r}", line) from None
            key = (t, loc, var)
            if key in seen:
                raise SignalFormatError(
                    f"duplicate sample for ({var!r}, {loc!r}) at t={t} (first seen on line {seen[key]})", line
                )
            seen[key] = line
            records.append((t, loc, var, value))
    return SpatioTemporalSignal.from_records(records, time_unit=time_unit)


def ingest_many(paths, time_unit: str = "min") -> SpatioTemporalSignal:
    """Merge several CSV files into one signal."""
    if len(paths) == 1:
        return ingest_csv(paths[0], time_unit)
    records = []
    for p in paths:
        records.extend(ingest_csv(p, time_unit).records())
    return SpatioTemporalSignal.from_records(records, time_unit=time_unit)


def _fmt(x: float) -> str:
    return repr(float(x))


def export_csv(signal: SpatioTemporalSignal, path) -> None:
    rows = sorted(signal.records(), key=lambda r: (r[0], r[1], r[2]))
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t, loc, var, value in rows:
            writer.writerow((_fmt(t), loc, var, "" if value is None else _fmt(value)))
