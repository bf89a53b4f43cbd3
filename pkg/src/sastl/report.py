"""Monitor and benchmark reports: dataclasses, JSON schema, text rendering."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import jsonschema

_NUM = {"type": "number"}
_INT = {"type": "integer", "minimum": 0}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["metadata", "requirements"],
    "additionalProperties": False,
    "properties": {
        "metadata": {
            "type": "object",
            "required": ["thread_count", "cost_ordering", "times", "graph_nodes"],
            "properties": {
                "thread_count": {"type": "integer", "minimum": 1},
                "cost_ordering": {"type": "boolean"},
                "times": {"type": "array", "items": _NUM},
                "graph_nodes": _INT,
                "data_time_range": {"type": ["array", "null"], "items": _NUM, "minItems": 2, "maxItems": 2},
                "variables": {"type": "array", "items": {"type": "string"}},
            },
        },
        "requirements": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["name", "formula", "verdict", "wall_time", "atomic_evaluations",
                             "locations_visited", "vacuity_count", "points_checked", "violations"],
                "properties": {
                    "name": {"type": "string"},
                    "formula": {"type": "string"},
                    "verdict": {"type": "boolean"},
                    "wall_time": _NUM,
                    "atomic_evaluations": _INT,
                    "locations_visited": _INT,
                    "vacuity_count": _INT,
                    "points_checked": _INT,
                    "violations": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["t", "location"],
                            "properties": {"t": _NUM, "location": {"type": "string"}},
                        },
                    },
                },
            },
        },
    },
}


@dataclass
class RequirementResult:
    name: str
    formula: str
    verdict: bool
    wall_time: float = 0.0
    atomic_evaluations: int = 0
    locations_visited: int = 0
    vacuity_count: int = 0
    points_checked: int = 0
    violations: list[dict] = field(default_factory=list)


@dataclass
class MonitorReport:
    metadata: dict
    requirements: list[RequirementResult] = field(default_factory=list)

    @property
    def all_satisfied(self) -> bool:
        return all(r.verdict for r in self.requirements)

    def to_dict(self) -> dict:
        return {"metadata": self.metadata, "requirements": [asdict(r) for r in self.requirements]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "MonitorReport":
        data = json.loads(text)
        jsonschema.validate(data, REPORT_SCHEMA)
        return cls(data["metadata"], [RequirementResult(**r) for r in data["requirements"]])

    def to_text(self) -> str:
        if not self.requirements:
            return "no requirements\n"
        header = ("requirement", "verdict", "points", "time (s)", "atomics", "locations", "vacuous")
        rows = [
            (r.name, "SAT" if r.verdict else "VIOLATED", str(r.points_checked), f"{r.wall_time:.4f}",
             str(r.atomic_evaluations), str(r.locations_visited), str(r.vacuity_count))
            for r in self.requirements
        ]
        lines = _table(header, rows)
        for r in self.requirements:
            for v in r.violations:
                lines.append(f"  {r.name} violated at t={v['t']:g}, location {v['location']}")
        return "\n".join(lines) + "\n"


def validate_report(data: dict) -> None:
    jsonschema.validate(data, REPORT_SCHEMA)


@dataclass
class BenchmarkRow:
    name: str
    mode: str
    threads: int
    verdict: bool
    wall_time: float
    atomic_evaluations: int
    locations_visited: int


def benchmark_text(rows: list[BenchmarkRow]) -> str:
    header = ("requirement", "mode", "threads", "verdict", "time (s)", "atomics", "locations")
    body = [
        (r.name, r.mode, str(r.threads), "SAT" if r.verdict else "VIOLATED", f"{r.wall_time:.4f}",
         str(r.atomic_evaluations), str(r.locations_visited))
        for r in rows
    ]
    return "\n".join(_table(header, body)) + "\n"


def benchmark_json(rows: list[BenchmarkRow]) -> str:
    return json.dumps({"benchmark": [asdict(r) for r in rows]}, indent=2)


def _table(header, rows) -> list[str]:
    widths = [max(len(str(c)) for c in col) for col in zip(header, *rows)]
    fmt = "  ".join("{:<%d}" % w if i == 0 else "{:>%d}" % w for i, w in enumerate(widths))
    lines = [fmt.format(*header), fmt.format(*("-" * w for w in widths))]
    lines.extend(fmt.format(*row) for row in rows)
    return lines
