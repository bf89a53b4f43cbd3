"""SaSTL abstract syntax, printing, and static measures over formulas.

The core node types are ``TrueFormula``, ``Atomic``, ``Not``, ``And``,
``Until``, ``Aggregate`` and ``Count``. Disjunction, implication, the
eventually/always temporal operators and the everywhere/somewhere spatial
operators are built from the core by the helper constructors below.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass

from .spatial import AnyLabel, DistanceIndex, PoIGraph, SpatialDomain, label_to_text, locations_in_range

COMPARATORS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}
AGG_OPS = ("max", "min", "sum", "avg")


def compare(value: float, cmp: str, c: float) -> bool:
    return COMPARATORS[cmp](value, c)


@dataclass(frozen=True, slots=True)
class TrueFormula:
    pass


@dataclass(frozen=True, slots=True)
class Atomic:
    variable: str
    cmp: str
    c: float

    def __post_init__(self):
        if self.cmp not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.cmp!r}")


@dataclass(frozen=True, slots=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Until:
    left: "Formula"
    right: "Formula"
    lo: float
    hi: float

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi) or math.isinf(self.hi):
            raise ValueError(f"bad time interval [{self.lo}, {self.hi}]")


@dataclass(frozen=True, slots=True)
class Aggregate:
    op: str
    domain: SpatialDomain
    variable: str
    cmp: str
    c: float

    def __post_init__(self):
        if self.op not in AGG_OPS:
            raise ValueError(f"unknown aggregation op {self.op!r}")
        if self.cmp not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.cmp!r}")


@dataclass(frozen=True, slots=True)
class Count:
    op: str
    domain: SpatialDomain
    arg: "Formula"
    cmp: str
    c: float

    def __post_init__(self):
        if self.op not in AGG_OPS:
            raise ValueError(f"unknown aggregation op {self.op!r}")
        if self.cmp not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.cmp!r}")


Formula = TrueFormula | Atomic | Not | And | Until | Aggregate | Count

TRUE = TrueFormula()
FALSE = Not(TRUE)


# -- derived forms ------------------------------------------------------------


def lor(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def implies(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def eventually(lo: float, hi: float, phi: Formula) -> Formula:
    return Until(TRUE, phi, lo, hi)


def always(lo: float, hi: float, phi: Formula) -> Formula:
    return Not(eventually(lo, hi, Not(phi)))


def everywhere(domain: SpatialDomain, phi: Formula) -> Formula:
    return Count("min", domain, phi, ">", 0.0)


def somewhere(domain: SpatialDomain, phi: Formula) -> Formula:
    return Count("max", domain, phi, ">", 0.0)


# -- printing -----------------------------------------------------------------


def _num(x: float) -> str:
    if x == math.inf:
        return "inf"
    return repr(float(x))


def _domain_text(d: SpatialDomain) -> str:
    return f"[{_num(d.d1)},{_num(d.d2)}],{label_to_text(d.psi)}"


def to_text(phi: Formula) -> str:
    """Render a formula in the concrete grammar; ``parse`` inverts it."""
    if isinstance(phi, TrueFormula):
        return "true"
    if isinstance(phi, Atomic):
        return f"{phi.variable} {phi.cmp} {_num(phi.c)}"
    if isinstance(phi, Not):
        return f"not {_wrap(phi.arg)}"
    if isinstance(phi, And):
        return f"({to_text(phi.left)} and {to_text(phi.right)})"
    if isinstance(phi, Until):
        return f"({to_text(phi.left)} until[{_num(phi.lo)},{_num(phi.hi)}] {to_text(phi.right)})"
    if isinstance(phi, Aggregate):
        return f"agg({phi.op},{_domain_text(phi.domain)})({phi.variable}) {phi.cmp} {_num(phi.c)}"
    if isinstance(phi, Count):
        return f"count({phi.op},{_domain_text(phi.domain)})({to_text(phi.arg)}) {phi.cmp} {_num(phi.c)}"
    raise TypeError(f"not a formula: {phi!r}")


def _wrap(phi: Formula) -> str:
    text = to_text(phi)
    if isinstance(phi, (Atomic, Aggregate, Count)):
        return f"({text})"
    return text


# -- static measures ------------------------------------------------------------


def cost(phi: Formula, l: str, graph: PoIGraph, index: DistanceIndex, _memo=None) -> int:
    """Per-location monitoring cost used to order conjunct evaluation.

    Spatial terms are clamped below by one so the cost stays positive even
    when the domain around ``l`` is empty.
    """
    if _memo is not None:
        key = (id(phi), l)
        hit = _memo.get(key)
        if hit is not None:
            return hit
    if isinstance(phi, (TrueFormula, Atomic)):
        value = 1
    elif isinstance(phi, Not):
        value = 1 + cost(phi.arg, l, graph, index, _memo)
    elif isinstance(phi, (And, Until)):
        value = cost(phi.left, l, graph, index, _memo) + cost(phi.right, l, graph, index, _memo)
    elif isinstance(phi, Aggregate):
        value = max(1, len(locations_in_range(graph, index, l, phi.domain)))
    elif isinstance(phi, Count):
        n = max(1, len(locations_in_range(graph, index, l, phi.domain)))
        value = n * cost(phi.arg, l, graph, index, _memo)
    else:
        raise TypeError(f"not a formula: {phi!r}")
    if _memo is not None:
        _memo[key] = value
    return value


def subformulas(phi: Formula):
    """Pre-order traversal."""
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.arg)
        elif isinstance(node, (And, Until)):
            stack.extend((node.right, node.left))
        elif isinstance(node, Count):
            stack.append(node.arg)


def free_variables(phi: Formula) -> set[str]:
    return {n.variable for n in subformulas(phi) if isinstance(n, (Atomic, Aggregate))}


def label_names(phi: Formula) -> set[str]:
    from .spatial import LabelNot, LabelOr, Prop

    names = set()

    def walk(psi):
        if isinstance(psi, Prop):
            names.add(psi.name)
        elif isinstance(psi, LabelNot):
            walk(psi.arg)
        elif isinstance(psi, LabelOr):
            walk(psi.left)
            walk(psi.right)

    for node in subformulas(phi):
        if isinstance(node, (Aggregate, Count)):
            walk(node.domain.psi)
    return names


def max_horizon(phi: Formula) -> float:
    """Furthest time offset past the evaluation time the monitor may read."""
    if isinstance(phi, (TrueFormula, Atomic, Aggregate)):
        return 0.0
    if isinstance(phi, (Not, Count)):
        return max_horizon(phi.arg)
    if isinstance(phi, And):
        return max(max_horizon(phi.left), max_horizon(phi.right))
    if isinstance(phi, Until):
        return phi.hi + max(max_horizon(phi.left), max_horizon(phi.right))
    raise TypeError(f"not a formula: {phi!r}")


def depth(phi: Formula) -> int:
    if isinstance(phi, (TrueFormula, Atomic, Aggregate)):
        return 1
    if isinstance(phi, (Not, Count)):
        return 1 + depth(phi.arg)
    return 1 + max(depth(phi.left), depth(phi.right))


def whole_domain_anchor(phi: Formula) -> bool:
    """True when the outermost operator is spatial over the whole band, so
    the evaluation location does not affect the verdict on a connected graph."""
    return isinstance(phi, (Count, Aggregate)) and phi.domain.whole


__all__ = [
    "AGG_OPS", "COMPARATORS", "TRUE", "FALSE", "AnyLabel",
    "TrueFormula", "Atomic", "Not", "And", "Until", "Aggregate", "Count", "Formula",
    "lor", "implies", "eventually", "always", "everywhere", "somewhere",
    "compare", "to_text", "cost", "subformulas", "free_variables", "label_names",
    "max_horizon", "depth", "whole_domain_anchor",
]
