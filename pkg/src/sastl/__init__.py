"""Spatial aggregation signal temporal logic: parsing and monitoring."""

from .errors import (
    GraphError,
    ParseError,
    SaSTLError,
    SignalFormatError,
    UnknownLocationError,
    UnknownVariableError,
)
from .formula import (
    Aggregate,
    And,
    Atomic,
    Count,
    Not,
    TrueFormula,
    Until,
    always,
    cost,
    eventually,
    everywhere,
    free_variables,
    implies,
    lor,
    max_horizon,
    somewhere,
    to_text,
)
from .monitor import EngineConfig, EvalContext, EvalStats, Monitor, monitor
from .oracle import oracle_monitor
from .parallel import PartialFold, merge, parallel_fold
from .parser import Requirement, load_requirements, parse, parse_requirements
from .signals import SpatioTemporalSignal, alpha, export_csv, ingest_csv
from .spatial import (
    AnyLabel,
    DistanceIndex,
    LabelNot,
    LabelOr,
    PoIGraph,
    Prop,
    SpatialDomain,
    eval_label_expr,
    load_graph,
    locations_in_range,
    save_graph,
    weighted_distance,
)

__version__ = "0.1.0"
