"""Adaptive multi-way stream join with runtime probe-order optimization."""

from ._kernels import IMPLEMENTATION as KERNEL
from .backend import BackendConfig, StateBackend, Structure
from .cost import CostParams, PredictedStats, f_keys, match_cost, query_cost, sequence_cost
from .engine import ClockMode, EngineConfig, JoinResult, ListSink, MultiJoinEngine, RunReport, SinkError
from .forecast import SmoothingParams, SmoothingSet, SmoothState, forecast_all
from .model import (
    ConfigError,
    JoinEdge,
    JoinGraph,
    MalformedTupleError,
    ProbeOrderTable,
    ProbePair,
    ProbeSequence,
    Tuple,
    validate_sequence,
)
from .optimizer import Strategy, dp_pick, get_sequences, select_order
from .stats import CycleStats, PairCounters, StatHistory, close_cycle, record_probe

__version__ = "0.1.0"

__all__ = [
    "KERNEL",
    "BackendConfig",
    "StateBackend",
    "Structure",
    "CostParams",
    "PredictedStats",
    "f_keys",
    "match_cost",
    "query_cost",
    "sequence_cost",
    "ClockMode",
    "EngineConfig",
    "JoinResult",
    "ListSink",
    "MultiJoinEngine",
    "RunReport",
    "SinkError",
    "SmoothingParams",
    "SmoothingSet",
    "SmoothState",
    "forecast_all",
    "ConfigError",
    "JoinEdge",
    "JoinGraph",
    "MalformedTupleError",
    "ProbeOrderTable",
    "ProbePair",
    "ProbeSequence",
    "Tuple",
    "validate_sequence",
    "Strategy",
    "dp_pick",
    "get_sequences",
    "select_order",
    "CycleStats",
    "PairCounters",
    "StatHistory",
    "close_cycle",
    "record_probe",
]
