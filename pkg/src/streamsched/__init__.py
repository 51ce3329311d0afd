"""Schedule canonical task graphs onto streaming dataflow devices.

Typical flow: build or ``generate`` a :class:`TaskGraph`, ``partition`` it into
spatial blocks, ``schedule_streaming``, size FIFOs with ``buffer_plan`` and
check the result with ``simulate``.
"""
from .analysis import analyze, fixed_point_intervals, node_levels, streaming_depth, streaming_intervals, work
from .buffers import BufferPlan, buffer_plan
from .generators import GenConfig, generate, pattern
from .graph import GraphError, Node, NodeKind, TaskGraph, check, load, save, topological_order, validate
from .metrics import MetricsRow, compute_metrics
from .partition import SpatialPartition, Variant, partition
from .scheduler import Schedule, schedule_nonstreaming, schedule_streaming
from .simulator import KERNEL, SimReport, simulate

__all__ = [
    "analyze", "fixed_point_intervals", "node_levels", "streaming_depth", "streaming_intervals", "work",
    "BufferPlan", "buffer_plan", "GenConfig", "generate", "pattern",
    "GraphError", "Node", "NodeKind", "TaskGraph", "check", "load", "save", "topological_order", "validate",
    "MetricsRow", "compute_metrics", "SpatialPartition", "Variant", "partition",
    "Schedule", "schedule_nonstreaming", "schedule_streaming", "KERNEL", "SimReport", "simulate",
]
