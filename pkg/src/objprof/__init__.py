"""Trace-driven object-centric memory profiling.

Samples of memory accesses are charged to the allocation call path of the
object whose address range contains them, with GC relocation and
reclamation tracked through the trace.
"""
from .analyzer import MergedProfile, Report, merge_profiles, numa_report, rank, render
from .attribution import Engine, EngineConfig, Profile, numa_classify, run, run_parallel
from .cct import Cct, CctNode
from .interval_index import Interval, IntervalIndex
from .trace import (
    Alloc, CallPath, Event, Frame, Free, GcEnd, GcStart, MetricKind, Move, Sample,
    read_trace, validate_trace, write_trace,
)

__version__ = "0.1.0"
