"""Brute-force reference attribution.

Keeps a flat list of live ``[start, end)`` records and resolves every sample
by scanning all of them.  It is slow on purpose and shares no code with the
engine or the interval index, so agreement between the two is meaningful.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..attribution import EngineConfig
from ..trace import (
    NO_NODE, Alloc, CallPath, Event, Free, GcEnd, GcStart, Move, Sample,
    TraceOrderError, TraceStructureError, format_path,
)


@dataclass
class SiteTally:
    metrics: dict = field(default_factory=dict)  # MetricKind -> total
    remote: int = 0
    local: int = 0
    alloc_count: int = 0
    bytes: int = 0

    def is_zero(self) -> bool:
        return not (any(self.metrics.values()) or self.remote or self.local
                    or self.alloc_count or self.bytes)


@dataclass
class Summary:
    """Per-site counters plus the unattributed bucket, keyed by alloc path."""
    sites: dict = field(default_factory=dict)  # CallPath -> SiteTally
    unattributed: dict = field(default_factory=dict)
    unattributed_samples: int = 0

    def site(self, path: CallPath) -> SiteTally:
        t = self.sites.get(path)
        if t is None:
            t = self.sites[path] = SiteTally()
        return t

    def add_unattributed(self, kind, value) -> None:
        self.unattributed[kind] = self.unattributed.get(kind, 0) + value
        self.unattributed_samples += 1


def summarize(merged) -> Summary:
    """Project a MergedProfile onto the counters the oracle computes."""
    out = Summary()
    for path, agg in merged.aggregates.items():
        out.sites[path] = SiteTally(dict(agg.metrics), agg.remote_count, agg.local_count,
                                    agg.allocation_count, agg.total_bytes)
    out.unattributed = dict(merged.unattributed)
    out.unattributed_samples = merged.unattributed_samples
    return out


def diff_summaries(got: Summary, want: Summary, got_name="engine", want_name="oracle") -> list[str]:
    """Exact comparison; returns one line per differing field."""
    out = []

    def clean(m):
        return {k: v for k, v in m.items() if v}

    paths = sorted(set(got.sites) | set(want.sites))
    for path in paths:
        a = got.sites.get(path, SiteTally())
        b = want.sites.get(path, SiteTally())
        label = format_path(path)
        if clean(a.metrics) != clean(b.metrics):
            out.append(f"{label}: metrics {got_name}={_fmt(a.metrics)} {want_name}={_fmt(b.metrics)}")
        for name in ("remote", "local", "alloc_count", "bytes"):
            va, vb = getattr(a, name), getattr(b, name)
            if va != vb:
                out.append(f"{label}: {name} {got_name}={va} {want_name}={vb}")
    if clean(got.unattributed) != clean(want.unattributed):
        out.append(f"unattributed: {got_name}={_fmt(got.unattributed)} "
                   f"{want_name}={_fmt(want.unattributed)}")
    if got.unattributed_samples != want.unattributed_samples:
        out.append(f"unattributed samples: {got_name}={got.unattributed_samples} "
                   f"{want_name}={want.unattributed_samples}")
    return out


def _fmt(metrics: dict) -> str:
    return "{" + ", ".join(f"{k.value}: {metrics[k]}" for k in sorted(metrics) if metrics[k]) + "}"


class _Obj:
    def __init__(self, path, size):
        self.path = path
        self.size = size
        self.live = True


def oracle_attribute(trace: Iterable[Event], config: Optional[EngineConfig] = None,
                     attributions: Optional[dict] = None) -> Summary:
    """Attribute every sample by linear scan over live ranges.

    If ``attributions`` is given it is filled with ``seq -> site path``
    (``None`` for unattributed samples).
    """
    config = config or EngineConfig()
    out = Summary()
    records = []  # [start, end, obj]
    by_id = {}
    seen_ids = set()
    pending = []  # [seq, src, dst, obj, discovered]
    in_gc = False
    last_seq = -1

    def evict(start, end):
        for rec in [r for r in records if r[0] < end and start < r[1]]:
            records.remove(rec)
            rec[2].live = False

    for e in trace:
        if e.seq <= last_seq:
            raise TraceOrderError(f"seq {e.seq}: seq-regression")
        last_seq = e.seq
        b = e.body

        if isinstance(b, Alloc):
            if b.object_id in seen_ids:
                raise TraceStructureError(f"seq {e.seq}: duplicate-object-id")
            seen_ids.add(b.object_id)
            if b.size < config.min_size:
                continue
            obj = _Obj(b.path, b.size)
            by_id[b.object_id] = obj
            evict(b.base, b.base + b.size)
            records.append([b.base, b.base + b.size, obj])
            t = out.site(b.path)
            t.alloc_count += 1
            t.bytes += b.size

        elif isinstance(b, Free):
            obj = by_id.get(b.object_id)
            if obj is None or not obj.live:
                continue
            records[:] = [r for r in records if r[2] is not obj]
            obj.live = False

        elif isinstance(b, GcStart):
            if in_gc:
                raise TraceStructureError(f"seq {e.seq}: gc-nested")
            in_gc = True

        elif isinstance(b, Move):
            if not in_gc:
                raise TraceStructureError(f"seq {e.seq}: move-outside-gc")
            obj = None
            same_dst = [p for p in pending if p[2] == b.src]
            if same_dst and same_dst[-1][3].live:
                obj = same_dst[-1][3]
            else:
                for r in records:
                    if r[0] == b.src:
                        obj = r[2]
            discovered = False
            if obj is None:
                if any(r[0] <= b.src < r[1] for r in records):
                    continue
                if not config.attach_mode or b.size < config.min_size:
                    continue
                obj = _Obj((), b.size)
                t = out.site(())
                t.alloc_count += 1
                t.bytes += b.size
                discovered = True
            pending.append([e.seq, b.src, b.dst, obj, discovered])

        elif isinstance(b, GcEnd):
            if not in_gc:
                raise TraceStructureError(f"seq {e.seq}: gc-end-unmatched")
            for seq, src, dst, obj, discovered in pending:
                if not discovered:
                    at_src = [r for r in records if r[0] == src]
                    if not at_src or at_src[0][2] is not obj:
                        continue
                    records.remove(at_src[0])
                evict(dst, dst + obj.size)
                records.append([dst, dst + obj.size, obj])
            pending = []
            in_gc = False

        elif isinstance(b, Sample):
            obj = None
            for r in records:
                if r[0] <= b.ea < r[1]:
                    obj = r[2]
                    break
            if obj is None and in_gc and config.epoch_fallback:
                latest = {}
                for p in pending:
                    latest[id(p[3])] = p
                best = None
                for p in latest.values():
                    o = p[3]
                    if o.live and p[2] <= b.ea < p[2] + o.size and (best is None or p[0] > best[0]):
                        best = p
                if best is not None:
                    obj = best[3]
            if obj is None:
                out.add_unattributed(b.kind, b.value)
                if attributions is not None:
                    attributions[e.seq] = None
                continue
            t = out.site(obj.path)
            t.metrics[b.kind] = t.metrics.get(b.kind, 0) + b.value
            if b.cpu_node != NO_NODE and b.page_node != NO_NODE:
                if b.cpu_node != b.page_node:
                    t.remote += 1
                else:
                    t.local += 1
            if attributions is not None:
                attributions[e.seq] = obj.path
    return out
