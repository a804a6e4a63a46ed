"""Replay engine: attribute sampled accesses to allocation call paths.

Replay semantics, in event order:

Alloc
    Objects smaller than ``min_size`` are ignored entirely.  Otherwise the
    allocation path is interned as a site, a new instance is created and
    its range is inserted into the interval index; whatever it overlaps is
    evicted (the newest allocation wins) and marked dead.
Free
    The instance's current range is removed from the index.
GcStart / GcEnd
    Bracket an epoch.  Moves inside an epoch are only *recorded* in the
    moving thread's relocation map; at GcEnd all maps are applied to the
    index in seq order (so chained moves compose) and cleared.
Move
    The source is matched, in order, against (1) the destination of a
    pending move of a live instance, (2) an interval starting exactly at
    ``src``.  A source strictly inside a known interval is dropped as a
    partial move.  An unmatched source is dropped, unless attach mode is on,
    in which case a new instance under the ``UNKNOWN_ALLOC`` site is created
    and its destination inserted at GcEnd.
Sample
    The effective address is looked up in the index.  During an epoch a
    miss falls back to the pending destinations (latest move of each live
    instance, highest seq wins).  Hits add the metric to the site aggregate
    and to the access-path tree under it; NUMA locality is counted when
    both node ids are known.  Misses go to the unattributed bucket.

At GcEnd a recorded move is applied only if the interval at ``src`` still
belongs to the instance that was resolved when the move was recorded.
"""
from __future__ import annotations

import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .cct import Cct
from .interval_index import Interval, IntervalIndex, Policy
from .trace import (
    NO_NODE, UNKNOWN_ALLOC, Alloc, CallPath, Event, Free, GcEnd, GcStart,
    MetricKind, Move, Sample, TraceValidator, validate_trace, violation_error,
)

DEFAULT_MIN_SIZE = 1024
OVERLAP_POLICY = Policy.EVICT_OVERLAPS


@dataclass
class EngineConfig:
    min_size: int = DEFAULT_MIN_SIZE
    attach_mode: bool = False
    # resolve in-epoch index misses against pending move destinations
    epoch_fallback: bool = True
    # keep seq -> attributed site path for every sample
    record_attribution: bool = False

    def __post_init__(self):
        if self.min_size < 0:
            raise ValueError("min_size must be >= 0")


class ObjectInstance:
    __slots__ = ("instance_id", "object_id", "site", "size", "alloc_thread",
                 "live", "current_start")

    def __init__(self, instance_id, object_id, site, size, alloc_thread, start):
        self.instance_id = instance_id
        self.object_id = object_id
        self.site = site
        self.size = size
        self.alloc_thread = alloc_thread
        self.live = True
        self.current_start = start


class SiteTable:
    """Bijective interning of allocation call paths to small integers."""

    def __init__(self):
        self._ids: dict[CallPath, int] = {}
        self.paths: list[CallPath] = []

    def intern(self, path: CallPath) -> int:
        sid = self._ids.get(path)
        if sid is None:
            sid = self._ids[path] = len(self.paths)
            self.paths.append(path)
        return sid

    def path(self, sid: int) -> CallPath:
        return self.paths[sid]

    def __len__(self):
        return len(self.paths)


@dataclass
class ObjectAggregate:
    site: int
    alloc_path: CallPath
    allocation_count: int = 0
    total_bytes: int = 0
    metrics: dict = field(default_factory=dict)
    remote_count: int = 0
    local_count: int = 0
    access_cct: Cct = field(default_factory=Cct)
    _access_nodes: dict = field(default_factory=dict, repr=False, compare=False)

    def access_node(self, path: CallPath):
        node = self._access_nodes.get(path)
        if node is None:
            node = self._access_nodes[path] = self.access_cct.insert_path(path)
        return node

    def absorb(self, other: "ObjectAggregate") -> None:
        self.allocation_count += other.allocation_count
        self.total_bytes += other.total_bytes
        for k, v in other.metrics.items():
            self.metrics[k] = self.metrics.get(k, 0) + v
        self.remote_count += other.remote_count
        self.local_count += other.local_count
        self.access_cct.merge(other.access_cct)

    def metric(self, kind: MetricKind):
        return self.metrics.get(kind, 0)

    @property
    def remote_share(self) -> Optional[float]:
        n = self.remote_count + self.local_count
        return self.remote_count / n if n else None


@dataclass
class Profile:
    thread: int
    alloc_cct: Cct = field(default_factory=Cct)
    aggregates: dict = field(default_factory=dict)  # site id -> ObjectAggregate
    unattributed: dict = field(default_factory=dict)  # MetricKind -> total
    unattributed_samples: int = 0
    diagnostics: Counter = field(default_factory=Counter)

    def aggregate(self, site: int, path: CallPath) -> ObjectAggregate:
        agg = self.aggregates.get(site)
        if agg is None:
            agg = self.aggregates[site] = ObjectAggregate(site, path)
        return agg


class PendingMove:
    __slots__ = ("seq", "thread", "src", "dst", "size", "instance", "discovered")

    def __init__(self, seq, thread, src, dst, size, instance, discovered):
        self.seq = seq
        self.thread = thread
        self.src = src
        self.dst = dst
        self.size = size
        self.instance = instance
        self.discovered = discovered


def numa_classify(sample: Sample) -> str:
    """'remote' iff the page lives on another node than the accessing CPU."""
    if sample.cpu_node == NO_NODE or sample.page_node == NO_NODE:
        return "unknown"
    return "remote" if sample.page_node != sample.cpu_node else "local"


class Engine:
    def __init__(self, config: Optional[EngineConfig] = None):
        self.config = config or EngineConfig()
        self.index = IntervalIndex()
        self.sites = SiteTable()
        self.instances: list[ObjectInstance] = []
        self.by_object: dict[int, ObjectInstance] = {}
        self.filtered: set[int] = set()
        self.profiles: dict[int, Profile] = {}
        self.in_gc = False
        self.relocation_maps: dict[int, list[PendingMove]] = {}
        self._pending_dst: dict[int, PendingMove] = {}
        self._latest_move: dict[int, PendingMove] = {}
        self.validator: Optional[TraceValidator] = TraceValidator()
        self.attributions: dict[int, Optional[CallPath]] = {}
        self.lock = threading.Lock()
        self._dispatch = {
            Alloc: self._alloc, Free: self._free, Move: self._move,
            GcStart: self._gc_start, GcEnd: self._gc_end, Sample: self._sample,
        }

    def profile(self, thread: int) -> Profile:
        p = self.profiles.get(thread)
        if p is None:
            p = self.profiles[thread] = Profile(thread)
        return p

    def process_event(self, e: Event):
        """Apply one event; returns the address footprint it mutated, if any."""
        if self.validator is not None:
            self.validator.require(e)
        return self._dispatch[type(e.body)](e)

    def results(self) -> list[Profile]:
        return [self.profiles[t] for t in sorted(self.profiles)]

    # -- event handlers ---------------------------------------------------

    def _kill(self, evicted: list[Interval], prof: Profile, reason: str) -> None:
        for iv in evicted:
            self.instances[iv.payload].live = False
            prof.diagnostics[reason] += 1

    def _new_instance(self, object_id, site, size, thread, start) -> ObjectInstance:
        inst = ObjectInstance(len(self.instances), object_id, site, size, thread, start)
        self.instances.append(inst)
        return inst

    def _count_alloc(self, prof: Profile, site: int, path: CallPath, size: int) -> None:
        agg = prof.aggregate(site, path)
        agg.allocation_count += 1
        agg.total_bytes += size
        prof.alloc_cct.insert_path(path).add_alloc(size)

    def _alloc(self, e: Event):
        b = e.body
        prof = self.profile(e.thread)
        if b.size < self.config.min_size:
            self.filtered.add(b.object_id)
            return None
        site = self.sites.intern(b.path)
        inst = self._new_instance(b.object_id, site, b.size, e.thread, b.base)
        self.by_object[b.object_id] = inst
        evicted = self.index.insert(Interval(b.base, b.size, inst.instance_id), OVERLAP_POLICY)
        self._kill(evicted, prof, "evicted_by_alloc")
        self._count_alloc(prof, site, b.path, b.size)
        return [(b.base, b.base + b.size)] + [(iv.start, iv.end) for iv in evicted]

    def _free(self, e: Event):
        oid = e.body.object_id
        prof = self.profile(e.thread)
        inst = self.by_object.get(oid)
        if inst is None:
            if oid not in self.filtered:
                prof.diagnostics["free_unknown"] += 1
            return None
        if not inst.live:
            prof.diagnostics["free_dead"] += 1
            return None
        removed = self.index.remove(inst.current_start)
        assert removed is not None and removed.payload == inst.instance_id
        inst.live = False
        return [(removed.start, removed.end)]

    def _gc_start(self, e: Event):
        self.profile(e.thread)
        assert not any(self.relocation_maps.values())
        self.in_gc = True
        return None

    def _move(self, e: Event):
        b = e.body
        prof = self.profile(e.thread)
        src = b.src
        inst = None
        entry = self._pending_dst.get(src)
        if entry is not None and self.instances[entry.instance].live:
            inst = self.instances[entry.instance]
        else:
            iv = self.index.get(src)
            if iv is not None:
                inst = self.instances[iv.payload]
        discovered = False
        if inst is None:
            if self.index.lookup(src) is not None:
                prof.diagnostics["move_partial_source"] += 1
                return None
            if not self.config.attach_mode:
                prof.diagnostics["move_unknown_src"] += 1
                return None
            if b.size < self.config.min_size:
                prof.diagnostics["move_unknown_filtered"] += 1
                return None
            site = self.sites.intern(UNKNOWN_ALLOC)
            inst = self._new_instance(None, site, b.size, e.thread, None)
            self._count_alloc(prof, site, UNKNOWN_ALLOC, b.size)
            discovered = True
        elif b.size != inst.size:
            prof.diagnostics["move_size_mismatch"] += 1
        pm = PendingMove(e.seq, e.thread, src, b.dst, b.size, inst.instance_id, discovered)
        self.relocation_maps.setdefault(e.thread, []).append(pm)
        self._pending_dst[b.dst] = pm
        self._latest_move[inst.instance_id] = pm
        return None

    def _gc_end(self, e: Event):
        self.profile(e.thread)
        entries = sorted((pm for moves in self.relocation_maps.values() for pm in moves),
                         key=lambda pm: pm.seq)
        index = self.index
        for pm in entries:
            inst = self.instances[pm.instance]
            prof = self.profile(pm.thread)
            if pm.discovered:
                evicted = index.insert(Interval(pm.dst, inst.size, inst.instance_id), OVERLAP_POLICY)
                inst.current_start = pm.dst
                self._kill(evicted, prof, "evicted_by_move")
                continue
            iv = index.get(pm.src)
            if iv is None:
                prof.diagnostics["relocate_src_missing"] += 1
                continue
            if iv.payload != pm.instance:
                prof.diagnostics["relocate_src_mismatch"] += 1
                continue
            _, evicted = index.relocate(pm.src, pm.dst)
            inst.current_start = pm.dst
            self._kill(evicted, prof, "evicted_by_move")
        self.relocation_maps.clear()
        self._pending_dst.clear()
        self._latest_move.clear()
        self.in_gc = False
        return None

    def _pending_lookup(self, ea: int) -> Optional[int]:
        best = None
        instances = self.instances
        for iid, pm in self._latest_move.items():
            inst = instances[iid]
            if inst.live and pm.dst <= ea < pm.dst + inst.size:
                if best is None or pm.seq > best.seq:
                    best = pm
        return None if best is None else best.instance

    def _sample(self, e: Event):
        b = e.body
        prof = self.profiles.get(e.thread) or self.profile(e.thread)
        iid = self.index.lookup_payload(b.ea)
        if iid is None and self.in_gc and self.config.epoch_fallback:
            iid = self._pending_lookup(b.ea)
        if iid is None:
            prof.unattributed[b.kind] = prof.unattributed.get(b.kind, 0) + b.value
            prof.unattributed_samples += 1
            if self.config.record_attribution:
                self.attributions[e.seq] = None
            return None
        site = self.instances[iid].site
        agg = prof.aggregates.get(site)
        if agg is None:
            agg = prof.aggregate(site, self.sites.paths[site])
        kind = b.kind
        agg.metrics[kind] = agg.metrics.get(kind, 0) + b.value
        node = agg._access_nodes.get(b.path) or agg.access_node(b.path)
        node.metrics[kind] = node.metrics.get(kind, 0) + b.value
        cpu, page = b.cpu_node, b.page_node
        if cpu != NO_NODE and page != NO_NODE:
            if page != cpu:
                agg.remote_count += 1
                node.remote_count += 1
            else:
                agg.local_count += 1
                node.local_count += 1
        if self.config.record_attribution:
            self.attributions[e.seq] = agg.alloc_path
        return None


def run(events: Iterable[Event], config: Optional[EngineConfig] = None) -> list[Profile]:
    """Replay ``events`` serially and return one profile per observed thread."""
    engine = Engine(config)
    for e in events:
        engine.process_event(e)
    return engine.results()


# ---------------------------------------------------------------------------
# parallel replay

class ParallelRefused(RuntimeError):
    """The trace has cross-thread address interactions outside GC epochs."""


def _segments(events: list[Event]) -> list[tuple[bool, list[Event]]]:
    # (concurrent?, events); GC epochs form serial segments
    out = []
    cur: list[Event] = []
    in_gc = False
    for e in events:
        t = type(e.body)
        if t is GcStart:
            if cur:
                out.append((True, cur))
            cur = [e]
            in_gc = True
        elif t is GcEnd and in_gc:
            cur.append(e)
            out.append((False, cur))
            cur = []
            in_gc = False
        else:
            cur.append(e)
    if cur:
        out.append((not in_gc, cur))
    return out


def _conflicts(footprints: list[tuple[int, int, int, bool]]) -> Optional[tuple]:
    # footprints: (lo, hi, thread, is_mutation); returns a clashing cluster
    if not footprints:
        return None
    footprints.sort()
    cluster = [footprints[0]]
    hi = footprints[0][1]

    def bad(c):
        threads = {t for _, _, t, _ in c}
        return len(threads) > 1 and any(m for *_, m in c)

    for fp in footprints[1:]:
        if fp[0] < hi:
            cluster.append(fp)
            hi = max(hi, fp[1])
        else:
            if bad(cluster):
                return cluster[0][0], hi, sorted({t for _, _, t, _ in cluster})
            cluster = [fp]
            hi = fp[1]
    if bad(cluster):
        return cluster[0][0], hi, sorted({t for _, _, t, _ in cluster})
    return None


def parallel_preflight(events: list[Event], config: Optional[EngineConfig] = None) -> list[str]:
    """Check that per-thread replay between GC barriers is order independent.

    Layout events are replayed on a shadow engine to learn the address
    footprint of every Alloc (including what it evicts) and Free.  Between
    barriers, a footprint touched by one thread must not be mutated by
    another.  Returns a list of human-readable conflicts (empty means safe).
    """
    shadow = Engine(config)
    problems = []
    for concurrent, seg in _segments(events):
        fps = []
        for e in seg:
            if type(e.body) is Sample:
                if concurrent:
                    fps.append((e.body.ea, e.body.ea + 1, e.thread, False))
                continue
            touched = shadow.process_event(e)
            if concurrent and touched:
                fps.extend((lo, hi, e.thread, True) for lo, hi in touched)
        if concurrent:
            clash = _conflicts(fps)
            if clash is not None:
                lo, hi, threads = clash
                problems.append(f"threads {threads} interact on [{lo:#x}, {hi:#x}) "
                                f"between seq {seg[0].seq} and {seg[-1].seq}")
    return problems


def run_parallel(events: Iterable[Event], config: Optional[EngineConfig] = None,
                 workers: int = 4) -> list[Profile]:
    """Replay per-thread event streams concurrently between GC barriers.

    Raises :class:`ParallelRefused` if the preflight finds cross-thread
    interactions that could make the result depend on interleaving.
    """
    events = list(events)
    problems = validate_trace(events)
    if problems:
        raise violation_error(problems[0])
    conflicts = parallel_preflight(events, config)
    if conflicts:
        raise ParallelRefused(conflicts[0])
    engine = Engine(config)
    engine.validator = None

    def replay(stream):
        for e in stream:
            with engine.lock:
                engine.process_event(e)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        for concurrent, seg in _segments(events):
            if not concurrent:
                replay(seg)
                continue
            streams: dict[int, list[Event]] = {}
            for e in seg:
                streams.setdefault(e.thread, []).append(e)
            for fut in [pool.submit(replay, s) for s in streams.values()]:
                fut.result()
    return engine.results()
