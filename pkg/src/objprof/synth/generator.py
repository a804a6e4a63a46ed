"""Seeded workload generator with exact ground truth.

Every scenario drives a small simulated heap (:class:`World`) that emits
trace events and, at the same time, records which allocation site each
sample *should* be charged to.  Sample labels are dealt by quota and then
shuffled, so target shares are met to within one sample; an optional
thinning pass (``keep`` < 1) adds binomial sampling noise on top.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from ..attribution import DEFAULT_MIN_SIZE
from ..trace import (
    NO_NODE, Alloc, CallPath, Event, Free, GcEnd, GcStart, MetricKind, Move,
    Sample, make_path,
)
from .oracle import Summary

ADDR_BASE = 0x10000
ALIGN = 16
# never allocated; samples here are unattributable by construction
UNMAPPED = (0x1000, ADDR_BASE)
KINDS = ("bloat", "stride", "numa", "gc_churn", "mixed")
MIN_RATE, MAX_RATE = 20, 200


class ParameterError(ValueError):
    pass


@dataclass
class Scenario:
    kind: str
    seed: int = 0
    threads: int = 1
    samples: int = 10_000
    rate: float = 100.0  # samples per thread per virtual second
    min_size: int = DEFAULT_MIN_SIZE
    target_shares: dict = field(default_factory=dict)  # site label -> fraction
    params: dict = field(default_factory=dict)

    def param(self, name, default=None):
        return self.params.get(name, default)


@dataclass
class GroundTruth:
    summary: Summary
    min_size: int
    labels: dict = field(default_factory=dict)  # seq -> expected site path or None
    site_labels: dict = field(default_factory=dict)  # label -> CallPath
    target_shares: dict = field(default_factory=dict)
    stats: dict = field(default_factory=dict)

    @property
    def sites(self):
        return self.summary.sites


def _path(*frames: str) -> CallPath:
    return make_path((f.rsplit(":", 1)[0], int(f.rsplit(":", 1)[1])) for f in frames)


def _align(n: int) -> int:
    return (n + ALIGN - 1) // ALIGN * ALIGN


class Obj:
    __slots__ = ("oid", "site", "size", "start", "moves", "alive", "node")

    def __init__(self, oid, site, size, start, node):
        self.oid = oid
        self.site = site
        self.size = size
        self.start = start
        self.moves = 0
        self.alive = True
        self.node = node


class World:
    """Simulated heap plus event/truth recorder."""

    def __init__(self, scenario: Scenario, rng: random.Random):
        self.sc = scenario
        self.rng = rng
        self.events: list[Event] = []
        self.truth = Summary()
        self.labels: dict = {}
        self.stats: dict = {"post_move_seqs": [], "stale_seqs": []}
        self.time = 0
        self.bump = ADDR_BASE
        self.next_oid = 0
        self.live: list[Obj] = []
        self.dead_ranges: list[list[int]] = []  # sampleable holes [start, end)
        self._epoch_dead: list[list[int]] = []
        self.in_gc = False
        self.keep = scenario.param("keep", 1.0)
        threads = max(scenario.threads, 1)
        self.tick = max(1, int(1e9 / (scenario.rate * threads)))

    # -- emission --------------------------------------------------------

    def emit(self, thread: int, body, dt: int = 1) -> Event:
        self.time += dt
        e = Event(len(self.events), self.time, thread, body)
        self.events.append(e)
        return e

    def visible(self, obj: Obj) -> bool:
        return obj.size >= self.sc.min_size

    def fresh(self, size: int, gap: int = 0) -> int:
        base = self.bump
        self.bump = _align(base + size + gap)
        return base

    def alloc(self, thread: int, site: CallPath, size: int, base: Optional[int] = None,
              node: int = NO_NODE) -> Obj:
        if base is None:
            base = self.fresh(size)
        obj = Obj(self.next_oid, site, size, base, node)
        self.next_oid += 1
        self.emit(thread, Alloc(obj.oid, base, size, site))
        if self.visible(obj):
            t = self.truth.site(site)
            t.alloc_count += 1
            t.bytes += size
        self.live.append(obj)
        return obj

    def alloc_reusing(self, thread: int, site: CallPath, size: int) -> Obj:
        """Place a new object at the start of a hole big enough for it."""
        holes = [h for h in self.dead_ranges if h[1] - h[0] >= size]
        if not holes:
            return self.alloc(thread, site, size)
        hole = self.rng.choice(holes)
        base = hole[0]
        hole[0] = _align(base + size)
        if hole[0] >= hole[1]:
            self.dead_ranges.remove(hole)
        return self.alloc(thread, site, size, base)

    def free(self, thread: int, obj: Obj) -> None:
        self.emit(thread, Free(obj.oid))
        obj.alive = False
        self.live.remove(obj)
        self._hole(obj.start, obj.start + obj.size)

    def _hole(self, start, end):
        (self._epoch_dead if self.in_gc else self.dead_ranges).append([start, end])

    def gc_start(self, thread: int = 0) -> None:
        self.emit(thread, GcStart())
        self.in_gc = True

    def move(self, thread: int, obj: Obj, dst: Optional[int] = None) -> None:
        if dst is None:
            dst = self.fresh(obj.size, gap=ALIGN)
        self.emit(thread, Move(obj.start, dst, obj.size))
        self._hole(obj.start, obj.start + obj.size)
        obj.start = dst
        obj.moves += 1

    def gc_end(self, thread: int = 0) -> None:
        self.emit(thread, GcEnd())
        self.in_gc = False
        self.dead_ranges.extend(self._epoch_dead)
        self._epoch_dead = []

    def sample(self, thread: int, target: Optional[Obj], offset: int, access: CallPath,
               kind: MetricKind = MetricKind.L1_MISS, value=1,
               cpu: int = NO_NODE, page: int = NO_NODE, stale: bool = False) -> None:
        """Emit one sample at ``target.start + offset`` (or at ``offset`` if no target)."""
        if self.keep < 1.0 and self.rng.random() >= self.keep:
            self.time += self.tick
            return
        ea = offset if target is None else target.start + offset
        e = self.emit(thread, Sample(ea, kind, value, cpu, page, access), self.tick)
        if target is not None and self.visible(target):
            label = target.site
            t = self.truth.site(label)
            t.metrics[kind] = t.metrics.get(kind, 0) + value
            if cpu != NO_NODE and page != NO_NODE:
                if cpu != page:
                    t.remote += 1
                else:
                    t.local += 1
            if target.moves and not self.in_gc:
                self.stats["post_move_seqs"].append(e.seq)
        else:
            label = None
            self.truth.add_unattributed(kind, value)
            if stale:
                self.stats["stale_seqs"].append(e.seq)
        self.labels[e.seq] = label

    def sample_unmapped(self, thread: int, access: CallPath, **kw) -> None:
        self.sample(thread, None, self.rng.randrange(*UNMAPPED), access, **kw)

    def sample_stale(self, thread: int, access: CallPath, **kw) -> bool:
        if not self.dead_ranges:
            return False
        lo, hi = self.rng.choice(self.dead_ranges)
        self.sample(thread, None, self.rng.randrange(lo, hi), access, stale=True, **kw)
        return True


# ---------------------------------------------------------------------------
# quota helpers

def _check_shares(shares: dict) -> None:
    for label, f in shares.items():
        if not 0.0 <= f <= 1.0:
            raise ParameterError(f"share for {label!r} must lie in [0, 1], got {f}")
    if sum(shares.values()) > 1.0 + 1e-9:
        raise ParameterError(f"target shares sum to {sum(shares.values()):.4f} > 1")


def deal(rng: random.Random, total: int, shares: dict) -> list:
    """A shuffled list of ``total`` labels matching ``shares`` to one sample.

    Largest-remainder rounding; whatever the shares leave over goes to the
    ``None`` label.
    """
    _check_shares(shares)
    raw = {k: v * total for k, v in shares.items()}
    counts = {k: math.floor(v) for k, v in raw.items()}
    rest = total - sum(counts.values())
    leftover = 1.0 - sum(shares.values())
    if leftover <= 1e-12:
        for k in sorted(raw, key=lambda k: (counts[k] - raw[k], str(k)))[:rest]:
            counts[k] += 1
        rest = 0
    labels = []
    for k in shares:
        labels.extend([k] * counts[k])
    labels.extend([None] * rest)
    rng.shuffle(labels)
    return labels


def _chunks(items: list, n: int) -> list[list]:
    q, r = divmod(len(items), n)
    out, pos = [], 0
    for i in range(n):
        k = q + (1 if i < r else 0)
        out.append(items[pos:pos + k])
        pos += k
    return out


def _full_count(sc: Scenario) -> int:
    keep = sc.param("keep", 1.0)
    if not 0.0 < keep <= 1.0:
        raise ParameterError(f"keep must lie in (0, 1], got {keep}")
    return round(sc.samples / keep)


# ---------------------------------------------------------------------------
# scenarios

HOT_BLOAT = _path("app.Main.main:12", "app.Renderer.draw:88", "app.GeneralPath.makeRoom:5")
BLOAT_ACCESS = [
    _path("app.Main.main:12", "app.Renderer.draw:88", "app.GeneralPath.makeRoom:6"),
    _path("app.Main.main:12", "app.Renderer.draw:91", "app.GeneralPath.lineTo:140"),
    _path("app.Main.main:12", "app.Renderer.fill:203", "app.GeneralPath.iterate:77"),
]


def _cold_site(i: int) -> CallPath:
    return _path("app.Main.main:12", f"app.Cache{i}.<init>:{20 + i}", f"app.Cache{i}.grow:{40 + i}")


def _cold_access(i: int) -> list[CallPath]:
    return [_path("app.Main.main:14", f"app.Cache{i}.get:{60 + i}"),
            _path("app.Main.main:15", f"app.Cache{i}.put:{80 + i}")]


def bloat(seed: int = 1, sites: int = 6, share: float = 0.21, allocs: int = 2478,
          samples: int = 10_000, unattributed: float = 0.05, keep: float = 1.0,
          threads: int = 1, hot_size: int = 4096, cold_size: int = 1 << 16,
          rate: float = 100.0) -> Scenario:
    if sites < 1:
        raise ParameterError("bloat needs at least one site")
    if sites == 1:
        unattributed = max(0.0, 1.0 - share)
    shares = {"hot": share}
    cold = (1.0 - share - unattributed) / (sites - 1) if sites > 1 else 0.0
    for i in range(1, sites):
        shares[f"cold{i}"] = cold
    return Scenario("bloat", seed, threads, samples, rate, target_shares=shares, params=dict(
        sites=sites, share=share, allocs=allocs, unattributed=unattributed, keep=keep,
        hot_size=hot_size, cold_size=cold_size))


def _gen_bloat(sc: Scenario, w: World) -> None:
    rng = w.rng
    p = sc.params
    allocs = p["allocs"]
    if allocs < 1 and sc.target_shares.get("hot", 0) > 0:
        raise ParameterError("hot share needs at least one hot allocation")
    labels = deal(rng, _full_count(sc), sc.target_shares)
    colds = {f"cold{i}": w.alloc(0, _cold_site(i), p["cold_size"]) for i in range(1, p["sites"])}
    accesses = {f"cold{i}": _cold_access(i) for i in range(1, p["sites"])}
    t = 0
    for chunk in _chunks(labels, max(allocs, 1)):
        hot = w.alloc(0, HOT_BLOAT, p["hot_size"]) if allocs else None
        for label in chunk:
            thread = t % sc.threads
            t += 1
            if label == "hot":
                w.sample(thread, hot, rng.randrange(hot.size), rng.choice(BLOAT_ACCESS))
            elif label is None:
                w.sample_unmapped(thread, BLOAT_ACCESS[0])
            else:
                obj = colds[label]
                w.sample(thread, obj, rng.randrange(obj.size), rng.choice(accesses[label]))
        if hot is not None:
            w.free(0, hot)
    for obj in list(colds.values()):
        w.free(0, obj)


HOT_STRIDE = _path("bench.Main.main:30", "bench.FFT.<init>:52", "bench.FFT.makeData:61")
STRIDE_ACCESS = [
    _path("bench.Main.main:31", "bench.FFT.transform:140", "bench.FFT.transformInternal:171"),
    _path("bench.Main.main:31", "bench.FFT.transform:140", "bench.FFT.transformInternal:172"),
    _path("bench.Main.main:31", "bench.FFT.transform:140", "bench.FFT.transformInternal:174"),
    _path("bench.Main.main:31", "bench.FFT.transform:140", "bench.FFT.transformInternal:175"),
]


def stride(seed: int = 7, hot_share: float = 0.755, arrays: int = 4, samples: int = 10_000,
           unattributed: float = 0.02, stride_bytes: int = 4096, array_size: int = 1 << 20,
           threads: int = 1, keep: float = 1.0, rate: float = 100.0) -> Scenario:
    shares = {"hot": hot_share}
    if arrays:
        other = (1.0 - hot_share - unattributed) / arrays
        shares.update({f"array{i}": other for i in range(arrays)})
    return Scenario("stride", seed, threads, samples, rate, target_shares=shares, params=dict(
        hot_share=hot_share, arrays=arrays, unattributed=unattributed, stride=stride_bytes,
        array_size=array_size, keep=keep))


def _gen_stride(sc: Scenario, w: World) -> None:
    rng = w.rng
    p = sc.params
    size = p["array_size"]
    hot = w.alloc(0, HOT_STRIDE, size)
    others = {}
    for i in range(p["arrays"]):
        site = _path("bench.Main.main:30", f"bench.Kernel{i}.setup:{10 + i}")
        others[f"array{i}"] = (w.alloc(0, site, size // 4),
                               [_path("bench.Main.main:33", f"bench.Kernel{i}.run:{20 + i}")])
    labels = deal(rng, _full_count(sc), sc.target_shares)
    k = 0
    for n, label in enumerate(labels):
        thread = n % sc.threads
        if label == "hot":
            w.sample(thread, hot, (k * p["stride"]) % size, STRIDE_ACCESS[k % len(STRIDE_ACCESS)])
            k += 1
        elif label is None:
            w.sample_unmapped(thread, STRIDE_ACCESS[0])
        else:
            obj, acc = others[label]
            w.sample(thread, obj, rng.randrange(obj.size), acc[0])


HOT_NUMA = _path("coll.Main.main:20", "coll.Interval.toArray:758")
NUMA_ACCESS = [_path("coll.Worker.run:33", "coll.InternalArrayIterate.batchFastListCollect:245")]


def numa(seed: int = 3, remote_fraction: float = 0.734, nodes: int = 4, threads: int = 8,
         hot_share: float = 0.5, arrays: int = 3, unattributed: float = 0.05,
         other_remote: Optional[float] = None, samples: int = 10_000, keep: float = 1.0,
         rate: float = 100.0) -> Scenario:
    if other_remote is None:
        other_remote = 0.3 * remote_fraction
    shares = {"hot": hot_share}
    if arrays:
        shares.update({f"array{i}": (1.0 - hot_share - unattributed) / arrays
                       for i in range(arrays)})
    return Scenario("numa", seed, threads, samples, rate, target_shares=shares, params=dict(
        remote_fraction=remote_fraction, nodes=nodes, hot_share=hot_share, arrays=arrays,
        unattributed=unattributed, other_remote=other_remote, keep=keep))


def _gen_numa(sc: Scenario, w: World) -> None:
    rng = w.rng
    p = sc.params
    nodes = p["nodes"]
    for name in ("remote_fraction", "other_remote"):
        if not 0.0 <= p[name] <= 1.0:
            raise ParameterError(f"{name} must lie in [0, 1]")
    node_of = {t: t % nodes for t in range(sc.threads)}
    local_threads = [t for t, n in node_of.items() if n == 0]
    remote_threads = [t for t, n in node_of.items() if n != 0]
    if (p["remote_fraction"] > 0 or p["other_remote"] > 0) and not remote_threads:
        raise ParameterError("remote accesses need a thread on a node other than the master's")
    # the master thread (0, node 0) allocates and first-touches everything
    hot = w.alloc(0, HOT_NUMA, 1 << 18, node=0)
    objs = {"hot": (hot, NUMA_ACCESS, p["remote_fraction"])}
    for i in range(p["arrays"]):
        site = _path("coll.Main.main:20", f"coll.Buffer{i}.alloc:{100 + i}")
        acc = [_path("coll.Worker.run:35", f"coll.Buffer{i}.scan:{200 + i}")]
        objs[f"array{i}"] = (w.alloc(0, site, 1 << 16, node=0), acc, p["other_remote"])
    labels = deal(rng, _full_count(sc), sc.target_shares)
    # per site, exactly round(fraction * count) accesses come from remote nodes
    remote_flags = {}
    for label, (_, _, frac) in objs.items():
        n = labels.count(label)
        flags = [True] * round(frac * n) + [False] * (n - round(frac * n))
        rng.shuffle(flags)
        remote_flags[label] = flags
    for label in labels:
        if label is None:
            t = rng.randrange(sc.threads)
            w.sample_unmapped(t, NUMA_ACCESS[0], cpu=node_of[t], page=NO_NODE)
            continue
        obj, acc, _ = objs[label]
        remote = remote_flags[label].pop()
        t = rng.choice(remote_threads if remote else local_threads)
        w.sample(t, obj, rng.randrange(obj.size), acc[0], cpu=node_of[t], page=obj.node)


GC_SITES = [_path("srv.Main.main:8", f"srv.Handler{i}.handle:{30 + i}", f"srv.Buffer.new:{50 + i}")
            for i in range(5)]
GC_ACCESS = [_path("srv.Main.main:9", f"srv.Handler{i}.process:{70 + i}") for i in range(5)]


def gc_churn(seed: int = 11, objects: int = 400, epochs: int = 6, threads: int = 4,
             samples: int = 10_000, move_fraction: float = 0.25, free_fraction: float = 0.08,
             stale_fraction: float = 0.05, keep: float = 1.0, rate: float = 100.0) -> Scenario:
    return Scenario("gc_churn", seed, threads, samples, rate, params=dict(
        objects=objects, epochs=epochs, move_fraction=move_fraction,
        free_fraction=free_fraction, stale_fraction=stale_fraction, keep=keep))


def _churn_sample(w: World, kind_mix: bool = True, stale_fraction: float = 0.0,
                  in_epoch: bool = False) -> None:
    rng = w.rng
    thread = rng.randrange(w.sc.threads)
    kind, value = MetricKind.L1_MISS, 1
    if kind_mix and rng.random() < 0.3:
        kind, value = MetricKind.LOAD_LATENCY, rng.randrange(10, 300)
    if not in_epoch and rng.random() < stale_fraction and w.sample_stale(
            thread, GC_ACCESS[0], kind=kind, value=value):
        return
    obj = rng.choice(w.live)
    i = GC_SITES.index(obj.site) if obj.site in GC_SITES else 0
    w.sample(thread, obj, rng.randrange(obj.size), GC_ACCESS[i], kind=kind, value=value)


def _gen_gc_churn(sc: Scenario, w: World) -> None:
    rng = w.rng
    p = sc.params
    epochs = p["epochs"]
    if p["objects"] < 10 or epochs < 2:
        raise ParameterError("gc_churn needs >= 10 objects and >= 2 epochs")
    for _ in range(p["objects"]):
        w.alloc(rng.randrange(sc.threads), rng.choice(GC_SITES), _align(rng.randrange(1024, 16384)))
    total = _full_count(sc)
    per_phase = _chunks(list(range(total)), epochs + 1)
    for ep in range(epochs):
        # mutator phase
        phase = per_phase[ep]
        for _ in phase[: len(phase) * 9 // 10]:
            _churn_sample(w, stale_fraction=p["stale_fraction"])
        for obj in rng.sample(w.live, int(len(w.live) * p["free_fraction"])):
            w.free(rng.randrange(sc.threads), obj)
        for _ in range(int(p["objects"] * p["free_fraction"])):
            w.alloc_reusing(rng.randrange(sc.threads), rng.choice(GC_SITES),
                            _align(rng.randrange(1024, 8192)))
        # collection
        w.gc_start(0)
        movers = rng.sample(w.live, int(len(w.live) * p["move_fraction"]))
        if ep == epochs - 1:
            movers = _top_up_movers(w, movers)
        in_epoch = phase[len(phase) * 9 // 10:]
        step = max(1, len(movers) // max(len(in_epoch), 1))
        for i, obj in enumerate(movers):
            w.move(rng.randrange(sc.threads), obj)
            if rng.random() < 0.15:
                w.move(rng.randrange(sc.threads), obj)  # chained within the epoch
            if in_epoch and i % step == 0:
                _churn_sample(w, in_epoch=True)
                in_epoch = in_epoch[1:]
        for _ in in_epoch:
            _churn_sample(w, in_epoch=True)
        w.gc_end(0)
    for _ in per_phase[-1]:
        _churn_sample(w, stale_fraction=p["stale_fraction"] * 2)
    n = len(w.live)
    w.stats["survivors"] = n
    w.stats["moved_once"] = sum(o.moves >= 1 for o in w.live) / n
    w.stats["moved_twice"] = sum(o.moves >= 2 for o in w.live) / n


def _top_up_movers(w: World, movers: list) -> list:
    # guarantee >= 30% of survivors moved at least once and >= 10% at least twice
    n = len(w.live)
    chosen = set(map(id, movers))
    after = {id(o): o.moves + (id(o) in chosen) for o in w.live}
    extra = []
    for need, level in ((math.ceil(0.10 * n), 2), (math.ceil(0.30 * n), 1)):
        have = sum(v >= level for v in after.values())
        for o in w.live:
            if have >= need:
                break
            if after[id(o)] == level - 1 and id(o) not in chosen:
                chosen.add(id(o))
                after[id(o)] += 1
                extra.append(o)
                have += 1
    return movers + extra


MIXED_SMALL = _path("mix.Main.main:5", "mix.Node.<init>:17")


def mixed(seed: int = 5, threads: int = 4, samples: int = 10_000, nodes: int = 2,
          epochs: int = 3, keep: float = 1.0, rate: float = 100.0) -> Scenario:
    return Scenario("mixed", seed, threads, samples, rate, params=dict(
        nodes=nodes, epochs=epochs, keep=keep))


def _gen_mixed(sc: Scenario, w: World) -> None:
    rng = w.rng
    p = sc.params
    nodes = p["nodes"]
    kinds = list(MetricKind)
    arrays = [w.alloc(0, HOT_STRIDE, 1 << 18, node=0),
              w.alloc(1 % sc.threads, _cold_site(1), 1 << 15, node=(1 % sc.threads) % nodes)]
    arrays += [w.alloc(rng.randrange(sc.threads), rng.choice(GC_SITES), 4096,
                       node=rng.randrange(nodes)) for _ in range(40)]
    small = [w.alloc(0, MIXED_SMALL, 256, node=0) for _ in range(20)]  # below the size filter
    total = _full_count(sc)
    phases = _chunks(list(range(total)), p["epochs"] + 1)
    for ep, phase in enumerate(phases):
        hot = None
        for n, _ in enumerate(phase):
            if n % 40 == 0:
                if hot is not None:
                    w.free(0, hot)
                hot = w.alloc_reusing(0, HOT_BLOAT, 2048)
                hot.node = 0
            t = rng.randrange(sc.threads)
            kind = rng.choice(kinds)
            value = rng.randrange(5, 400) if kind is MetricKind.LOAD_LATENCY else 1
            r = rng.random()
            cpu = t % nodes
            if r < 0.25:
                target, off = hot, rng.randrange(hot.size)
            elif r < 0.55:
                target = arrays[0]
                off = (n * 4096) % target.size
            elif r < 0.85:
                target = rng.choice(arrays[1:])
                off = rng.randrange(target.size)
            elif r < 0.93:
                target = rng.choice(small)
                off = rng.randrange(target.size)
            else:
                w.sample_unmapped(t, BLOAT_ACCESS[0], kind=kind, value=value, cpu=cpu, page=NO_NODE)
                continue
            page = target.node if target.node != NO_NODE else NO_NODE
            w.sample(t, target, off, STRIDE_ACCESS[n % 4], kind=kind, value=value, cpu=cpu, page=page)
        if hot is not None:
            w.free(0, hot)
        if ep < p["epochs"]:
            w.gc_start(0)
            for obj in rng.sample(arrays, len(arrays) // 3):
                w.move(rng.randrange(sc.threads), obj)
            for obj in rng.sample(small, 3):
                w.move(rng.randrange(sc.threads), obj)  # unknown source to the engine
            w.gc_end(0)


_GENERATORS = {
    "bloat": _gen_bloat, "stride": _gen_stride, "numa": _gen_numa,
    "gc_churn": _gen_gc_churn, "mixed": _gen_mixed,
}


def validate_scenario(sc: Scenario) -> None:
    if sc.kind not in _GENERATORS:
        raise ParameterError(f"unknown scenario kind {sc.kind!r}; expected one of {KINDS}")
    if sc.threads < 1:
        raise ParameterError("threads must be >= 1")
    if sc.samples < 0:
        raise ParameterError("samples must be >= 0")
    if not MIN_RATE <= sc.rate <= MAX_RATE:
        raise ParameterError(f"rate must lie in [{MIN_RATE}, {MAX_RATE}] samples/s/thread")
    if not 0 <= sc.seed < 1 << 64:
        raise ParameterError("seed must be a 64-bit unsigned integer")
    _check_shares(sc.target_shares)


def generate(sc: Scenario) -> tuple[list[Event], GroundTruth]:
    """Build the trace for ``sc`` together with its exact ground truth."""
    validate_scenario(sc)
    w = World(sc, random.Random(sc.seed))
    _GENERATORS[sc.kind](sc, w)
    site_labels = {}
    if sc.kind == "bloat":
        site_labels = {"hot": HOT_BLOAT, **{f"cold{i}": _cold_site(i)
                                            for i in range(1, sc.params["sites"])}}
    elif sc.kind == "stride":
        site_labels = {"hot": HOT_STRIDE}
    elif sc.kind == "numa":
        site_labels = {"hot": HOT_NUMA}
    truth = GroundTruth(w.truth, sc.min_size, w.labels, site_labels,
                        dict(sc.target_shares), w.stats)
    return w.events, truth


def catalog(seed: int = 0) -> list[Scenario]:
    """One default scenario of every kind, seeds offset by ``seed``."""
    return [bloat(seed=1 + seed), stride(seed=7 + seed), numa(seed=3 + seed),
            gc_churn(seed=11 + seed), mixed(seed=5 + seed)]


SCENARIOS = {"bloat": bloat, "stride": stride, "numa": numa, "gc_churn": gc_churn, "mixed": mixed}
