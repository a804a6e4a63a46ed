"""Random valid traces for engine/oracle equivalence testing.

Addresses are drawn from a deliberately small arena so that overlapping
allocations, address reuse, stale samples, partial and unknown moves and
chained relocations all show up in short traces.
"""
from __future__ import annotations

import random

from ..attribution import EngineConfig
from ..trace import (
    NO_NODE, Alloc, Event, Free, GcEnd, GcStart, MetricKind, Move, Sample, make_path,
)

ARENA = 0x10000
ARENA_SIZE = 1 << 18

_ALLOC_PATHS = [make_path([("f.Main.main", 1), (f"f.Site{i}.make", 10 + i)]) for i in range(6)]
_ALLOC_PATHS.append(make_path([("f.Main.main", 1), ("f.Site0.make", 10), ("f.Deep.inner", 3)]))
_ACCESS_PATHS = [make_path([("f.Main.main", 2), (f"f.Use{i}.touch", 20 + i)]) for i in range(4)]
_ACCESS_PATHS.append(())


def random_trace(seed: int, n_events: int = 1000, threads: int = 4) -> list[Event]:
    rng = random.Random(seed)
    events: list[Event] = []
    kinds = list(MetricKind)
    next_oid = 0
    allocated = []  # (oid, base, size) of every Alloc so far
    starts = []  # plausible move sources: alloc bases and move destinations
    in_gc = False
    time = 0

    def emit(body):
        nonlocal time
        time += rng.randrange(1, 1000)
        events.append(Event(len(events), time, rng.randrange(threads), body))

    def size():
        return rng.choice((rng.randrange(16, 1024), rng.randrange(1024, 8192),
                           rng.randrange(512, 2048)))

    def addr():
        if starts and rng.random() < 0.5:
            base = rng.choice(starts)
            return base + rng.choice((0, 0, 0, rng.randrange(0, 4096)))
        return ARENA + rng.randrange(ARENA_SIZE)

    while len(events) < n_events:
        r = rng.random()
        if in_gc:
            if r < 0.35:
                src = addr() if rng.random() < 0.2 else (rng.choice(starts) if starts else addr())
                dst = rng.choice((ARENA + rng.randrange(ARENA_SIZE), addr()))
                emit(Move(src, dst, size() if rng.random() < 0.5 else rng.choice(
                    [s for _, b, s in allocated if b == src] or [size()])))
                starts.append(dst)
                continue
            if r < 0.45:
                emit(GcEnd())
                in_gc = False
                continue
        elif r < 0.05:
            emit(GcStart())
            in_gc = True
            continue
        if r < 0.60:
            ea = addr()
            kind = rng.choice(kinds)
            value = rng.randrange(1, 500) if kind is MetricKind.LOAD_LATENCY else rng.choice((1, 1, 2))
            emit(Sample(ea, kind, value, rng.randrange(NO_NODE, 4), rng.randrange(NO_NODE, 4),
                        rng.choice(_ACCESS_PATHS)))
        elif r < 0.82:
            sz = size()
            base = addr() if rng.random() < 0.3 else ARENA + rng.randrange(ARENA_SIZE)
            emit(Alloc(next_oid, base, sz, rng.choice(_ALLOC_PATHS)))
            allocated.append((next_oid, base, sz))
            starts.append(base)
            next_oid += 1
        else:
            if allocated and rng.random() < 0.9:
                oid = rng.choice(allocated)[0]
            else:
                oid = next_oid + rng.randrange(1, 100)
            emit(Free(oid))
    if in_gc and rng.random() < 0.5:
        emit(GcEnd())
    # re-number so seq stays strictly increasing with occasional gaps
    out = []
    seq = rng.randrange(3)
    for e in events:
        out.append(Event(seq, e.time, e.thread, e.body))
        seq += rng.choice((1, 1, 1, 2, 5))
    return out


def random_config(seed: int) -> EngineConfig:
    rng = random.Random(seed ^ 0x5EED)
    return EngineConfig(min_size=rng.choice((0, 512, 1024, 1024, 2048)),
                        attach_mode=rng.random() < 0.5,
                        epoch_fallback=rng.random() < 0.8)
