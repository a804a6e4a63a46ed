"""Reference models shared by the unit and acceptance tests."""
import bisect
import random

from objprof.cct import Cct
from objprof.interval_index import Interval, IntervalIndex, OverlapError, Policy, Relocation
from objprof.trace import Frame, MetricKind


class SortedListIndex:
    """Naive interval set: a sorted list scanned linearly."""

    def __init__(self):
        self.items = []  # sorted Interval list

    def lookup(self, addr):
        for iv in self.items:
            if iv.start <= addr < iv.start + iv.length:
                return iv
        return None

    def overlapping(self, start, length):
        return [iv for iv in self.items if iv.start < start + length and start < iv.start + iv.length]

    def insert(self, iv, policy=Policy.EVICT_OVERLAPS):
        hit = self.overlapping(iv.start, iv.length)
        if hit and policy is Policy.REJECT:
            raise OverlapError(iv, hit[0])
        self.items = [x for x in self.items if x not in hit]
        bisect.insort(self.items, iv)
        return hit

    def remove(self, start):
        for i, iv in enumerate(self.items):
            if iv.start == start:
                return self.items.pop(i)
        return None

    def relocate(self, src, dst):
        iv = self.remove(src)
        if iv is None:
            return Relocation.SRC_MISSING, []
        return Relocation.MOVED, self.insert(Interval(dst, iv.length, iv.payload))


def check_disjoint(ivs):
    for a, b in zip(ivs, ivs[1:]):
        assert a.start + a.length <= b.start, (a, b)


def run_index_script(seed, n_ops, span=1 << 16, check_every=1):
    """Drive IntervalIndex and the oracle with one random op script.

    Returns the number of operations compared.  Raises AssertionError on
    the first divergence.
    """
    rng = random.Random(seed)
    idx, ref = IntervalIndex(), SortedListIndex()
    payload = 0

    def pick_start():
        if ref.items and rng.random() < 0.7:
            return rng.choice(ref.items).start
        return rng.randrange(span)

    for step in range(n_ops):
        r = rng.random()
        if r < 0.35:
            payload += 1
            iv = Interval(rng.randrange(span), rng.randrange(1, 512), payload)
            policy = Policy.REJECT if rng.random() < 0.2 else Policy.EVICT_OVERLAPS
            try:
                want = ref.insert(iv, policy)
            except OverlapError:
                before = list(idx.iterate())
                try:
                    idx.insert(iv, policy)
                except OverlapError:
                    pass
                else:
                    raise AssertionError(f"step {step}: reject policy accepted {iv}")
                assert list(idx.iterate()) == before
            else:
                assert idx.insert(iv, policy) == want, step
        elif r < 0.75:
            if ref.items and rng.random() < 0.6:
                base = rng.choice(ref.items)
                addr = base.start + rng.choice((0, base.length - 1, base.length, rng.randrange(base.length)))
            else:
                addr = rng.randrange(span + 512)
            want = ref.lookup(addr)
            got = idx.lookup(addr)
            assert got == want, (step, addr, got, want)
            if got is not None:
                assert idx.root_interval() == got
        elif r < 0.88:
            start = pick_start()
            assert idx.remove(start) == ref.remove(start), step
        else:
            src, dst = pick_start(), rng.randrange(span)
            assert idx.relocate(src, dst) == ref.relocate(src, dst), step
        if step % check_every == 0:
            got = list(idx.iterate())
            assert got == ref.items, step
            check_disjoint(got)
            assert len(idx) == len(ref.items)
    return n_ops


FRAMES = [Frame(f"t.F{i}.m", i % 3) for i in range(6)]
KINDS = list(MetricKind)


def random_cct(rng, n_paths=30, depth=5):
    t = Cct()
    for _ in range(n_paths):
        path = tuple(rng.choice(FRAMES) for _ in range(rng.randrange(0, depth + 1)))
        node = t.insert_path(path)
        for _ in range(rng.randrange(3)):
            node.add_metric(rng.choice(KINDS), rng.randrange(1, 50))
        for _ in range(rng.randrange(3)):
            node.add_numa(rng.random() < 0.5)
        if rng.random() < 0.3:
            node.add_alloc(rng.randrange(1, 4096))
    return t
