"""Disjoint address-interval index backed by a top-down splay tree.

Nodes are keyed by interval start.  A containment lookup splays the node
whose range holds the address straight to the root, so repeated probes into
the same object cost O(1) and arbitrary sequences are amortized O(log n).

The tree is not thread safe; a lookup restructures it just like a mutation
does, so callers sharing one index across threads must hold a single
exclusive lock around every call.
"""
from __future__ import annotations

import enum
from typing import Iterable, Iterator, NamedTuple, Optional

_TOP = 1 << 64  # above every valid address


class Interval(NamedTuple):
    start: int
    length: int
    payload: int

    @property
    def end(self) -> int:
        return self.start + self.length

    def __contains__(self, addr) -> bool:
        return self.start <= addr < self.start + self.length


class OverlapError(ValueError):
    def __init__(self, new: Interval, existing: Interval):
        super().__init__(
            f"[{new.start:#x}, {new.end:#x}) overlaps [{existing.start:#x}, {existing.end:#x})"
            f" held by {existing.payload}")
        self.new = new
        self.existing = existing


class Policy(enum.Enum):
    REJECT = "reject"
    EVICT_OVERLAPS = "evict_overlaps"


class Relocation(enum.Enum):
    MOVED = "moved"
    SRC_MISSING = "src_missing"


class _Node:
    __slots__ = ("start", "end", "payload", "left", "right")

    def __init__(self, start, end, payload):
        self.start = start
        self.end = end
        self.payload = payload
        self.left = None
        self.right = None

    def interval(self) -> Interval:
        return Interval(self.start, self.end - self.start, self.payload)


def _splay(t: _Node, key: int) -> _Node:
    # Top-down splay (Sleator & Tarjan).  Returns the new subtree root: the
    # node holding key, or the last node on its search path.
    header = _Node(0, 0, None)
    l = r = header
    while True:
        if key < t.start:
            tl = t.left
            if tl is None:
                break
            if key < tl.start:
                t.left = tl.right
                tl.right = t
                t = tl
                if t.left is None:
                    break
            r.left = t
            r = t
            t = t.left
        elif key > t.start:
            tr = t.right
            if tr is None:
                break
            if key > tr.start:
                t.right = tr.left
                tr.left = t
                t = tr
                if t.right is None:
                    break
            l.right = t
            l = t
            t = t.right
        else:
            break
    l.right = t.left
    r.left = t.right
    t.left = header.right
    t.right = header.left
    return t


def _splay_containing(t: _Node, addr: int) -> _Node:
    # Same walk as _splay, but a node "matches" when its range contains
    # addr.  Disjointness makes this a consistent search order, so a hit
    # reaches the root in a single pass.
    header = _Node(0, 0, None)
    l = r = header
    while True:
        if addr < t.start:
            tl = t.left
            if tl is None:
                break
            if addr < tl.start:
                t.left = tl.right
                tl.right = t
                t = tl
                if t.left is None:
                    break
            r.left = t
            r = t
            t = t.left
        elif addr >= t.end:
            tr = t.right
            if tr is None:
                break
            if addr >= tr.end:
                t.right = tr.left
                tr.left = t
                t = tr
                if t.right is None:
                    break
            l.right = t
            l = t
            t = t.right
        else:
            break
    l.right = t.left
    r.left = t.right
    t.left = header.right
    t.right = header.left
    return t


class IntervalIndex:
    """Set of pairwise-disjoint half-open intervals ``[start, start+length)``."""

    def __init__(self):
        self.root: Optional[_Node] = None
        self._count = 0

    @classmethod
    def from_sorted(cls, intervals: Iterable[Interval]) -> "IntervalIndex":
        """Build a balanced tree from intervals sorted by start (O(n))."""
        nodes = []
        prev_end = -1
        for iv in intervals:
            if iv.length <= 0:
                raise ValueError(f"interval length must be positive: {iv}")
            if iv.start < prev_end:
                raise ValueError("intervals must be sorted and disjoint")
            prev_end = iv.start + iv.length
            nodes.append(_Node(iv.start, prev_end, iv.payload))

        def build(lo, hi):
            if lo >= hi:
                return None
            mid = (lo + hi) // 2
            n = nodes[mid]
            n.left = build(lo, mid)
            n.right = build(mid + 1, hi)
            return n

        idx = cls()
        idx.root = build(0, len(nodes))
        idx._count = len(nodes)
        return idx

    def __len__(self):
        return self._count

    def live_count(self) -> int:
        return self._count

    def root_interval(self) -> Optional[Interval]:
        return self.root.interval() if self.root is not None else None

    def _floor(self, addr: int) -> Optional[_Node]:
        # Bring the node with the greatest start <= addr to the root.
        t = self.root
        if t is None:
            return None
        t = _splay(t, addr)
        if t.start > addr:
            if t.left is None:
                self.root = t
                return None
            p = _splay(t.left, _TOP)
            t.left = None
            p.right = t
            t = p
        self.root = t
        return t

    def lookup(self, addr: int) -> Optional[Interval]:
        """Return the interval containing ``addr`` (splayed to the root), or None."""
        t = self.root
        if t is None:
            return None
        t = self.root = _splay_containing(t, addr)
        if t.start <= addr < t.end:
            return Interval(t.start, t.end - t.start, t.payload)
        return None

    def lookup_payload(self, addr: int):
        """Fast path of :meth:`lookup` that returns only the payload."""
        t = self.root
        if t is None:
            return None
        if not t.start <= addr < t.end:
            t = self.root = _splay_containing(t, addr)
            if not t.start <= addr < t.end:
                return None
        return t.payload

    def get(self, start: int) -> Optional[Interval]:
        """Return the interval beginning exactly at ``start``."""
        t = self.root
        if t is None:
            return None
        t = self.root = _splay(t, start)
        return t.interval() if t.start == start else None

    def _remove_root(self) -> _Node:
        t = self.root
        if t.left is None:
            self.root = t.right
        else:
            p = _splay(t.left, t.start)
            p.right = t.right
            self.root = p
        t.left = t.right = None
        self._count -= 1
        return t

    def overlapping(self, start: int, length: int) -> list[Interval]:
        """Intervals intersecting ``[start, start+length)`` in ascending order."""
        end = start + length
        out = []
        for iv in self.iterate_from(start):
            if iv.start >= end:
                break
            if iv.end > start:
                out.append(iv)
        return out

    def insert(self, iv: Interval, policy: Policy = Policy.EVICT_OVERLAPS) -> list[Interval]:
        """Add ``iv`` and return whatever had to be evicted to keep disjointness.

        With ``Policy.REJECT`` an overlap raises :class:`OverlapError` and
        the index is left unchanged.
        """
        start, length, payload = iv
        if length <= 0:
            raise ValueError(f"interval length must be positive: {iv}")
        end = start + length
        evicted = []
        while True:
            n = self._floor(end - 1)
            if n is None or n.end <= start:
                break
            if policy is Policy.REJECT:
                raise OverlapError(Interval(start, length, payload), n.interval())
            evicted.append(self._remove_root().interval())
        evicted.reverse()
        node = _Node(start, end, payload)
        t = self.root
        if t is not None:
            t = _splay(t, start)
            if t.start < start:
                node.left = t
                node.right = t.right
                t.right = None
            else:
                node.right = t
                node.left = t.left
                t.left = None
        self.root = node
        self._count += 1
        return evicted

    def remove(self, start: int) -> Optional[Interval]:
        """Remove and return the interval beginning exactly at ``start``."""
        t = self.root
        if t is None:
            return None
        self.root = _splay(t, start)
        if self.root.start != start:
            return None
        return self._remove_root().interval()

    def relocate(self, src_start: int, dst_start: int) -> tuple[Relocation, list[Interval]]:
        """Move the interval at ``src_start`` so it begins at ``dst_start``.

        Length and payload are kept; anything already occupying the
        destination is evicted and returned.
        """
        moved = self.remove(src_start)
        if moved is None:
            return Relocation.SRC_MISSING, []
        evicted = self.insert(Interval(dst_start, moved.length, moved.payload),
                              Policy.EVICT_OVERLAPS)
        return Relocation.MOVED, evicted

    def iterate(self) -> Iterator[Interval]:
        """All intervals in ascending start order (no splaying)."""
        stack = []
        t = self.root
        while stack or t is not None:
            while t is not None:
                stack.append(t)
                t = t.left
            t = stack.pop()
            yield t.interval()
            t = t.right

    __iter__ = iterate

    def iterate_from(self, addr: int) -> Iterator[Interval]:
        """Ascending intervals whose end is past ``addr``."""
        stack = []
        t = self.root
        while t is not None:
            if t.end > addr:
                stack.append(t)
                t = t.left
            else:
                t = t.right
        while stack:
            t = stack.pop()
            yield t.interval()
            t = t.right
            while t is not None:
                stack.append(t)
                t = t.left
