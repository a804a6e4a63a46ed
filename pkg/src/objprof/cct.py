"""Calling context trees with per-node metric accumulators.

Each node holds only its *own* contributions (the samples or allocations
whose leaf frame landed there).  Inclusive rollups are computed on demand so
that merging never double counts.
"""
from __future__ import annotations

from typing import Iterator, Optional

from .trace import CallPath, Frame, MetricKind


class CctNode:
    __slots__ = ("frame", "parent", "children", "metrics",
                 "remote_count", "local_count", "alloc_count", "alloc_bytes")

    def __init__(self, frame: Optional[Frame] = None, parent: Optional["CctNode"] = None):
        self.frame = frame
        self.parent = parent
        self.children: dict[Frame, CctNode] = {}
        self.metrics: dict[MetricKind, float] = {}
        self.remote_count = 0
        self.local_count = 0
        self.alloc_count = 0
        self.alloc_bytes = 0

    def child(self, frame: Frame) -> "CctNode":
        node = self.children.get(frame)
        if node is None:
            node = self.children[frame] = CctNode(frame, self)
        return node

    def add_metric(self, kind: MetricKind, value) -> None:
        if not value > 0:
            raise ValueError(f"metric value must be positive, got {value!r}")
        m = self.metrics
        m[kind] = m.get(kind, 0) + value

    def add_numa(self, is_remote: bool) -> None:
        if is_remote:
            self.remote_count += 1
        else:
            self.local_count += 1

    def add_alloc(self, nbytes: int) -> None:
        self.alloc_count += 1
        self.alloc_bytes += nbytes

    def sorted_children(self) -> list["CctNode"]:
        return [self.children[f] for f in sorted(self.children)]

    def path(self) -> CallPath:
        frames = []
        n = self
        while n.parent is not None:
            frames.append(n.frame)
            n = n.parent
        frames.reverse()
        return tuple(frames)

    def is_empty(self) -> bool:
        return not (self.metrics or self.remote_count or self.local_count or self.alloc_count)

    def _absorb(self, other: "CctNode") -> None:
        for kind, v in other.metrics.items():
            self.metrics[kind] = self.metrics.get(kind, 0) + v
        self.remote_count += other.remote_count
        self.local_count += other.local_count
        self.alloc_count += other.alloc_count
        self.alloc_bytes += other.alloc_bytes

    def __repr__(self):
        return f"CctNode({self.frame}, children={len(self.children)})"


class Cct:
    def __init__(self):
        self.root = CctNode()

    def insert_path(self, path: CallPath) -> CctNode:
        node = self.root
        for frame in path:
            node = node.child(frame)
        return node

    def find(self, path: CallPath) -> Optional[CctNode]:
        node = self.root
        for frame in path:
            node = node.children.get(frame)
            if node is None:
                return None
        return node

    def nodes(self) -> Iterator[CctNode]:
        """Pre-order walk in canonical child order, root included."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.sorted_children()))

    def node_count(self) -> int:
        """Number of non-root nodes."""
        return sum(1 for _ in self.nodes()) - 1

    def merge(self, src: "Cct") -> None:
        merge(self, src)

    def total(self, kind: MetricKind):
        return total(self, kind)

    def copy(self) -> "Cct":
        out = Cct()
        merge(out, self)
        return out

    def to_json(self) -> dict:
        return node_to_json(self.root)

    @classmethod
    def from_json(cls, data: dict) -> "Cct":
        cct = cls()
        _fill_from_json(cct.root, data)
        return cct

    def __eq__(self, other):
        if not isinstance(other, Cct):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None


def path_of(node: CctNode) -> CallPath:
    return node.path()


def merge(dst: Cct, src: Cct) -> None:
    """Fold ``src`` into ``dst`` top-down; ``src`` is left untouched."""
    stack = [(dst.root, src.root)]
    while stack:
        d, s = stack.pop()
        d._absorb(s)
        for frame, sc in s.children.items():
            stack.append((d.child(frame), sc))


def total(cct: Cct, kind: MetricKind):
    return sum(n.metrics.get(kind, 0) for n in cct.nodes())


def counter_totals(cct: Cct) -> dict:
    """Sum of every counter over the whole tree, keyed by counter name."""
    out = {"remote": 0, "local": 0, "alloc_count": 0, "alloc_bytes": 0}
    for n in cct.nodes():
        for kind, v in n.metrics.items():
            out[kind.value] = out.get(kind.value, 0) + v
        out["remote"] += n.remote_count
        out["local"] += n.local_count
        out["alloc_count"] += n.alloc_count
        out["alloc_bytes"] += n.alloc_bytes
    return out


def inclusive(node: CctNode, kind: MetricKind):
    """Metric summed over ``node`` and all of its descendants."""
    acc = 0
    stack = [node]
    while stack:
        n = stack.pop()
        acc += n.metrics.get(kind, 0)
        stack.extend(n.children.values())
    return acc


def node_to_json(node: CctNode) -> dict:
    out = {
        "frame": None if node.frame is None else [node.frame.method, node.frame.location],
        "metrics": {k.value: node.metrics[k] for k in sorted(node.metrics)},
    }
    if node.remote_count or node.local_count:
        out["remote"] = node.remote_count
        out["local"] = node.local_count
    if node.alloc_count:
        out["alloc_count"] = node.alloc_count
        out["alloc_bytes"] = node.alloc_bytes
    out["children"] = [node_to_json(c) for c in node.sorted_children()]
    return out


def _fill_from_json(node: CctNode, data: dict) -> None:
    for k, v in data.get("metrics", {}).items():
        node.metrics[MetricKind(k)] = v
    node.remote_count = data.get("remote", 0)
    node.local_count = data.get("local", 0)
    node.alloc_count = data.get("alloc_count", 0)
    node.alloc_bytes = data.get("alloc_bytes", 0)
    for child in data.get("children", []):
        method, loc = child["frame"]
        _fill_from_json(node.child(Frame(method, loc)), child)
