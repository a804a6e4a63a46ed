"""Offline analysis: merge per-thread profiles, rank objects, render reports."""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .attribution import ObjectAggregate, Profile
from .cct import Cct
from .trace import CallPath, MetricKind, format_path, path_from_json, path_to_json

PROFILE_VERSION = 1
TEXT_CONTEXTS = 5


@dataclass
class MergedProfile:
    alloc_cct: Cct = field(default_factory=Cct)
    aggregates: dict = field(default_factory=dict)  # CallPath -> ObjectAggregate
    unattributed: dict = field(default_factory=dict)
    unattributed_samples: int = 0
    threads: int = 0
    diagnostics: Counter = field(default_factory=Counter)

    def grand_total(self, kind: MetricKind):
        return sum(a.metric(kind) for a in self.aggregates.values()) + self.unattributed.get(kind, 0)

    def has_numa(self) -> bool:
        return any(a.remote_count or a.local_count for a in self.aggregates.values())

    def to_json(self) -> dict:
        return profile_to_json(self)

    def __eq__(self, other):
        if not isinstance(other, MergedProfile):
            return NotImplemented
        return self.to_json() == other.to_json()

    __hash__ = None


def merge_profiles(profiles: Iterable[Profile]) -> MergedProfile:
    """Coalesce per-thread profiles; equal allocation paths merge across threads."""
    out = MergedProfile()
    for p in sorted(profiles, key=lambda p: p.thread):
        out.threads += 1
        out.alloc_cct.merge(p.alloc_cct)
        for agg in p.aggregates.values():
            dst = out.aggregates.get(agg.alloc_path)
            if dst is None:
                dst = out.aggregates[agg.alloc_path] = ObjectAggregate(-1, agg.alloc_path)
            dst.absorb(agg)
        for kind, v in p.unattributed.items():
            out.unattributed[kind] = out.unattributed.get(kind, 0) + v
        out.unattributed_samples += p.unattributed_samples
        out.diagnostics.update(p.diagnostics)
    out.aggregates = {path: out.aggregates[path] for path in sorted(out.aggregates)}
    for i, agg in enumerate(out.aggregates.values()):
        agg.site = i
    return out


# ---------------------------------------------------------------------------
# profile JSON

def _metrics_to_json(metrics: dict) -> dict:
    return {k.value: metrics[k] for k in sorted(metrics)}


def _metrics_from_json(data: dict) -> dict:
    return {MetricKind(k): v for k, v in data.items()}


def profile_to_json(mp: MergedProfile) -> dict:
    sites = []
    for path in sorted(mp.aggregates):
        a = mp.aggregates[path]
        sites.append({
            "path": path_to_json(path),
            "alloc_count": a.allocation_count,
            "bytes": a.total_bytes,
            "metrics": _metrics_to_json(a.metrics),
            "remote": a.remote_count,
            "local": a.local_count,
            "access_cct": a.access_cct.to_json(),
        })
    unattributed = _metrics_to_json(mp.unattributed)
    unattributed["samples"] = mp.unattributed_samples
    return {
        "version": PROFILE_VERSION,
        "threads": mp.threads,
        "sites": sites,
        "unattributed": unattributed,
        "alloc_cct": mp.alloc_cct.to_json(),
        "diagnostics": dict(sorted(mp.diagnostics.items())),
    }


def profile_from_json(data: dict) -> MergedProfile:
    if data.get("version") != PROFILE_VERSION:
        raise ValueError(f"unsupported profile version {data.get('version')!r}")
    mp = MergedProfile(threads=data["threads"])
    for i, s in enumerate(data["sites"]):
        path = path_from_json(s["path"])
        mp.aggregates[path] = ObjectAggregate(
            i, path, s["alloc_count"], s["bytes"], _metrics_from_json(s["metrics"]),
            s["remote"], s["local"], Cct.from_json(s["access_cct"]))
    un = dict(data["unattributed"])
    mp.unattributed_samples = un.pop("samples", 0)
    mp.unattributed = _metrics_from_json(un)
    if "alloc_cct" in data:
        mp.alloc_cct = Cct.from_json(data["alloc_cct"])
    mp.diagnostics = Counter(data.get("diagnostics", {}))
    return mp


def dumps_profile(mp: MergedProfile) -> bytes:
    return json.dumps(profile_to_json(mp), separators=(",", ":")).encode() + b"\n"


def loads_profile(raw) -> MergedProfile:
    return profile_from_json(json.loads(raw))


# ---------------------------------------------------------------------------
# ranking

@dataclass
class AccessContext:
    path: CallPath
    value: float
    share: float  # percent of the site's ranked quantity


@dataclass
class ReportEntry:
    rank: int
    alloc_path: CallPath
    allocation_count: int
    total_bytes: int
    metric_total: float
    share: float
    remote_count: int
    local_count: int
    remote_share: Optional[float]  # percent of NUMA-classified accesses
    contexts: list = field(default_factory=list)


@dataclass
class Report:
    """Ranked objects for one metric, or by remote accesses when ``numa``."""
    metric: Optional[MetricKind]
    numa: bool
    threads: int
    grand_total: float
    entries: list = field(default_factory=list)
    others_total: float = 0
    others_share: float = 0.0
    unattributed_total: float = 0
    unattributed_share: float = 0.0
    unattributed_samples: int = 0


def _pct(part, whole) -> float:
    return 100.0 * part / whole if whole else 0.0


def _contexts(agg: ObjectAggregate, key) -> list[AccessContext]:
    nodes = [(key(n), n) for n in agg.access_cct.nodes() if key(n) > 0]
    whole = sum(v for v, _ in nodes)
    nodes.sort(key=lambda vn: (-vn[0], vn[1].path()))
    return [AccessContext(n.path(), v, _pct(v, whole)) for v, n in nodes]


def _entry(rank, agg, value, share, contexts) -> ReportEntry:
    rs = agg.remote_share
    return ReportEntry(rank, agg.alloc_path, agg.allocation_count, agg.total_bytes,
                       value, share, agg.remote_count, agg.local_count,
                       None if rs is None else 100.0 * rs, contexts)


def rank(merged: MergedProfile, kind: MetricKind, top_n: int = 10) -> Report:
    """Order sites by their total for ``kind``.

    Ties fall back to allocation count (descending) and then to the
    canonical path order.  Shares are relative to every sampled unit of the
    metric, unattributed included.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    grand = merged.grand_total(kind)
    sites = [a for a in merged.aggregates.values() if a.metric(kind) > 0]
    sites.sort(key=lambda a: (-a.metric(kind), -a.allocation_count, a.alloc_path))
    entries = []
    for i, agg in enumerate(sites[:top_n], 1):
        v = agg.metric(kind)
        entries.append(_entry(i, agg, v, _pct(v, grand),
                              _contexts(agg, lambda n: n.metrics.get(kind, 0))))
    others = sum(a.metric(kind) for a in sites[top_n:])
    un = merged.unattributed.get(kind, 0)
    return Report(kind, False, merged.threads, grand, entries, others, _pct(others, grand),
                  un, _pct(un, grand), merged.unattributed_samples)


def numa_report(merged: MergedProfile, top_n: int = 10) -> Report:
    """Order sites by remote access count; shares are remote/(remote+local)."""
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    sites = [a for a in merged.aggregates.values() if a.remote_count + a.local_count > 0]
    grand = sum(a.remote_count + a.local_count for a in sites)
    sites.sort(key=lambda a: (-a.remote_count, -a.allocation_count, a.alloc_path))
    entries = []
    for i, agg in enumerate(sites[:top_n], 1):
        entries.append(_entry(i, agg, agg.remote_count, 100.0 * agg.remote_share,
                              _contexts(agg, lambda n: n.remote_count)))
    others = sum(a.remote_count for a in sites[top_n:])
    return Report(None, True, merged.threads, grand, entries, others, _pct(others, grand))


# ---------------------------------------------------------------------------
# rendering

def _num(v) -> str:
    return str(v) if isinstance(v, int) else f"{v:.6g}"


def report_to_json(r: Report) -> dict:
    return {
        "metric": None if r.metric is None else r.metric.value,
        "numa": r.numa,
        "threads": r.threads,
        "grand_total": r.grand_total,
        "entries": [{
            "rank": e.rank,
            "alloc_path": path_to_json(e.alloc_path),
            "allocation_count": e.allocation_count,
            "total_bytes": e.total_bytes,
            "metric_total": e.metric_total,
            "share": e.share,
            "remote_count": e.remote_count,
            "local_count": e.local_count,
            "remote_share": e.remote_share,
            "contexts": [{"path": path_to_json(c.path), "value": c.value, "share": c.share}
                         for c in e.contexts],
        } for e in r.entries],
        "others_total": r.others_total,
        "others_share": r.others_share,
        "unattributed_total": r.unattributed_total,
        "unattributed_share": r.unattributed_share,
        "unattributed_samples": r.unattributed_samples,
    }


def report_from_json(d: dict) -> Report:
    entries = [ReportEntry(
        e["rank"], path_from_json(e["alloc_path"]), e["allocation_count"], e["total_bytes"],
        e["metric_total"], e["share"], e["remote_count"], e["local_count"], e["remote_share"],
        [AccessContext(path_from_json(c["path"]), c["value"], c["share"]) for c in e["contexts"]],
    ) for e in d["entries"]]
    return Report(None if d["metric"] is None else MetricKind(d["metric"]), d["numa"],
                  d["threads"], d["grand_total"], entries, d["others_total"], d["others_share"],
                  d["unattributed_total"], d["unattributed_share"], d["unattributed_samples"])


def _render_text(r: Report) -> str:
    lines = []
    if r.numa:
        lines.append("== NUMA remote accesses by object ==")
        lines.append(f"classified samples: {_num(r.grand_total)}  threads: {r.threads}")
        if not r.entries:
            lines.append("no NUMA data")
            return "\n".join(lines) + "\n"
    else:
        lines.append(f"== objects by {r.metric.value} ==")
        lines.append(f"grand total: {_num(r.grand_total)}  threads: {r.threads}")
        if not r.entries:
            lines.append("no attributed samples")
    for e in r.entries:
        remote = "n/a" if e.remote_share is None else f"{e.remote_share:.1f}%"
        if r.numa:
            head = (f"#{e.rank}  remote {e.remote_count}/{e.remote_count + e.local_count}"
                    f" ({e.share:.1f}%)")
        else:
            head = f"#{e.rank}  {_num(e.metric_total)} ({e.share:.1f}%)  remote {remote}"
        lines.append(f"{head}  allocs {e.allocation_count}  bytes {e.total_bytes}")
        lines.append(f"  alloc: {format_path(e.alloc_path)}")
        for c in e.contexts[:TEXT_CONTEXTS]:
            where = format_path(c.path) if c.path else "(no access path)"
            lines.append(f"    access: {_num(c.value)} ({c.share:.1f}%)  {where}")
        if len(e.contexts) > TEXT_CONTEXTS:
            lines.append(f"    ... {len(e.contexts) - TEXT_CONTEXTS} more access contexts")
    if r.others_total:
        lines.append(f"others: {_num(r.others_total)} ({r.others_share:.1f}%)")
    if not r.numa:
        lines.append(f"unattributed: {_num(r.unattributed_total)} ({r.unattributed_share:.1f}%)"
                     f" in {r.unattributed_samples} samples")
    return "\n".join(lines) + "\n"


def render(report: Report, style: str = "text") -> bytes:
    if style == "text":
        return _render_text(report).encode()
    if style == "json":
        return json.dumps(report_to_json(report), indent=1).encode() + b"\n"
    raise ValueError(f"unknown render style {style!r}")
