"""JSON form of ground truth, written next to generated traces."""
from __future__ import annotations

import json
from dataclasses import asdict
from typing import Optional

from ..trace import MetricKind, path_from_json, path_to_json
from .generator import GroundTruth, Scenario
from .oracle import SiteTally, Summary

TRUTH_VERSION = 1


def truth_to_json(truth: GroundTruth, scenario: Optional[Scenario] = None) -> dict:
    s = truth.summary
    sites = []
    for path in sorted(s.sites):
        t = s.sites[path]
        sites.append({
            "path": path_to_json(path),
            "metrics": {k.value: t.metrics[k] for k in sorted(t.metrics)},
            "remote": t.remote, "local": t.local,
            "alloc_count": t.alloc_count, "bytes": t.bytes,
        })
    unattributed = {k.value: s.unattributed[k] for k in sorted(s.unattributed)}
    unattributed["samples"] = s.unattributed_samples
    stats = {k: v for k, v in truth.stats.items() if not isinstance(v, list)}
    stats["post_move_samples"] = len(truth.stats.get("post_move_seqs", ()))
    stats["stale_samples"] = len(truth.stats.get("stale_seqs", ()))
    out = {
        "version": TRUTH_VERSION,
        "config": {"min_size": truth.min_size, "attach_mode": False},
        "sites": sites,
        "unattributed": unattributed,
        "target_shares": truth.target_shares,
        "site_labels": {k: path_to_json(v) for k, v in truth.site_labels.items()},
        "stats": stats,
    }
    if scenario is not None:
        out["scenario"] = asdict(scenario)
    return out


def truth_from_json(data: dict) -> GroundTruth:
    if data.get("version") != TRUTH_VERSION:
        raise ValueError(f"unsupported truth version {data.get('version')!r}")
    s = Summary()
    for site in data["sites"]:
        s.sites[path_from_json(site["path"])] = SiteTally(
            {MetricKind(k): v for k, v in site["metrics"].items()},
            site["remote"], site["local"], site["alloc_count"], site["bytes"])
    un = dict(data["unattributed"])
    s.unattributed_samples = un.pop("samples", 0)
    s.unattributed = {MetricKind(k): v for k, v in un.items()}
    return GroundTruth(s, data["config"]["min_size"], {},
                       {k: path_from_json(v) for k, v in data.get("site_labels", {}).items()},
                       data.get("target_shares", {}), data.get("stats", {}))


def dumps_truth(truth: GroundTruth, scenario: Optional[Scenario] = None) -> bytes:
    return json.dumps(truth_to_json(truth, scenario), indent=1).encode() + b"\n"


def loads_truth(raw) -> GroundTruth:
    return truth_from_json(json.loads(raw))
