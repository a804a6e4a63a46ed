import json
import random

import pytest

from objprof.analyzer import (
    MergedProfile, TEXT_CONTEXTS, dumps_profile, loads_profile, merge_profiles, numa_report, rank,
    render, report_from_json,
)
from objprof.attribution import ObjectAggregate, Profile, run
from objprof.synth import diff_summaries, generate, oracle_attribute, random_trace, summarize
from objprof.synth import generator as gen
from objprof.trace import MetricKind, make_path

L1 = MetricKind.L1_MISS
A = make_path([("m.A.new", 1)])
B = make_path([("m.B.new", 2)])
ACC = [make_path([("m.U.use", i)]) for i in range(8)]


def hand_profile(values, unattributed=0, thread=0, numa=None):
    p = Profile(thread)
    for sid, (path, v) in enumerate(values.items()):
        agg = p.aggregate(sid, path)
        agg.allocation_count = 1
        if v:
            agg.metrics[L1] = v
            agg.access_node(ACC[0]).metrics[L1] = v
        if numa and path in numa:
            agg.remote_count, agg.local_count = numa[path]
    if unattributed:
        p.unattributed[L1] = unattributed
        p.unattributed_samples = unattributed
    return p


def test_merge_empty_and_single():
    assert merge_profiles([]) == MergedProfile()
    p = hand_profile({A: 3})
    mp = merge_profiles([p])
    assert mp.threads == 1 and mp.aggregates[A].metric(L1) == 3


def test_shares_forced_by_arithmetic():
    mp = merge_profiles([hand_profile({A: 30, B: 10}, unattributed=10)])
    r = rank(mp, L1)
    assert [e.share for e in r.entries] == [60.0, 20.0]
    assert r.unattributed_share == 20.0
    assert [e.alloc_path for e in r.entries] == [A, B]


def test_empty_report():
    r = rank(MergedProfile(), L1)
    assert r.grand_total == 0 and r.entries == []
    text = render(r).decode()
    assert text.startswith("== objects by L1_MISS ==") and "no attributed samples" in text


def test_single_site_has_one_alloc_block():
    text = render(rank(merge_profiles([hand_profile({A: 5})]), L1, 1)).decode()
    assert text.count("alloc:") == 1


def test_top_n_and_others():
    mp = merge_profiles([hand_profile({A: 30, B: 10, make_path([("m.C.new", 3)]): 5})])
    r = rank(mp, L1, 1)
    assert len(r.entries) == 1 and r.others_total == 15
    with pytest.raises(ValueError):
        rank(mp, L1, 0)


def test_ties_break_on_alloc_count_then_path():
    p = hand_profile({B: 10, A: 10})
    p.aggregates[0].allocation_count = 5  # B
    assert [e.alloc_path for e in rank(merge_profiles([p]), L1).entries] == [B, A]
    p.aggregates[0].allocation_count = 1
    assert [e.alloc_path for e in rank(merge_profiles([p]), L1).entries] == [A, B]


def test_numa_report():
    assert "no NUMA data" in render(numa_report(merge_profiles([hand_profile({A: 1})]))).decode()
    mp = merge_profiles([hand_profile({A: 4, B: 4}, numa={A: (4, 0), B: (1, 3)})])
    r = numa_report(mp)
    assert [e.alloc_path for e in r.entries] == [A, B]
    assert r.entries[0].share == 100.0 and r.entries[1].share == 25.0


def test_text_truncates_contexts():
    p = Profile(0)
    agg = p.aggregate(0, A)
    for i, path in enumerate(ACC):
        agg.access_node(path).metrics[L1] = i + 1
        agg.metrics[L1] = agg.metrics.get(L1, 0) + i + 1
    r = rank(merge_profiles([p]), L1)
    assert len(r.entries[0].contexts) == len(ACC)
    text = render(r).decode()
    assert text.count("access:") == TEXT_CONTEXTS
    assert f"{len(ACC) - TEXT_CONTEXTS} more access contexts" in text


@pytest.mark.parametrize("sc", gen.catalog(), ids=lambda sc: sc.kind)
def test_report_json_roundtrip(sc):
    events, _ = generate(sc)
    mp = merge_profiles(run(events))
    for r in (rank(mp, L1, 5), numa_report(mp, 5)):
        assert report_from_json(json.loads(render(r, "json"))) == r
    assert loads_profile(dumps_profile(mp)) == mp


def test_merged_site_totals_equal_thread_sums():
    events, _ = generate(gen.bloat(threads=4, samples=4000, allocs=500))
    profs = run(events)
    assert len(profs) == 4
    mp = merge_profiles(profs)
    for path, agg in mp.aggregates.items():
        assert agg.metric(L1) == sum(a.metric(L1) for p in profs for a in p.aggregates.values()
                                     if a.alloc_path == path)
    assert diff_summaries(summarize(mp), oracle_attribute(events)) == []


def random_profile_set(seed):
    rng = random.Random(seed)
    profs = []
    for k in range(rng.randrange(1, 5)):
        for p in run(random_trace(rng.randrange(1 << 30), rng.randrange(50, 600), threads=3)):
            p.thread = rng.randrange(6)
            profs.append(p)
    return profs


@pytest.mark.parametrize("seed", range(10))
def test_merge_permutation_invariance(seed):
    profs = random_profile_set(seed)
    want = dumps_profile(merge_profiles(profs))
    rng = random.Random(seed)
    for _ in range(3):
        rng.shuffle(profs)
        assert dumps_profile(merge_profiles(profs)) == want


def test_render_rejects_unknown_style():
    with pytest.raises(ValueError):
        render(rank(MergedProfile(), L1), "xml")


def test_aggregate_remote_share():
    agg = ObjectAggregate(0, A, remote_count=3, local_count=1)
    assert agg.remote_share == 0.75
    assert ObjectAggregate(0, A).remote_share is None
