import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from objprof.synth import generate, random_trace
from objprof.synth import generator as gen
from objprof.trace import (
    MAGIC, Alloc, Event, Frame, Free, GcEnd, GcStart, MetricKind, Move, Sample,
    TraceOrderError, TraceParseError, TraceStructureError, make_path, read_trace,
    trace_bytes, validate_trace, write_trace,
)

EXAMPLE_LINE = (b'{"seq":0,"time":0,"thread":1,"alloc":{"object_id":7,"base":4096,'
                b'"size":2048,"path":[["A.f",10]]}}\n')


def roundtrip(events, fmt):
    buf = io.BytesIO()
    write_trace(events, buf, fmt)
    buf.seek(0)
    return list(read_trace(buf))


def test_empty_file():
    assert list(read_trace(io.BytesIO(b""))) == []
    assert trace_bytes([]) == b""


def test_example_alloc_line():
    (e,) = list(read_trace(io.BytesIO(EXAMPLE_LINE)))
    assert e == Event(0, 0, 1, Alloc(7, 4096, 2048, (Frame("A.f", 10),)))
    assert trace_bytes([e]) == EXAMPLE_LINE


def test_gc_pair_two_lines():
    events = [Event(0, 0, 0, GcStart()), Event(1, 5, 0, GcEnd())]
    data = trace_bytes(events)
    assert data.count(b"\n") == 2
    assert roundtrip(events, "ndjson") == events


def test_binary_has_magic():
    events = random_trace(1, 50)
    assert trace_bytes(events, "binary").startswith(MAGIC)


@pytest.mark.parametrize("fmt", ["ndjson", "binary"])
def test_scenario_roundtrip(fmt):
    events, _ = generate(gen.bloat(seed=2, samples=2000, allocs=300))
    assert roundtrip(events, fmt) == events


@pytest.mark.parametrize("fmt", ["ndjson", "binary"])
@pytest.mark.parametrize("seed", range(5))
def test_fuzz_roundtrip(fmt, seed):
    events = random_trace(seed, 500)
    assert roundtrip(events, fmt) == events


def test_float_values_roundtrip_binary():
    p = make_path([("m", 1)])
    events = [Event(0, 0, 0, Sample(100, MetricKind.LOAD_LATENCY, 2.5, 0, 1, p)),
              Event(1, 1, 0, Sample(100, MetricKind.L1_MISS, 3, -1, -1, ()))]
    for fmt in ("ndjson", "binary"):
        got = roundtrip(events, fmt)
        assert got == events
        assert isinstance(got[1].body.value, int)


def test_write_is_byte_stable():
    events = random_trace(99, 10_000)
    for fmt in ("ndjson", "binary"):
        assert trace_bytes(events, fmt) == trace_bytes(list(events), fmt)


def test_parse_error_has_line_number():
    bad = EXAMPLE_LINE + b'{"seq":1,"time":0,"thread":1,"free":{}}\n'
    with pytest.raises(TraceParseError) as info:
        list(read_trace(io.BytesIO(bad)))
    assert info.value.line == 2
    with pytest.raises(TraceParseError):
        list(read_trace(io.BytesIO(b"not json\n")))


def test_seq_regression_rejected():
    events = [Event(5, 0, 0, Free(1)), Event(5, 1, 0, Free(2))]
    assert [v.rule for v in validate_trace(events)] == ["seq-regression"]
    with pytest.raises(TraceOrderError):
        trace_bytes(events)
    raw = b"".join(trace_bytes([e]) for e in events)
    with pytest.raises(TraceOrderError):
        list(read_trace(io.BytesIO(raw)))


def test_move_outside_gc():
    events = [Event(0, 0, 0, Move(1, 2, 3))]
    assert [v.rule for v in validate_trace(events)] == ["move-outside-gc"]
    raw = trace_bytes([Event(0, 0, 0, GcStart()), Event(1, 0, 0, Move(1, 2, 3))])
    bad = raw.split(b"\n")[1] + b"\n"
    with pytest.raises(TraceStructureError):
        list(read_trace(io.BytesIO(bad)))


def test_duplicate_object_id():
    p = make_path([("m", 1)])
    events = [Event(0, 0, 0, Alloc(1, 0, 8, p)), Event(1, 0, 0, Alloc(1, 64, 8, p))]
    vs = validate_trace(events)
    assert [v.rule for v in vs] == ["duplicate-object-id"]
    assert vs[0].seq == 1


def test_gc_nesting_rules():
    assert [v.rule for v in validate_trace([Event(0, 0, 0, GcStart()),
                                            Event(1, 0, 0, GcStart())])] == ["gc-nested"]
    assert [v.rule for v in validate_trace([Event(0, 0, 0, GcEnd())])] == ["gc-end-unmatched"]
    # a trailing open epoch is tolerated
    assert validate_trace([Event(0, 0, 0, GcStart())]) == []


def test_field_validation():
    with pytest.raises(ValueError):
        Frame("", 1)
    with pytest.raises(ValueError):
        Frame("m", -1)
    with pytest.raises(ValueError):
        Alloc(1, 0, 0, ())
    with pytest.raises(ValueError):
        Sample(0, MetricKind.L1_MISS, 0, 0, 0, ())


def test_generated_traces_validate():
    for sc in gen.catalog():
        events, _ = generate(sc)
        assert validate_trace(events) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(["ndjson", "binary"]))
def test_roundtrip_property(seed, fmt):
    events = random_trace(seed, random.Random(seed).randrange(0, 200))
    assert roundtrip(events, fmt) == events
