"""Event model for allocation/sample traces, plus NDJSON and binary codecs.

A trace is a flat, totally ordered stream of events.  Each event carries a
global ``seq`` number, an informational timestamp, the id of the thread that
produced it and exactly one body:

    Alloc    an object of ``size`` bytes was placed at ``base``
    Free     the object with ``object_id`` was reclaimed
    Move     the collector copied ``size`` bytes from ``src`` to ``dst``
    GcStart  a collection epoch opens
    GcEnd    the epoch closes
    Sample   the PMU reported an access at effective address ``ea``

The NDJSON form writes one object per line with the body under its tag key
(``alloc``, ``free``, ``move``, ``gc_start``, ``gc_end``, ``sample``).  The
binary form starts with the ``OBJP1`` magic, followed by length-prefixed
records whose fields appear in the same order as the JSON model.
"""
from __future__ import annotations

import enum
import io
import json
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator, NamedTuple, Sequence, Union

MAGIC = b"OBJP1"
ADDR_LIMIT = 1 << 64
NO_NODE = -1


class TraceError(ValueError):
    """Base class for malformed or inconsistent traces."""


class TraceParseError(TraceError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TraceOrderError(TraceError):
    pass


class TraceStructureError(TraceError):
    pass


class _FrameFields(NamedTuple):
    method: str
    location: int


class Frame(_FrameFields):
    """One call-path frame: method identifier plus source line or bytecode index."""
    __slots__ = ()

    def __new__(cls, method: str, location: int):
        if not isinstance(method, str) or not method:
            raise ValueError("frame method must be a non-empty string")
        if not isinstance(location, int) or isinstance(location, bool) or location < 0:
            raise ValueError(f"frame location must be >= 0, got {location!r}")
        return tuple.__new__(cls, (method, location))

    def __str__(self):
        return f"{self.method}:{self.location}"


CallPath = tuple  # tuple[Frame, ...], root first

UNKNOWN_ALLOC: CallPath = ()
UNKNOWN_LABEL = "UNKNOWN_ALLOC"


def make_path(pairs: Iterable) -> CallPath:
    """Build a call path from ``(method, location)`` pairs or Frames."""
    return tuple(p if isinstance(p, Frame) else Frame(p[0], p[1]) for p in pairs)


def format_path(path: CallPath, sep: str = " > ") -> str:
    if not path:
        return UNKNOWN_LABEL
    return sep.join(str(f) for f in path)


class MetricKind(enum.Enum):
    L1_MISS = "L1_MISS"
    TLB_MISS = "TLB_MISS"
    LOAD_LATENCY = "LOAD_LATENCY"
    GENERIC = "GENERIC"

    def __lt__(self, other):
        return self.value < other.value

    # members are singletons; identity hashing keeps dict-keyed tallies cheap
    __hash__ = object.__hash__


_KIND_CODES = {k: i for i, k in enumerate(MetricKind)}
_KINDS_BY_CODE = list(MetricKind)


def _check_addr(name, v):
    if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v < ADDR_LIMIT:
        raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v!r}")


def _check_count(name, v):
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ValueError(f"{name} must be a non-negative integer, got {v!r}")


def _check_size(v):
    if not isinstance(v, int) or isinstance(v, bool) or not 0 < v < ADDR_LIMIT:
        raise ValueError(f"size must be a positive integer, got {v!r}")


def _check_path(path):
    if not isinstance(path, tuple) or not all(isinstance(f, Frame) for f in path):
        raise ValueError("path must be a tuple of Frame")


@dataclass(frozen=True, slots=True)
class Alloc:
    object_id: int
    base: int
    size: int
    path: CallPath

    def __post_init__(self):
        _check_count("object_id", self.object_id)
        _check_addr("base", self.base)
        _check_size(self.size)
        _check_path(self.path)


@dataclass(frozen=True, slots=True)
class Free:
    object_id: int

    def __post_init__(self):
        _check_count("object_id", self.object_id)


@dataclass(frozen=True, slots=True)
class Move:
    src: int
    dst: int
    size: int

    def __post_init__(self):
        _check_addr("src", self.src)
        _check_addr("dst", self.dst)
        _check_size(self.size)


@dataclass(frozen=True, slots=True)
class GcStart:
    pass


@dataclass(frozen=True, slots=True)
class GcEnd:
    pass


@dataclass(frozen=True, slots=True)
class Sample:
    ea: int
    kind: MetricKind
    value: Union[int, float]
    cpu_node: int
    page_node: int
    path: CallPath

    def __post_init__(self):
        _check_addr("ea", self.ea)
        if not isinstance(self.kind, MetricKind):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if isinstance(self.value, bool) or not isinstance(self.value, (int, float)) or not self.value > 0:
            raise ValueError(f"sample value must be positive, got {self.value!r}")
        for name in ("cpu_node", "page_node"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < NO_NODE:
                raise ValueError(f"{name} must be >= 0 or {NO_NODE}, got {v!r}")
        _check_path(self.path)


Body = Union[Alloc, Free, Move, GcStart, GcEnd, Sample]


@dataclass(frozen=True, slots=True)
class Event:
    seq: int
    time: int
    thread: int
    body: Body

    def __post_init__(self):
        _check_count("seq", self.seq)
        _check_count("time", self.time)
        _check_count("thread", self.thread)
        if not isinstance(self.body, _TAGS):
            raise ValueError(f"unknown event body {self.body!r}")


_TAGS = (Alloc, Free, Move, GcStart, GcEnd, Sample)
_TAG_NAMES = {Alloc: "alloc", Free: "free", Move: "move",
              GcStart: "gc_start", GcEnd: "gc_end", Sample: "sample"}
_TAG_CODES = {cls: i for i, cls in enumerate(_TAGS)}


# ---------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Violation:
    seq: int
    rule: str
    message: str

    def __str__(self):
        return f"seq {self.seq}: {self.rule}: {self.message}"


_RULE_ERRORS = {
    "seq-regression": TraceOrderError,
    "move-outside-gc": TraceStructureError,
    "duplicate-object-id": TraceStructureError,
    "gc-nested": TraceStructureError,
    "gc-end-unmatched": TraceStructureError,
}


class TraceValidator:
    """Incremental checker for the cross-event trace invariants.

    Field-level invariants are enforced when events are constructed; this
    class covers ordering, object id uniqueness and GC epoch structure.
    """

    def __init__(self):
        self.last_seq = -1
        self.in_gc = False
        self.object_ids = set()

    def check(self, event: Event) -> list[Violation]:
        out = []
        seq = event.seq
        if seq <= self.last_seq:
            out.append(Violation(seq, "seq-regression",
                                 f"seq {seq} does not follow {self.last_seq}"))
        else:
            self.last_seq = seq
        body = event.body
        cls = type(body)
        if cls is Alloc:
            if body.object_id in self.object_ids:
                out.append(Violation(seq, "duplicate-object-id",
                                     f"object id {body.object_id} allocated twice"))
            self.object_ids.add(body.object_id)
        elif cls is Move:
            if not self.in_gc:
                out.append(Violation(seq, "move-outside-gc", "move with no enclosing GC epoch"))
        elif cls is GcStart:
            if self.in_gc:
                out.append(Violation(seq, "gc-nested", "GC start inside an open epoch"))
            self.in_gc = True
        elif cls is GcEnd:
            if not self.in_gc:
                out.append(Violation(seq, "gc-end-unmatched", "GC end with no open epoch"))
            self.in_gc = False
        return out

    def require(self, event: Event) -> None:
        """Like :meth:`check`, but raise on the first violation."""
        if event.seq > self.last_seq and type(event.body) is Sample:
            self.last_seq = event.seq
            return
        problems = self.check(event)
        if problems:
            raise violation_error(problems[0])


def violation_error(v: Violation) -> TraceError:
    return _RULE_ERRORS.get(v.rule, TraceStructureError)(str(v))


def validate_trace(events: Iterable[Event]) -> list[Violation]:
    """Return every invariant violation in ``events`` (empty when valid)."""
    validator = TraceValidator()
    out = []
    for e in events:
        out.extend(validator.check(e))
    return out


# ---------------------------------------------------------------------------
# JSON model

def path_to_json(path: CallPath) -> list:
    return [[f.method, f.location] for f in path]


def path_from_json(data) -> CallPath:
    return tuple(Frame(m, loc) for m, loc in data)


def event_to_json(e: Event) -> dict:
    b = e.body
    cls = type(b)
    if cls is Alloc:
        body = {"object_id": b.object_id, "base": b.base, "size": b.size,
                "path": path_to_json(b.path)}
    elif cls is Free:
        body = {"object_id": b.object_id}
    elif cls is Move:
        body = {"src": b.src, "dst": b.dst, "size": b.size}
    elif cls is Sample:
        body = {"ea": b.ea, "kind": b.kind.value, "value": b.value,
                "cpu_node": b.cpu_node, "page_node": b.page_node,
                "path": path_to_json(b.path)}
    else:
        body = {}
    return {"seq": e.seq, "time": e.time, "thread": e.thread, _TAG_NAMES[cls]: body}


def event_from_json(obj: dict) -> Event:
    if not isinstance(obj, dict):
        raise ValueError("event must be a JSON object")
    tags = [k for k in obj if k not in ("seq", "time", "thread")]
    if len(tags) != 1:
        raise ValueError(f"expected exactly one body key, got {tags}")
    tag = tags[0]
    b = obj[tag]
    if tag == "alloc":
        body = Alloc(b["object_id"], b["base"], b["size"], path_from_json(b["path"]))
    elif tag == "free":
        body = Free(b["object_id"])
    elif tag == "move":
        body = Move(b["src"], b["dst"], b["size"])
    elif tag == "gc_start":
        body = GcStart()
    elif tag == "gc_end":
        body = GcEnd()
    elif tag == "sample":
        body = Sample(b["ea"], MetricKind(b["kind"]), b["value"], b["cpu_node"],
                      b["page_node"], path_from_json(b["path"]))
    else:
        raise ValueError(f"unknown event tag {tag!r}")
    return Event(obj["seq"], obj["time"], obj["thread"], body)


def dump_event_line(e: Event) -> bytes:
    return json.dumps(event_to_json(e), separators=(",", ":")).encode() + b"\n"


# ---------------------------------------------------------------------------
# binary codec

_HDR = struct.Struct("<BQQQ")
_U64x3 = struct.Struct("<QQQ")
_U64 = struct.Struct("<Q")
_U32 = struct.Struct("<I")
_U16 = struct.Struct("<H")
_NODES = struct.Struct("<ii")
_INT_VAL = struct.Struct("<Bq")
_FLT_VAL = struct.Struct("<Bd")


def _pack_path(path: CallPath, out: list) -> None:
    out.append(_U32.pack(len(path)))
    for f in path:
        m = f.method.encode()
        out.append(_U16.pack(len(m)))
        out.append(m)
        out.append(_U64.pack(f.location))


def encode_binary(e: Event) -> bytes:
    b = e.body
    cls = type(b)
    parts = [_HDR.pack(_TAG_CODES[cls], e.seq, e.time, e.thread)]
    if cls is Alloc:
        parts.append(_U64x3.pack(b.object_id, b.base, b.size))
        _pack_path(b.path, parts)
    elif cls is Free:
        parts.append(_U64.pack(b.object_id))
    elif cls is Move:
        parts.append(_U64x3.pack(b.src, b.dst, b.size))
    elif cls is Sample:
        parts.append(_U64.pack(b.ea))
        parts.append(bytes([_KIND_CODES[b.kind]]))
        if isinstance(b.value, int):
            parts.append(_INT_VAL.pack(0, b.value))
        else:
            parts.append(_FLT_VAL.pack(1, b.value))
        parts.append(_NODES.pack(b.cpu_node, b.page_node))
        _pack_path(b.path, parts)
    payload = b"".join(parts)
    return _U32.pack(len(payload)) + payload


class _Cursor:
    __slots__ = ("buf", "pos")

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, st: struct.Struct):
        vals = st.unpack_from(self.buf, self.pos)
        self.pos += st.size
        return vals

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise ValueError("truncated record")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def path(self) -> CallPath:
        (n,) = self.take(_U32)
        frames = []
        for _ in range(n):
            (ln,) = self.take(_U16)
            method = self.raw(ln).decode()
            (loc,) = self.take(_U64)
            frames.append(Frame(method, loc))
        return tuple(frames)


def decode_binary(payload: bytes) -> Event:
    c = _Cursor(payload)
    tag, seq, time, thread = c.take(_HDR)
    if tag >= len(_TAGS):
        raise ValueError(f"unknown event tag code {tag}")
    cls = _TAGS[tag]
    if cls is Alloc:
        oid, base, size = c.take(_U64x3)
        body = Alloc(oid, base, size, c.path())
    elif cls is Free:
        body = Free(*c.take(_U64))
    elif cls is Move:
        body = Move(*c.take(_U64x3))
    elif cls is Sample:
        (ea,) = c.take(_U64)
        code = c.raw(1)[0]
        if code >= len(_KINDS_BY_CODE):
            raise ValueError(f"unknown metric kind code {code}")
        vtag = c.buf[c.pos] if c.pos < len(c.buf) else None
        if vtag == 0:
            _, value = c.take(_INT_VAL)
        elif vtag == 1:
            _, value = c.take(_FLT_VAL)
        else:
            raise ValueError(f"bad value tag {vtag!r}")
        cpu, page = c.take(_NODES)
        body = Sample(ea, _KINDS_BY_CODE[code], value, cpu, page, c.path())
    else:
        body = cls()
    if c.pos != len(payload):
        raise ValueError("trailing bytes in record")
    return Event(seq, time, thread, body)


# ---------------------------------------------------------------------------
# streaming I/O

def _ndjson_lines(first: bytes, source: BinaryIO) -> Iterator[bytes]:
    if first:
        # the sniffed prefix may already span several short lines
        yield from (first + source.readline()).splitlines(keepends=True)
    yield from source


def _ndjson_events(first: bytes, source: BinaryIO) -> Iterator[tuple[int, Event]]:
    for lineno, raw in enumerate(_ndjson_lines(first, source), 1):
        text = raw.strip()
        if not text:
            continue
        try:
            yield lineno, event_from_json(json.loads(text))
        except (ValueError, KeyError, TypeError) as exc:
            raise TraceParseError(lineno, f"{type(exc).__name__}: {exc}") from None


def _binary_events(source: BinaryIO) -> Iterator[tuple[int, Event]]:
    n = 0
    while True:
        head = source.read(4)
        if not head:
            return
        n += 1
        if len(head) < 4:
            raise TraceParseError(n, "truncated length prefix")
        (length,) = _U32.unpack(head)
        payload = source.read(length)
        if len(payload) < length:
            raise TraceParseError(n, "truncated record")
        try:
            yield n, decode_binary(payload)
        except (ValueError, struct.error, UnicodeDecodeError) as exc:
            raise TraceParseError(n, f"{type(exc).__name__}: {exc}") from None


def read_trace(source: BinaryIO) -> Iterator[Event]:
    """Lazily decode events from ``source``, checking invariants as it goes.

    The format is detected from the first bytes.  Malformed records raise
    :class:`TraceParseError` (with the line or record number); ordering and
    epoch problems raise :class:`TraceOrderError` / :class:`TraceStructureError`.
    """
    first = source.read(len(MAGIC))
    if first == MAGIC:
        records = _binary_events(source)
    else:
        records = _ndjson_events(first, source)
    validator = TraceValidator()
    for _, event in records:
        validator.require(event)
        yield event


def write_trace(events: Sequence[Event], sink: BinaryIO, format: str = "ndjson") -> None:
    """Serialize ``events``; the whole sequence is validated before any write."""
    if format not in ("ndjson", "binary"):
        raise ValueError(f"unknown trace format {format!r}")
    events = list(events)
    problems = validate_trace(events)
    if problems:
        raise violation_error(problems[0])
    if format == "ndjson":
        sink.write(b"".join(dump_event_line(e) for e in events))
    else:
        sink.write(MAGIC + b"".join(encode_binary(e) for e in events))


def load_trace(path) -> list[Event]:
    with open(path, "rb") as fh:
        return list(read_trace(fh))


def dump_trace(events: Sequence[Event], path, format: str = "ndjson") -> None:
    buf = io.BytesIO()
    write_trace(events, buf, format)
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def trace_bytes(events: Sequence[Event], format: str = "ndjson") -> bytes:
    buf = io.BytesIO()
    write_trace(events, buf, format)
    return buf.getvalue()
