"""Buffer machine, run bookkeeping and the run-length simulator.

Everything here works on plain integer keys.  A run is non-strict: a key equal
to the last written key always continues the current run.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from heapq import heapify, heappop, heapreplace
from typing import Callable, Iterable, NamedTuple, Sequence

from .errors import ArithmeticOverflow, DuplicateKey, InvalidState

KEY_MIN = -(2**63)
KEY_MAX = 2**63 - 1


def check_key(value: int) -> int:
    if not KEY_MIN <= value <= KEY_MAX:
        raise ArithmeticOverflow(f"key {value} outside signed 64-bit range")
    return value


class Direction(enum.Enum):
    UP = "up"
    DOWN = "down"

    @property
    def opposite(self) -> "Direction":
        return Direction.DOWN if self is Direction.UP else Direction.UP

    @property
    def sign(self) -> int:
        return 1 if self is Direction.UP else -1

    def __str__(self):
        return self.value


UP = Direction.UP
DOWN = Direction.DOWN


@dataclass
class Run:
    direction: Direction
    elements: list[int]

    def __len__(self):
        return len(self.elements)

    def validate(self):
        if not self.elements:
            raise InvalidState("empty run")
        s = self.direction.sign
        prev = s * self.elements[0]
        for x in self.elements[1:]:
            if s * x < prev:
                raise InvalidState(f"{self.direction} run is not monotone at {x}")
            prev = s * x


@dataclass
class RunSequence:
    runs: list[Run]
    m: int
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.runs)

    @property
    def lengths(self) -> list[int]:
        return [len(r) for r in self.runs]

    @property
    def directions(self) -> list[Direction]:
        return [r.direction for r in self.runs]

    def flatten(self) -> list[int]:
        out = []
        for r in self.runs:
            out.extend(r.elements)
        return out

    def validate(self, consumed: Sequence[int] | None = None):
        """Check every run is monotone, and (if given) that output conserves the input."""
        for r in self.runs:
            r.validate()
        flat = self.flatten()
        if count_runs(flat) > len(self.runs):
            raise InvalidState("declared run count is below R(S)")
        if consumed is not None and Counter(flat) != Counter(consumed):
            raise InvalidState("output is not a permutation of the input")


class UnwrittenView(NamedTuple):
    buffer: list[int]
    remaining: list[int]

    def flat(self) -> list[int]:
        return list(self.buffer) + list(self.remaining)


class WriteEvent(NamedTuple):
    key: int
    run_index: int
    direction: Direction
    position: int  # index of this element inside its run
    buffer_min: int  # buffer extremes just before the write
    buffer_max: int


# ---------------------------------------------------------------- input sources


class StaticSource:
    """An in-memory input stream with a read cursor."""

    def __init__(self, data: Iterable[int], pos: int = 0):
        self.data = data if isinstance(data, list) else list(data)
        self.pos = pos

    def read(self) -> int:
        x = self.data[self.pos]
        self.pos += 1
        return x

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.data)

    def peek(self, k: int) -> list[int]:
        return self.data[self.pos:self.pos + k]

    def remaining(self) -> list[int]:
        return self.data[self.pos:]

    def clone(self) -> "StaticSource":
        return StaticSource(self.data, self.pos)


class DistinctSource:
    """Wraps a source and raises DuplicateKey on the first repeated key."""

    def __init__(self, inner):
        self.inner = inner
        self.seen: set[int] = set()
        watcher = getattr(inner, "observe_write", None)
        if watcher is not None:
            self.observe_write = watcher

    def read(self) -> int:
        x = self.inner.read()
        if x in self.seen:
            raise DuplicateKey(x)
        self.seen.add(x)
        return x

    @property
    def exhausted(self) -> bool:
        return self.inner.exhausted

    def peek(self, k):
        return self.inner.peek(k)

    def remaining(self):
        return self.inner.remaining()


def as_source(source):
    if isinstance(source, (list, tuple, range)):
        return StaticSource(list(source))
    return source


def require_distinct(source):
    """Return a source that fails loudly on duplicate keys.

    Static inputs are checked up front in stream order, so the error names the
    same key a streaming check would have hit first.
    """
    source = as_source(source)
    if isinstance(source, StaticSource):
        seen = set()
        for x in source.data[source.pos:]:
            if x in seen:
                raise DuplicateKey(x)
            seen.add(x)
        return source
    return DistinctSource(source)


# ---------------------------------------------------------------- run counting


def count_runs(seq: Sequence[int]) -> int:
    """R(S): fewest contiguous monotone (non-strict) segments covering ``seq``."""
    it = iter(seq)
    try:
        prev = next(it)
    except StopIteration:
        return 0
    runs = 1
    trend = 0  # 0 while the current segment is still a plateau
    for x in it:
        if trend == 0:
            if x > prev:
                trend = 1
            elif x < prev:
                trend = -1
        elif (trend == 1 and x < prev) or (trend == -1 and x > prev):
            runs += 1
            trend = 0
        prev = x
    return runs


# ---------------------------------------------------------------- the machine


class BufferMachine:
    """A size-``capacity`` buffer reading one element per element written.

    ``buffer`` holds ``(arrival_index, key)`` pairs in arrival order whenever the
    machine sits at a decision point.  ``observer`` (if set) is called with a
    :class:`WriteEvent` after each write and before the refill read, which is
    what lets an adaptive adversary react to the writes.
    """

    def __init__(self, capacity: int, source, observer: Callable[[WriteEvent], None] | None = None,
                 track_reads: bool = False):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.source = as_source(source)
        if observer is None:
            # adaptive sources watch the writes they react to
            observer = getattr(self.source, "observe_write", None)
        self.observer = observer
        self.track_reads = track_reads
        self.buffer: list[tuple[int, int]] = []
        self.consumed = 0
        self.written = 0
        self.runs: list[Run] = []
        self.last_reads: list[int] = []
        self.fill()

    def fill(self):
        src = self.source
        while len(self.buffer) < self.capacity and not src.exhausted:
            self.buffer.append((self.consumed, src.read()))
            self.consumed += 1

    @property
    def done(self) -> bool:
        return not self.buffer and self.source.exhausted

    def buffer_keys(self) -> list[int]:
        return [k for _, k in self.buffer]

    def unwritten_view(self) -> UnwrittenView:
        return UnwrittenView(self.buffer_keys(), self.source.remaining())

    def clone(self) -> "BufferMachine":
        if not isinstance(self.source, StaticSource):
            raise InvalidState("only machines over static input can be cloned")
        twin = BufferMachine.__new__(BufferMachine)
        twin.capacity = self.capacity
        twin.source = self.source.clone()
        twin.observer = None
        twin.track_reads = self.track_reads
        twin.buffer = list(self.buffer)
        twin.consumed = self.consumed
        twin.written = self.written
        twin.runs = list(self.runs)
        twin.last_reads = []
        return twin

    def write_maximal_run(self, direction: Direction) -> Run:
        if not self.buffer:
            raise InvalidState("cannot start a run with an empty buffer")
        s = direction.sign
        pending: list[tuple[int, int]] = []
        out: list[int] = []
        reads: list[int] | None = [] if self.track_reads else None
        src = self.source
        consumed = self.consumed
        observer = self.observer

        if isinstance(src, StaticSource) and observer is None:
            # every heap entry is written before the run ends, so only the
            # leftover keys need their arrival order
            heap = [s * k for _, k in self.buffer]
            heapify(heap)
            data, pos, n = src.data, src.pos, len(src.data)
            start = pos
            offset = consumed - pos
            while heap:
                top = heap[0]
                out.append(top)
                if pos < n:
                    x = data[pos]
                    sx = s * x
                    if sx >= top:
                        heapreplace(heap, sx)
                    else:
                        heappop(heap)
                        pending.append((pos + offset, x))
                    pos += 1
                else:
                    heappop(heap)
            if reads is not None:
                reads.extend(data[start:pos])
            consumed += pos - start
            src.pos = pos
        else:
            # equal keys leave the heap in arrival order
            heap = [(s * k, a) for a, k in self.buffer]
            heapify(heap)
            run_index = len(self.runs)
            while heap:
                top = heap[0][0]
                if observer is not None:
                    keys = [s * v for v, _ in heap] + [k for _, k in pending]
                    event = WriteEvent(s * top, run_index, direction, len(out), min(keys), max(keys))
                out.append(top)
                if observer is not None:
                    observer(event)
                if not src.exhausted:
                    x = src.read()
                    if reads is not None:
                        reads.append(x)
                    if s * x >= top:
                        heapreplace(heap, (s * x, consumed))
                    else:
                        heappop(heap)
                        pending.append((consumed, x))
                    consumed += 1
                else:
                    heappop(heap)

        if len(pending) > self.capacity:
            raise InvalidState("buffer overflow")
        self.buffer = pending
        self.consumed = consumed
        self.written += len(out)
        if reads is not None:
            self.last_reads = reads
        run = Run(direction, out if s == 1 else [-v for v in out])
        self.runs.append(run)
        return run

    def run_sequence(self, m: int | None = None) -> RunSequence:
        return RunSequence(list(self.runs), self.capacity if m is None else m)


def write_maximal_run(machine: BufferMachine, direction: Direction) -> Run:
    return machine.write_maximal_run(direction)


def unwritten_view(machine: BufferMachine) -> UnwrittenView:
    return machine.unwritten_view()


def simulate_maximal_run_length(view: UnwrittenView | Sequence[int], m: int, direction: Direction,
                                cap: int | None = None, complete: bool = True) -> tuple[int, bool]:
    """Length of the maximal run an ``m``-buffer machine would write from ``view``.

    Nothing is mutated.  At simulated time t only the first m + t elements of the
    unwritten sequence are touched.  Returns ``(cap, False)`` as soon as the run
    reaches ``cap`` elements, meaning "at least cap".  With ``complete=False`` the
    view is only a visible prefix; running past it yields a lower bound flagged
    uncertain.
    """
    seq = view.flat() if isinstance(view, UnwrittenView) else list(view)
    if cap is None:
        cap = len(seq) + 1
    s = direction.sign
    heap = [s * x for x in seq[:m]]
    heapify(heap)
    nxt = min(m, len(seq))
    n = len(seq)
    count = 0
    while True:
        if count >= cap:
            return cap, False
        if not heap:
            return count, True
        top = heap[0]
        count += 1
        if nxt < n:
            x = s * seq[nxt]
            nxt += 1
            if x >= top:
                heapreplace(heap, x)
            else:
                heappop(heap)
        elif complete:
            heappop(heap)
        else:
            # every key still in the heap will be written; unseen input may add more
            heappop(heap)
            return min(cap, count + len(heap)), False


def greedy_direction(up: tuple[int, bool], down: tuple[int, bool]) -> Direction:
    """Direction of the longer run; ties (including two capped results) go up."""
    return UP if up[0] >= down[0] else DOWN


def check_feasible(data: Sequence[int], m: int, output: Sequence[int]) -> bool:
    """True iff an ``m``-buffer machine that refills after every write can emit ``output``."""
    if Counter(data) != Counter(output):
        return False
    buf = Counter(data[:m])
    nxt = min(m, len(data))
    for x in output:
        if buf[x] <= 0:
            return False
        buf[x] -= 1
        if nxt < len(data):
            buf[data[nxt]] += 1
            nxt += 1
    return True


def replay_directions(data: Sequence[int], m: int, directions: Iterable[Direction]) -> RunSequence:
    """Write maximal runs in the given directions until the input is used up."""
    machine = BufferMachine(m, StaticSource(list(data)))
    for d in directions:
        if machine.done:
            break
        machine.write_maximal_run(d)
    if not machine.done:
        raise InvalidState("direction list ran out before the input did")
    return machine.run_sequence()
