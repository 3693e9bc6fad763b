"""Input constructions: fixtures, adversaries, permutations and nearly-sorted inputs.

Sequence notation helpers mirror the usual run-generation shorthand:
``up_range(x, y)`` is x, x+1, ..., y; ``shift`` adds a constant to every key and
``scale`` multiplies every key.  All arithmetic is checked against the signed
64-bit key range.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core import (DOWN, UP, Direction, RunSequence, WriteEvent, check_feasible, check_key,
                   count_runs, replay_directions)
from .errors import InvalidState, ProtocolError
from .nearly_sorted import SortednessCertificate
from .rng import CoinFlipper

# ---------------------------------------------------------------- notation


def up_range(lo: int, hi: int) -> list[int]:
    if lo > hi:
        raise ValueError(f"up range needs lo <= hi, got {lo} > {hi}")
    check_key(lo), check_key(hi)
    return list(range(lo, hi + 1))


def down_range(hi: int, lo: int) -> list[int]:
    if hi < lo:
        raise ValueError(f"down range needs hi >= lo, got {hi} < {lo}")
    check_key(lo), check_key(hi)
    return list(range(hi, lo - 1, -1))


def seq(kind, start: int, stop: int) -> list[int]:
    """Step-1 arithmetic sequence; ``kind`` is ``"up"``/``"down"`` or a Direction."""
    kind = Direction(kind) if not isinstance(kind, Direction) else kind
    return up_range(start, stop) if kind is UP else down_range(start, stop)


def concat(*parts: Sequence[int]) -> list[int]:
    out: list[int] = []
    for p in parts:
        out.extend(p)
    return out


def shift(a: Sequence[int], x: int) -> list[int]:
    return [check_key(v + x) for v in a]


def scale(a: Sequence[int], x: int) -> list[int]:
    return [check_key(v * x) for v in a]


# ---------------------------------------------------------------- fixtures


def greedy_gap_block(m: int) -> list[int]:
    return concat(up_range(4 * m + 4, 5 * m + 3), [m + 2], up_range(5 * m + 4, 6 * m + 3),
                  up_range(2 * m + 1, 3 * m - 1), down_range(4 * m + 3, 3 * m + 4),
                  down_range(2 * m, m + 3), down_range(m + 1, 1))


def fixture_greedy_gap(m: int, c: int) -> list[int]:
    """``c`` copies of the greedy-versus-optimal block, each lifted by another 10m.

    Greedy writes three runs per block while all-down writes two.
    """
    if m < 4:
        raise ValueError("greedy gap fixture needs m >= 4")
    if c < 1:
        raise ValueError("need at least one block")
    block = greedy_gap_block(m)
    return concat(*(shift(block, 10 * m * i) for i in range(c)))


def fixture_3m_tight(m: int, printed: bool = False) -> list[int]:
    """Input whose maximal up run is exactly 3m long while the down run stays below 3m.

    The final ascending block starts at m*m+1, the smallest start for which the
    up run reaches 3m.  ``printed=True`` starts it at m*m+2 instead, which
    gives an up run of 3m-1.
    """
    if m < 2:
        raise ValueError("tight fixture needs m >= 2")
    start = m * m + (2 if printed else 1)
    return concat(scale(up_range(1, m - 1), m), down_range(m * m, m * m - m + 1),
                  down_range(m - 1, 1), up_range(start, m * m + m + 1))


def fixture_chunked(m: int, c: int) -> list[int]:
    """(8m..1) then (16m..8m+1) and so on: c descending chunks of 8m keys."""
    return concat(*(down_range(8 * m * (i + 1), 8 * m * i + 1) for i in range(c)))


def gen_sorted(n: int) -> list[int]:
    return list(range(1, n + 1))


def gen_reverse(n: int) -> list[int]:
    return list(range(n, 0, -1))


def gen_random_permutation(n: int, seed: int) -> list[int]:
    if n == 0:
        return []
    rng = np.random.Generator(np.random.PCG64(seed))
    return (rng.permutation(n) + 1).tolist()


# ---------------------------------------------------------------- deterministic adversary


class SegmentChoice(NamedTuple):
    sign: str  # "+" or "-"
    index: int  # 1-based segment number


class DeterministicAdversary:
    """Pull-based adaptive input against a deterministic M-buffer algorithm.

    Segment 1 is (1..m).  Segment k+1 is decided when the algorithm asks for its
    first key, which under the read-after-write discipline happens right after
    write number m(k-1)+1.  A machine reading this source registers
    :meth:`observe_write` as its observer automatically.
    """

    def __init__(self, m: int, t: int):
        if m < 2 or t < 1:
            raise ValueError("need m >= 2 and t >= 1")
        self.m, self.t = m, t
        self.emitted: list[int] = []
        self.writes: list[WriteEvent] = []
        self.transcript: list[SegmentChoice] = [SegmentChoice("+", 1)]
        self._queue = deque(up_range(1, m))
        self.segments_emitted = 1

    def observe_write(self, event: WriteEvent):
        self.writes.append(event)

    @property
    def exhausted(self) -> bool:
        return not self._queue and self.segments_emitted >= self.t

    def _decide(self, event: WriteEvent) -> str:
        if event.position == 0:
            # a lone first element could still go either way
            return "-" if event.key == event.buffer_min else "+"
        return "+" if event.direction is DOWN else "-"

    def read(self) -> int:
        if not self._queue:
            if self.segments_emitted >= self.t:
                raise ProtocolError("read past the end of the adversarial input")
            k = self.segments_emitted
            required = self.m * (k - 1) + 1
            if len(self.writes) < required:
                raise ProtocolError(
                    f"segment {k + 1} requested after {len(self.writes)} writes; {required} needed")
            sign = self._decide(self.writes[required - 1])
            lo, hi = 1 + k * self.m, self.m + k * self.m
            self._queue.extend(up_range(lo, hi) if sign == "+" else down_range(-lo, -hi))
            self.segments_emitted += 1
            self.transcript.append(SegmentChoice(sign, k + 1))
        x = self._queue.popleft()
        self.emitted.append(x)
        return x

    def peek(self, k):
        raise ProtocolError("adaptive adversary does not allow lookahead")

    def remaining(self):
        raise ProtocolError("adaptive adversary has no fixed future")


@dataclass
class AdversaryOutcome:
    realized: list[int]
    transcript: list
    output: RunSequence
    expected_opt: int | None = None
    case: str = ""
    extra: dict = field(default_factory=dict)


def adversary_deterministic(algorithm: Callable, m: int, t: int) -> AdversaryOutcome:
    """Run ``algorithm(source, m)`` against the segment adversary for ``t`` segments."""
    adv = DeterministicAdversary(m, t)
    output = algorithm(adv, m)
    if isinstance(output, tuple):
        output = output[0]
    sched = pairing_schedule(adv.emitted, m, adv.transcript)
    return AdversaryOutcome(adv.emitted, adv.transcript, output, expected_opt=sched.declared_runs)


class Schedule(NamedTuple):
    output: list[int]
    declared_runs: int


def pairing_schedule(realized: Sequence[int], m: int, transcript: Sequence[SegmentChoice]) -> Schedule:
    """Offline player writing segments 2i-1 and 2i in one run.

    The run goes up when the second segment of the pair is positive and down
    otherwise; an odd trailing segment gets a run of its own.  The schedule is
    checked against the buffer discipline before it is returned.
    """
    segs = [list(realized[i:i + m]) for i in range(0, len(realized), m)]
    out: list[int] = []
    runs = 0
    for i in range(0, len(segs), 2):
        pair = segs[i] + (segs[i + 1] if i + 1 < len(segs) else [])
        second = transcript[i + 1].sign if i + 1 < len(segs) else transcript[i].sign
        out.extend(sorted(pair, reverse=(second == "-")))
        runs += 1
    if not check_feasible(list(realized), m, out):
        raise InvalidState("pairing schedule violates the buffer discipline")
    if count_runs(out) > runs:
        raise InvalidState("pairing schedule is not one run per pair")
    return Schedule(out, runs)


# ---------------------------------------------------------------- randomized adversary


def randomized_adversary_signs(t: int, seed: int) -> list[str]:
    coins = CoinFlipper(seed)
    return ["+" if coins.flip() == 0 else "-" for _ in range(t)]


def randomized_segment(m: int, sign: str) -> list[int]:
    if sign == "+":
        return concat(up_range(1, m), down_range(2 * m, m + 1), down_range(3 * m, 2 * m + 1),
                      down_range(4 * m, 3 * m + 1))
    return concat(up_range(1, m), up_range(-2 * m, -m - 1), up_range(-3 * m, -2 * m - 1),
                  up_range(-4 * m, -3 * m - 1))


def adversary_randomized(m: int, t: int, seed: int) -> list[int]:
    """t fair-coin segments of 4m keys, made distinct by key*t + segment index."""
    if m < 2 or t < 1:
        raise ValueError("need m >= 2 and t >= 1")
    n = 4 * m * t
    factor = n // (4 * m)
    out: list[int] = []
    for idx, sign in enumerate(randomized_adversary_signs(t, seed), start=1):
        out.extend(shift(scale(randomized_segment(m, sign), factor), idx))
    return out


def segment_player(data: Sequence[int], m: int, signs: Sequence[str]) -> Schedule:
    """One run per segment: up for positive segments, down for negative ones."""
    seg = 4 * m
    out: list[int] = []
    for i, sign in enumerate(signs):
        out.extend(sorted(data[i * seg:(i + 1) * seg], reverse=(sign == "-")))
    if not check_feasible(list(data), m, out):
        raise InvalidState("segment player violates the buffer discipline")
    return Schedule(out, len(signs))


# ---------------------------------------------------------------- resource augmentation adversary


class ResAugAdversary:
    """Adaptive input against a deterministic algorithm holding 4m-3 keys.

    The first 4m-3 keys are fixed; the next key ``e`` depends on the first write
    and the tail depends on the second write.
    """

    def __init__(self, m: int):
        if m < 2:
            raise ValueError("need m >= 2")
        self.m = m
        self.prefix = concat(up_range(1, m - 1), down_range(2 * m - 1, m), up_range(3 * m, 4 * m - 2),
                             down_range(-m, -2 * m + 2))
        self._queue = deque(self.prefix)
        self.emitted: list[int] = []
        self.writes: list[WriteEvent] = []
        self.stage = 0
        self.branch = ""
        self.case = ""
        self.expected_opt: int | None = None

    def observe_write(self, event: WriteEvent):
        self.writes.append(event)

    @property
    def exhausted(self) -> bool:
        return not self._queue and self.stage >= 2

    def _need(self, k):
        if len(self.writes) < k:
            raise ProtocolError(f"adversary needs {k} writes before the next key, saw {len(self.writes)}")

    def read(self) -> int:
        m = self.m
        if not self._queue:
            if self.stage == 0:
                self._need(1)
                first = self.writes[0].key
                if first == -2 * m + 2:
                    self.branch, e = "low", -2 * m + 1
                elif first == 4 * m - 2:
                    self.branch, e = "high", 4 * m - 1
                else:
                    self.branch, e = "other", -2 * m + 1
                self._queue.append(e)
                self.e = e
                self.stage = 1
            elif self.stage == 1:
                self._need(2)
                first, second = self.writes[0].key, self.writes[1].key
                if self.branch == "other":
                    tail, self.case, self.expected_opt = down_range(0, -(m - 1)), "other", 1
                elif self.branch == "low":
                    if second == self.e or (second != -2 * m + 3 and second < first):
                        tail, self.case, self.expected_opt = down_range(0, -(m - 1)), "low-1", 1
                    else:
                        tail = concat(down_range(-2 * m, -10 * m), up_range(2 * m, 3 * m - 1))
                        self.case, self.expected_opt = "low-2", 2
                else:
                    if second == self.e or (second != 4 * m - 3 and second > first):
                        tail, self.case, self.expected_opt = up_range(2 * m, 3 * m - 1), "high-1", 1
                    else:
                        tail = concat(up_range(4 * m, 10 * m), down_range(0, -m + 1))
                        self.case, self.expected_opt = "high-2", 2
                self._queue.extend(tail)
                self.stage = 2
            else:
                raise ProtocolError("read past the end of the adversarial input")
        x = self._queue.popleft()
        self.emitted.append(x)
        return x

    def peek(self, k):
        raise ProtocolError("adaptive adversary does not allow lookahead")

    def remaining(self):
        raise ProtocolError("adaptive adversary has no fixed future")


def adversary_resaug(algorithm: Callable, m: int) -> AdversaryOutcome:
    """Run ``algorithm(source, m)`` (which must hold 4m-3 keys) against the adversary."""
    adv = ResAugAdversary(m)
    output = algorithm(adv, m)
    if isinstance(output, tuple):
        output = output[0]
    return AdversaryOutcome(adv.emitted, [adv.branch, adv.case], output, expected_opt=adv.expected_opt,
                            case=adv.case)


# ---------------------------------------------------------------- nearly sorted


def gen_nearly_sorted(m: int, c: float, run_count: int, seed: int, displace: bool = True,
                      certify: bool | None = None) -> tuple[list[int], SortednessCertificate]:
    """Input whose intended proper output is ``run_count`` alternating runs of ceil(c*m) keys.

    Each run is written into the input with every consecutive block of m keys
    shuffled, so no key strays m or more places from its slot and a maximal run
    in the intended direction reproduces the block exactly.  Up runs take fresh
    keys above everything so far and down runs fresh keys below, so adjacent runs
    cannot merge.  Small instances (m <= 5, run_count <= 6) are re-checked with
    the exact oracle unless ``certify`` says otherwise.
    """
    if c < 1 or run_count < 1 or m < 1:
        raise ValueError("need c >= 1, run_count >= 1, m >= 1")
    length = math.ceil(c * m)
    rng = np.random.Generator(np.random.PCG64(seed))
    lo, hi = 1, 0
    data: list[int] = []
    directions = []
    for i in range(run_count):
        d = UP if i % 2 == 0 else DOWN
        if d is UP:
            block = list(range(hi + 1, hi + length + 1))
            hi += length
        else:
            block = list(range(lo - 1, lo - length - 1, -1))
            lo -= length
        if i == 0:
            lo = 1
        if displace:
            for j in range(0, len(block), m):
                chunk = block[j:j + m]
                block[j:j + m] = [chunk[k] for k in rng.permutation(len(chunk))]
        data.extend(block)
        directions.append(d)

    replay = replay_directions(data, m, directions)
    lengths = replay.lengths
    reproduced = len(replay) == run_count and min(lengths) >= c * m
    # with runs shorter than 2m a run can absorb the neighbouring block, so only
    # the oracle can vouch for those
    cert = SortednessCertificate(c, reproduced and (length >= 2 * m or run_count == 1), lengths,
                                 directions, "construction", run_count if reproduced else None)
    if certify is None:
        certify = m <= 5 and run_count <= 6
    if certify:
        from .offline import brute_force_opt
        res = brute_force_opt(data, m)
        cert.opt = res.opt_runs
        cert.provenance = "oracle"
        cert.witnessed = reproduced and res.opt_runs == len(replay)
    return data, cert
