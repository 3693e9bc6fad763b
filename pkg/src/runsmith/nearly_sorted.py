"""Algorithms for inputs whose optimal runs are all long.

An input is c-nearly-sorted when some proper optimal output has every run of
length at least c*m.  On such inputs the wrong direction always dies before 3m
while the right one survives past it, so a coin flip plus a shadow run is
enough to find the greedy direction after the fact.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .core import DOWN, UP, Direction, Run, RunSequence, as_source, require_distinct
from .errors import InvalidState
from .rng import CoinFlipper


@dataclass
class SortednessCertificate:
    c: float
    witnessed: bool
    witness_run_lengths: list[int]
    witness_directions: list[Direction]
    provenance: str  # "construction" or "oracle"
    opt: int | None = None


def _pick(buf: list[int], last: int | None, sign: int) -> int | None:
    """Index of the next key a run in direction ``sign`` writes from sorted ``buf``."""
    if not buf:
        return None
    if sign == 1:
        i = 0 if last is None else bisect_left(buf, last)
        return i if i < len(buf) else None
    i = len(buf) - 1 if last is None else bisect_right(buf, last) - 1
    return i if i >= 0 else None


@dataclass
class GhostBuffer:
    """Buffer whose slots hold live keys and ghosts.

    ``keys`` is the sorted logical contents (live keys plus ghosts); ``ghosts``
    counts keys already written to the output that the logical run has not
    consumed yet.  Consuming a ghost deletes it without output.  ``shadow`` is the
    opposite run's buffer while a partition is in progress.
    """
    m: int
    keys: list[int] = field(default_factory=list)
    ghosts: Counter = field(default_factory=Counter)
    shadow: list[int] | None = None
    last_written_sim: int | None = None

    @property
    def live(self) -> list[int]:
        left = Counter(self.ghosts)
        out = []
        for k in self.keys:
            if left[k] > 0:
                left[k] -= 1
            else:
                out.append(k)
        return out

    @property
    def ghost_count(self) -> int:
        return sum(self.ghosts.values())

    def take(self, i: int) -> tuple[int, bool]:
        """Remove keys[i]; report whether it has to be written (False for a ghost)."""
        x = self.keys.pop(i)
        if self.ghosts[x] > 0:
            self.ghosts[x] -= 1
            if not self.ghosts[x]:
                del self.ghosts[x]
            return x, False
        return x, True

    def add(self, x: int, ghost: bool = False):
        insort(self.keys, x)
        if ghost:
            self.ghosts[x] += 1

    def check(self):
        if len(self.keys) > self.m:
            raise InvalidState("ghost buffer overflow")
        if self.shadow is not None and len(self.shadow) > self.m:
            raise InvalidState("shadow buffer overflow")


class Partition(NamedTuple):
    coin: Direction
    lucky: bool
    correct: Direction
    real_length: int  # logical length of the coin's run
    correct_length: int  # logical length of the run kept
    ambiguous: bool


def ghost_randomized(source, m: int, seed: int = 0, coins=None,
                     trace: Callable[[int, GhostBuffer, int, Partition], None] | None = None
                     ) -> RunSequence:
    """Randomized run generation with 2m space for nearly-sorted inputs.

    Each partition flips a coin, writes that maximal run and advances a shadow of
    the opposite run on the same reads.  If the shadow outlives the real run the
    coin was wrong: the keys the shadow wrote but the real run did not are
    written first, keys the real run wrote but the shadow did not become ghosts,
    and the shadow's run carries on, deleting ghosts instead of writing them.
    The logical state afterwards is exactly that of a machine that wrote the
    shadow's run.  The kept direction should pass 3m; if neither does, the
    longer one is kept and ``meta["ambiguous"]`` is set.

    ``trace(index, buffer, cursor, partition)`` is called after every partition.
    """
    source = require_distinct(as_source(source))
    coins = CoinFlipper(seed) if coins is None else coins
    gb = GhostBuffer(m)

    def read():
        if source.exhausted:
            return None
        return source.read()

    cursor = 0
    while len(gb.keys) < m and not source.exhausted:
        gb.add(read())
        cursor += 1

    runs: list[Run] = []
    parts: list[Partition] = []
    while gb.keys:
        d = UP if coins.flip() == 0 else DOWN
        s, t = d.sign, -d.sign
        gb.shadow = list(gb.keys)
        gb.last_written_sim = None
        shadow_alive = True
        real_last = None
        phys: list[int] = []
        real_written: list[int] = []
        shadow_written: list[int] = []
        while True:
            i = _pick(gb.keys, real_last, s)
            if i is None:
                break
            x, emit = gb.take(i)
            real_last = x
            real_written.append(x)
            if emit:
                phys.append(x)
            y = read()
            if y is not None:
                cursor += 1
                gb.add(y)
            if shadow_alive:
                j = _pick(gb.shadow, gb.last_written_sim, t)
                if j is None:
                    shadow_alive = False
                else:
                    z = gb.shadow.pop(j)
                    gb.last_written_sim = z
                    shadow_written.append(z)
                    if y is not None:
                        insort(gb.shadow, y)
            gb.check()
        if phys:
            runs.append(Run(d, phys))
        real_len = len(real_written)
        lucky = not (shadow_alive and _pick(gb.shadow, gb.last_written_sim, t) is not None)
        if lucky:
            correct, kept_len = d, real_len
        else:
            correct = d.opposite
            phys2: list[int] = []
            common = Counter(real_written) & Counter(shadow_written)
            # catch up on what only the shadow wrote; no reads happen here
            pending = Counter(common)
            for z in shadow_written:
                if pending[z] > 0:
                    pending[z] -= 1
                    continue
                x, emit = gb.take(bisect_left(gb.keys, z))
                if emit:
                    phys2.append(x)
            for z in (Counter(real_written) - common).elements():
                gb.add(z, ghost=True)
            if sorted(gb.keys) != sorted(gb.shadow):
                raise InvalidState("ghost recovery diverged from the shadow run")
            last = gb.last_written_sim
            kept_len = len(shadow_written)
            while True:
                i = _pick(gb.keys, last, t)
                if i is None:
                    break
                x, emit = gb.take(i)
                last = x
                kept_len += 1
                if emit:
                    phys2.append(x)
                y = read()
                if y is not None:
                    cursor += 1
                    gb.add(y)
                gb.check()
            if phys2:
                runs.append(Run(correct, phys2))
        gb.shadow = None
        part = Partition(d, lucky, correct, real_len, kept_len, kept_len < 3 * m)
        parts.append(part)
        if trace is not None:
            trace(len(parts) - 1, gb, cursor, part)
    out = RunSequence(runs, m)
    out.meta["partitions"] = parts
    out.meta["ambiguous"] = any(p.ambiguous for p in parts[:-1])
    return out


def check_5m_optimality(output: RunSequence, m: int) -> bool:
    """True iff every run has at least 5m keys, which certifies the output optimal."""
    return all(len(r) >= 5 * m for r in output.runs)
