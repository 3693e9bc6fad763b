"""Online run-generation algorithms.

All of them are proper: every run they write is maximal.  The augmented ones
(``greedy_4m_buffer``, ``lookahead_3m``, ``randomized_2m``) need distinct keys
and raise DuplicateKey on the first repeat.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

from .core import (DOWN, UP, BufferMachine, Direction, RunSequence, greedy_direction,
                   require_distinct, simulate_maximal_run_length)
from .rng import CoinFlipper


@dataclass
class OnlineConfig:
    m: int
    buffer_factor: int = 1
    lookahead: int = 0
    seed: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be positive")
        if self.buffer_factor not in (1, 2, 4):
            raise ValueError("buffer factor must be 1, 2 or 4")
        if self.lookahead < 0:
            raise ValueError("lookahead must be nonnegative")


class Coin(NamedTuple):
    direction: Direction
    lucky: bool


@dataclass
class CoinRecord:
    coins: list[Coin] = field(default_factory=list)

    def __len__(self):
        return len(self.coins)

    @property
    def all_lucky(self) -> bool:
        return all(c.lucky for c in self.coins)


def _finish(machine: BufferMachine, m: int, **meta) -> RunSequence:
    out = machine.run_sequence(m)
    out.meta.update(meta)
    return out


def replacement_selection_up(source, m: int) -> RunSequence:
    """Classic replacement selection: every run goes up."""
    machine = BufferMachine(m, source)
    while not machine.done:
        machine.write_maximal_run(UP)
    return _finish(machine, m)


def alternating_updown(source, m: int, first_dir: Direction = UP, buffer_factor: int = 1) -> RunSequence:
    """Maximal runs in strictly alternating directions, optionally with a larger buffer."""
    machine = BufferMachine(buffer_factor * m, source)
    d = first_dir
    while not machine.done:
        machine.write_maximal_run(d)
        d = d.opposite
    return _finish(machine, m)


def _visible_greedy(visible: list[int], m: int, complete: bool) -> tuple[Direction, tuple, tuple]:
    cap = 3 * m
    up = simulate_maximal_run_length(visible, m, UP, cap, complete)
    down = simulate_maximal_run_length(visible, m, DOWN, cap, complete)
    return greedy_direction(up, down), up, down


def greedy_4m_buffer(source, m: int, capacity: int | None = None) -> RunSequence:
    """Matches the m-buffer optimum using a 4m buffer.

    At each decision point the buffer contents (in arrival order) stand in for
    the m-buffer greedy's unwritten sequence.  Any run shorter than 3m touches
    fewer than 4m of those keys, so the capped simulation decides the greedy
    direction exactly.  The run itself is written with the whole buffer.
    ``capacity`` overrides the 4m buffer size (used by the lower-bound adversary).
    """
    source = require_distinct(source)
    machine = BufferMachine(4 * m if capacity is None else capacity, source)
    decisions = []
    while not machine.done:
        d, up, down = _visible_greedy(machine.buffer_keys(), m, machine.source.exhausted)
        decisions.append((d, up, down))
        machine.write_maximal_run(d)
    return _finish(machine, m, decisions=decisions)


def _peek(source, k: int) -> tuple[list[int], bool]:
    """Up to k unread keys, and whether they are all that is left."""
    peek = getattr(source, "peek", None)
    if peek is None:
        return [], source.exhausted
    ahead = peek(k)
    return ahead, len(ahead) < k or source.exhausted


def lookahead_3m(source, m: int) -> RunSequence:
    """m buffer plus 3m lookahead: greedy run, then same direction, then opposite."""
    source = require_distinct(source)
    machine = BufferMachine(m, source)
    decisions = []
    while not machine.done:
        ahead, complete = _peek(machine.source, 3 * m)
        d, up, down = _visible_greedy(machine.buffer_keys() + ahead, m, complete)
        decisions.append((d, up, down))
        for step in (d, d, d.opposite):
            if machine.done:
                break
            machine.write_maximal_run(step)
    return _finish(machine, m, decisions=decisions)


def _exact_greedy(machine: BufferMachine, m: int) -> Direction:
    view = machine.unwritten_view()
    return greedy_direction(simulate_maximal_run_length(view, m, UP),
                            simulate_maximal_run_length(view, m, DOWN))


def randomized_2m(source, m: int, seed: int = 0, coins=None, force_lucky: bool = False
                  ) -> tuple[RunSequence, CoinRecord]:
    """Fair coin per partition; a second m slots shadow the opposite run.

    The chosen run is lucky when it is at least as long as the opposite one.
    Lucky partitions add a same-direction run and an opposite run; unlucky ones
    add three more runs alternating from the opposite direction.  ``coins`` may
    supply any object with ``flip()``; ``force_lucky`` always picks the greedy
    direction (needs static input, for testing).
    """
    source = require_distinct(source)
    coins = CoinFlipper(seed) if coins is None else coins
    machine = BufferMachine(m, source, track_reads=True)
    record = CoinRecord()
    while not machine.done:
        if force_lucky:
            d = _exact_greedy(machine, m)
        else:
            d = UP if coins.flip() == 0 else DOWN
        before = machine.buffer_keys()
        run = machine.write_maximal_run(d)
        # the shadow only ever sees keys the real run has already read
        shadow_view = before + machine.last_reads
        other, _ = simulate_maximal_run_length(shadow_view, m, d.opposite, len(run) + 1,
                                               complete=machine.source.exhausted)
        lucky = len(run) >= other
        record.coins.append(Coin(d, lucky))
        tail = (d, d.opposite) if lucky else (d.opposite, d, d.opposite)
        for step in tail:
            if machine.done:
                break
            machine.write_maximal_run(step)
    return _finish(machine, m, coins=record), record
