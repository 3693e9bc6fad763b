"""Offline algorithms: exact oracle, greedy, and the block-search approximation scheme."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from heapq import heapify, heappop, heapreplace
from typing import NamedTuple, Sequence

from .core import (DOWN, UP, BufferMachine, Direction, RunSequence, StaticSource, replay_directions,
                   require_distinct)
from .errors import BudgetExceeded

DEFAULT_NODE_BUDGET = 10**7


# ---------------------------------------------------------------- exact oracle


class OracleResult(NamedTuple):
    opt_runs: int
    witness_directions: list[Direction]
    nodes: int = 0


def _advance(data: Sequence[int], pos: int, buf: tuple[int, ...], sign: int):
    """Write one maximal run from (pos, buffer); return the new state."""
    heap = [sign * x for x in buf]
    heapify(heap)
    pending = []
    n = len(data)
    while heap:
        top = heap[0]
        if pos < n:
            x = sign * data[pos]
            pos += 1
            if x >= top:
                heapreplace(heap, x)
            else:
                heappop(heap)
                pending.append(sign * x)
        else:
            heappop(heap)
    pending.sort()
    return pos, tuple(pending)


def brute_force_opt(data: Sequence[int], m: int, node_budget: int = DEFAULT_NODE_BUDGET) -> OracleResult:
    """Fewest runs any proper m-buffer algorithm can write on ``data``.

    Breadth-first over direction choices, one maximal run per edge.  States are
    (input cursor, sorted buffer contents), so each distinct state is expanded
    once; the first level containing a finished state gives the optimum.
    """
    data = list(data)
    if not data:
        return OracleResult(0, [], 0)
    start = (min(m, len(data)), tuple(sorted(data[:m])))
    parent: dict = {start: None}
    frontier = [start]
    nodes = 0
    level = 0
    n = len(data)
    while True:
        level += 1
        nxt = []
        for state in frontier:
            for d in (UP, DOWN):
                nodes += 1
                if nodes > node_budget:
                    best = len(greedy_offline(data, m))
                    raise BudgetExceeded(best, nodes)
                child = _advance(data, state[0], state[1], d.sign)
                if child in parent:
                    continue
                parent[child] = (state, d)
                if child[0] >= n and not child[1]:
                    dirs = []
                    s = child
                    while parent[s] is not None:
                        s, dd = parent[s]
                        dirs.append(dd)
                    dirs.reverse()
                    return OracleResult(level, dirs, nodes)
                nxt.append(child)
        frontier = nxt


def witness_runs(data: Sequence[int], m: int, result: OracleResult) -> RunSequence:
    return replay_directions(data, m, result.witness_directions)


# ---------------------------------------------------------------- greedy


def _write_greedy(machine: BufferMachine) -> tuple[BufferMachine, Direction, int, int]:
    """Try both maximal runs on clones and keep the longer (ties go up)."""
    up = machine.clone()
    lu = len(up.write_maximal_run(UP))
    down = machine.clone()
    ld = len(down.write_maximal_run(DOWN))
    if lu >= ld:
        return up, UP, lu, ld
    return down, DOWN, lu, ld


def greedy_offline(data: Sequence[int], m: int) -> RunSequence:
    """Always write the longer of the two maximal runs, knowing the whole input."""
    machine = BufferMachine(m, StaticSource(list(data)))
    decisions = []
    while not machine.done:
        machine, d, lu, ld = _write_greedy(machine)
        decisions.append((d, lu, ld))
    out = machine.run_sequence(m)
    out.meta["decisions"] = decisions
    return out


# ---------------------------------------------------------------- approximation scheme


SIMPLE = "simple"
FIBONACCI = "fibonacci"


@dataclass
class PtasConfig:
    epsilon: Fraction | float
    variant: str = SIMPLE

    def __post_init__(self):
        self.epsilon = Fraction(self.epsilon).limit_denominator(10**6)
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.variant not in (SIMPLE, FIBONACCI):
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def block_runs(self) -> int:
        return math.ceil(1 / self.epsilon)


@dataclass
class SearchStats:
    combinations: list[int] = field(default_factory=list)  # leaf sequences per partition
    nodes_visited: int = 0

    @property
    def combinations_explored(self) -> int:
        return sum(self.combinations)


class Leaf(NamedTuple):
    directions: tuple[Direction, ...]
    written: int
    machine: BufferMachine


def fibonacci_bound(d: int) -> int:
    """Leaves of the pruned search with d runs left: 1, 1, 2, 3, 5, ..."""
    a, b = 1, 1
    for _ in range(d - 1):
        a, b = b, a + b
    return b if d >= 1 else 1


def enumerate_block(machine: BufferMachine, k: int, variant: str = SIMPLE) -> tuple[list[Leaf], int]:
    """All direction sequences of up to ``k`` maximal runs from ``machine``'s state.

    A branch stops early when it uses up the input.  The Fibonacci variant tries
    the longer run freely but follows the shorter one with a run in the same
    direction; with one run left only the longer run is tried.  Leaves come out
    in lexicographic order with up before down.
    """
    leaves: list[Leaf] = []
    nodes = 0

    def grow(mach: BufferMachine, dirs: tuple, written: int, left: int, forced: Direction | None):
        nonlocal nodes
        if left == 0 or mach.done:
            leaves.append(Leaf(dirs, written, mach))
            return
        children = []
        for d in ((forced,) if forced is not None else (UP, DOWN)):
            child = mach.clone()
            n = len(child.write_maximal_run(d))
            nodes += 1
            children.append((d, child, n))
        if forced is not None:
            d, child, n = children[0]
            grow(child, dirs + (d,), written + n, left - 1, None)
            return
        if variant == SIMPLE:
            for d, child, n in children:
                grow(child, dirs + (d,), written + n, left - 1, None)
            return
        (du, cu, nu), (dd, cd, nd) = children
        longer, shorter = ((du, cu, nu), (dd, cd, nd)) if nu >= nd else ((dd, cd, nd), (du, cu, nu))
        options = [(longer, None)]
        if left >= 2:
            options.append((shorter, shorter[0]))
        options.sort(key=lambda o: o[0][0] is DOWN)
        for (d, child, n), follow in options:
            grow(child, dirs + (d,), written + n, left - 1, follow)

    grow(machine, (), 0, k, None)
    return leaves, nodes


def ptas(data: Sequence[int], m: int, cfg: PtasConfig) -> tuple[RunSequence, SearchStats]:
    """(1 + epsilon)-approximate run generation by exhaustive block search.

    Each partition picks the block of ceil(1/epsilon) maximal runs that writes
    the most keys (first in up-before-down order on ties), then writes one extra
    run in the greedy direction.  If some block finishes the input, the finishing
    block with the fewest runs is written instead and the search ends.
    """
    data = list(data)
    if cfg.variant == FIBONACCI:
        require_distinct(data)
    machine = BufferMachine(m, StaticSource(data))
    stats = SearchStats()
    k = cfg.block_runs
    while not machine.done:
        leaves, nodes = enumerate_block(machine, k, cfg.variant)
        stats.combinations.append(len(leaves))
        stats.nodes_visited += nodes
        finished = [leaf for leaf in leaves if leaf.machine.done]
        if finished:
            machine = min(finished, key=lambda leaf: len(leaf.directions)).machine
            break
        best = leaves[0]
        for leaf in leaves[1:]:
            if leaf.written > best.written:
                best = leaf
        machine = best.machine
        machine, _, _, _ = _write_greedy(machine)
    out = machine.run_sequence(m)
    out.meta["stats"] = stats
    return out, stats
