import math
import random
from collections import Counter
from statistics import mean, pstdev

import pytest

from runsmith.core import DOWN, UP, BufferMachine, Run, RunSequence, StaticSource
from runsmith.errors import DuplicateKey, InvalidState
from runsmith.generators import gen_nearly_sorted, gen_random_permutation
from runsmith.nearly_sorted import GhostBuffer, check_5m_optimality, ghost_randomized
from runsmith.offline import brute_force_opt, greedy_offline
from runsmith.rng import ForcedCoins

from _support import assert_writable


class Recorder:
    """Collects (index, logical keys, ghosts, cursor, partition) after each partition."""

    def __init__(self):
        self.rows = []

    def __call__(self, i, gb, cursor, part):
        self.rows.append((i, list(gb.keys), gb.ghost_count, cursor, part, len(gb.live)))


def _instances(c, count, seed=0):
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        m = rng.randint(2, 5)
        runs = rng.randint(2, 5)
        data, cert = gen_nearly_sorted(m, c, runs, rng.randrange(2**32), certify=False)
        out.append((data, m, cert))
    return out


# ---------------------------------------------------------------- ghost buffer


def test_ghost_buffer_take_and_add():
    gb = GhostBuffer(3)
    gb.add(5)
    gb.add(2, ghost=True)
    gb.add(7)
    assert gb.keys == [2, 5, 7] and gb.live == [5, 7] and gb.ghost_count == 1
    assert gb.take(0) == (2, False)
    assert gb.take(0) == (5, True)
    gb.add(1)
    gb.add(4)
    with pytest.raises(InvalidState):
        gb.add(9)
        gb.check()


# ---------------------------------------------------------------- recovery exactness


def _wrong_coin_partitions(target):
    """Run the ghost algorithm on many inputs and compare with a replay after each partition."""
    checked = 0
    rng = random.Random(99)
    while checked < target:
        c = rng.choice((3, 4, 5))
        m = rng.randint(2, 5)
        data, _ = gen_nearly_sorted(m, c, rng.randint(2, 5), rng.randrange(2**32), certify=False)
        rec = Recorder()
        out = ghost_randomized(data, m, seed=rng.randrange(2**32), trace=rec)
        # the same machine with an m buffer, told the kept directions in hindsight
        mach = BufferMachine(m, StaticSource(data))
        for _, keys, _, cursor, part, _ in rec.rows:
            run = mach.write_maximal_run(part.correct)
            assert len(run) == part.correct_length
            assert keys == sorted(mach.buffer_keys())
            assert cursor == mach.consumed
            if not part.lucky:
                checked += 1
        assert mach.done
        assert Counter(out.flatten()) == Counter(data)
    return checked


def test_recovery_matches_replay_of_the_kept_directions():
    assert _wrong_coin_partitions(200) >= 200


def test_recovery_on_random_permutations():
    # not nearly sorted, but recovery must still land in the kept direction's state
    for seed in range(40):
        data = gen_random_permutation(120, seed)
        rec = Recorder()
        ghost_randomized(data, 4, seed=seed, trace=rec)
        mach = BufferMachine(4, StaticSource(data))
        for _, keys, _, cursor, part, _ in rec.rows:
            mach.write_maximal_run(part.correct)
            assert keys == sorted(mach.buffer_keys()) and cursor == mach.consumed


# ---------------------------------------------------------------- space and cost


def test_space_stays_within_two_buffers():
    for data, m, _ in _instances(3, 60, seed=1):
        rec = Recorder()
        ghost_randomized(data, m, seed=4, trace=rec)
        for _, keys, ghosts, _, _, live in rec.rows:
            assert len(keys) <= m
            assert live + ghosts == len(keys)


def test_each_partition_costs_one_or_two_runs():
    for data, m, _ in _instances(3, 60, seed=2):
        for seed in range(5):
            out = ghost_randomized(data, m, seed=seed)
            parts = out.meta["partitions"]
            lucky = sum(p.lucky for p in parts)
            assert len(out) <= lucky + 2 * (len(parts) - lucky)
            assert len(out) >= len(parts)


def test_output_is_writable_with_two_buffers():
    for data, m, _ in _instances(3, 30, seed=3):
        out = ghost_randomized(data, m, seed=7)
        out.validate(data)
        assert_writable(data, 2 * m, out)


def test_greedy_coins_reproduce_greedy_offline():
    for data, m, _ in _instances(3, 40, seed=5):
        greedy = greedy_offline(data, m)
        flips = [0 if d is UP else 1 for d in greedy.directions]
        out = ghost_randomized(data, m, coins=ForcedCoins(flips))
        assert all(p.lucky for p in out.meta["partitions"])
        assert out.flatten() == greedy.flatten()
        assert out.lengths == greedy.lengths


def test_wrong_first_coin_costs_at_most_one_extra_run():
    data, _ = gen_nearly_sorted(4, 5, 1, 11, displace=False)
    out = ghost_randomized(data, 4, coins=ForcedCoins([1]))
    part = out.meta["partitions"][0]
    assert not part.lucky and part.coin is DOWN and part.correct is UP
    assert len(out) == 2
    assert part.correct_length == len(data)


def test_ambiguity_flag_on_short_runs():
    data = gen_random_permutation(200, 1)
    out = ghost_randomized(data, 5, seed=0)
    parts = out.meta["partitions"]
    assert out.meta["ambiguous"] == any(p.correct_length < 15 for p in parts[:-1])
    data, _ = gen_nearly_sorted(3, 4, 4, 2, certify=False)
    assert not ghost_randomized(data, 3, seed=0).meta["ambiguous"]


def test_ghost_rejects_duplicates():
    with pytest.raises(DuplicateKey):
        ghost_randomized([1, 2, 1], 2)


def test_empty_input():
    assert len(ghost_randomized([], 3)) == 0


# ---------------------------------------------------------------- expectations on nearly sorted inputs


def test_expected_runs_on_three_nearly_sorted_inputs():
    for data, m, cert in _instances(3, 8, seed=6)[:8]:
        opt = brute_force_opt(data, m).opt_runs
        counts = [len(ghost_randomized(data, m, seed=s)) for s in range(200)]
        assert max(counts) <= 2 * opt
        assert mean(counts) <= 1.5 * opt + 3 * pstdev(counts) / math.sqrt(len(counts))


# ---------------------------------------------------------------- 5m certificate


def test_check_5m_optimality_examples():
    assert check_5m_optimality(RunSequence([Run(UP, list(range(10)))], 2), 2)
    assert not check_5m_optimality(RunSequence([Run(UP, list(range(10))), Run(DOWN, [3])], 2), 2)
    assert check_5m_optimality(RunSequence([], 2), 2)


def test_five_nearly_sorted_greedy_is_optimal_and_certified():
    for data, m, _ in _instances(5, 30, seed=8):
        greedy = greedy_offline(data, m)
        assert len(greedy) == brute_force_opt(data, m).opt_runs
        assert check_5m_optimality(greedy, m)


def test_certificate_fields():
    data, cert = gen_nearly_sorted(3, 5, 4, 0)
    assert cert.witnessed and cert.provenance == "oracle" and cert.opt == 4
    assert cert.witness_directions == [UP, DOWN, UP, DOWN]
    assert all(n >= 15 for n in cert.witness_run_lengths)
