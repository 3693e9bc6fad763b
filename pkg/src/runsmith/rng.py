"""Seeded coin source shared by the randomized algorithms and generators.

The generator is numpy's PCG64, whose output stream is fixed for a given seed
across platforms and numpy releases.  A coin is the low bit of the next raw
64-bit output.
"""
from __future__ import annotations

import numpy as np


class CoinFlipper:
    def __init__(self, seed: int):
        self.seed = seed
        self._bits = np.random.PCG64(seed)

    def flip(self) -> int:
        return int(self._bits.random_raw()) & 1


class ForcedCoins:
    """Replays a fixed list of coin values, then repeats the last one."""

    def __init__(self, coins):
        self.coins = list(coins)
        self.i = 0

    def flip(self) -> int:
        c = self.coins[min(self.i, len(self.coins) - 1)]
        self.i += 1
        return c
