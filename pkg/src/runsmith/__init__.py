"""Bounded-buffer up-down run generation."""
from .core import (DOWN, UP, BufferMachine, Direction, Run, RunSequence, StaticSource, UnwrittenView,
                   check_feasible, count_runs, replay_directions, simulate_maximal_run_length,
                   unwritten_view, write_maximal_run)
from .errors import (ArithmeticOverflow, BudgetExceeded, DuplicateKey, InvalidState, ProtocolError,
                     RunsmithError)

__version__ = "0.1.0"

__all__ = ["DOWN", "UP", "BufferMachine", "Direction", "Run", "RunSequence", "StaticSource", "UnwrittenView",
           "check_feasible", "count_runs", "replay_directions", "simulate_maximal_run_length", "unwritten_view",
           "write_maximal_run", "ArithmeticOverflow", "BudgetExceeded", "DuplicateKey", "InvalidState",
           "ProtocolError", "RunsmithError", "__version__"]
