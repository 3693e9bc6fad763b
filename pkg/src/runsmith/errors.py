"""Exception types raised across the package."""


class RunsmithError(Exception):
    pass


class InvalidState(RunsmithError):
    pass


class DuplicateKey(RunsmithError):
    def __init__(self, key):
        super().__init__(f"duplicate key {key}")
        self.key = key


class BudgetExceeded(RunsmithError):
    """Search gave up; ``best`` is the best run count found so far (not optimal)."""

    def __init__(self, best, nodes):
        super().__init__(f"node budget exhausted after {nodes} nodes (best so far {best})")
        self.best = best
        self.nodes = nodes
        self.optimal = False


class ProtocolError(RunsmithError):
    pass


class ArithmeticOverflow(RunsmithError, OverflowError):
    pass


class UnknownName(RunsmithError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown name"
