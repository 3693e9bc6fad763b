"""Experiment orchestration: algorithms x inputs x seeds, with optional OPT oracles."""
from __future__ import annotations

import hashlib
import os
import time
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from statistics import mean
from typing import Any, Callable

from . import generators as gen
from .core import RunSequence
from .errors import BudgetExceeded, UnknownName
from .nearly_sorted import ghost_randomized
from .offline import FIBONACCI, SIMPLE, PtasConfig, brute_force_opt, greedy_offline, ptas
from .online import (alternating_updown, greedy_4m_buffer, lookahead_3m, randomized_2m,
                     replacement_selection_up)

# ---------------------------------------------------------------- registries


def _ptas(variant):
    def run(data, m, seed=0, eps=Fraction(1, 3)):
        return ptas(list(data), m, PtasConfig(eps, variant))[0]
    return run


def _oracle(data, m, seed=0, eps=None):
    from .core import replay_directions
    data = list(data)
    res = brute_force_opt(data, m)
    out = replay_directions(data, m, res.witness_directions)
    out.meta["oracle"] = res
    return out


# name -> (callable(source, m, seed, eps) -> RunSequence, needs static input)
ALGORITHMS: dict[str, tuple[Callable[..., RunSequence], bool]] = {
    "rs_up": (lambda src, m, seed=0, eps=None: replacement_selection_up(src, m), False),
    "alternating": (lambda src, m, seed=0, eps=None: alternating_updown(src, m), False),
    "alternating4m": (lambda src, m, seed=0, eps=None: alternating_updown(src, m, buffer_factor=4), False),
    "greedy4m": (lambda src, m, seed=0, eps=None: greedy_4m_buffer(src, m), False),
    "greedy4m_minus3": (lambda src, m, seed=0, eps=None: greedy_4m_buffer(src, m, capacity=4 * m - 3), False),
    "lookahead3m": (lambda src, m, seed=0, eps=None: lookahead_3m(src, m), False),
    "rand2m": (lambda src, m, seed=0, eps=None: randomized_2m(src, m, seed)[0], False),
    "ghost": (lambda src, m, seed=0, eps=None: ghost_randomized(src, m, seed), False),
    "greedy_offline": (lambda src, m, seed=0, eps=None: greedy_offline(list(src), m), True),
    "ptas_simple": (_ptas(SIMPLE), True),
    "ptas_fib": (_ptas(FIBONACCI), True),
    "oracle": (_oracle, True),
}

RANDOMIZED = {"rand2m", "ghost"}


def get_algorithm(name: str):
    try:
        return ALGORITHMS[name]
    except KeyError:
        raise UnknownName(f"unknown algorithm {name!r}") from None


def _p(params, key, default=None):
    if key in params:
        return params[key]
    if default is None:
        raise ValueError(f"generator parameter {key!r} is required")
    return default


# fixed-input generators: name -> callable(params, m, seed) -> list of keys
GENERATORS: dict[str, Callable[[dict, int, int], list[int]]] = {
    "sorted": lambda p, m, s: gen.gen_sorted(_p(p, "n")),
    "reverse": lambda p, m, s: gen.gen_reverse(_p(p, "n")),
    "perm": lambda p, m, s: gen.gen_random_permutation(_p(p, "n"), s),
    "greedy_gap": lambda p, m, s: gen.fixture_greedy_gap(m, _p(p, "c", 1)),
    "tight3m": lambda p, m, s: gen.fixture_3m_tight(m),
    "chunked": lambda p, m, s: gen.fixture_chunked(m, _p(p, "c", 1)),
    "rand_adversary": lambda p, m, s: gen.adversary_randomized(m, _p(p, "t"), s),
    "nearly_sorted": lambda p, m, s: gen.gen_nearly_sorted(m, _p(p, "c", 3), _p(p, "runs", 3), s,
                                                           certify=False)[0],
}

# inputs that react to the algorithm's writes; only usable through run_experiment
ADAPTIVE = {"det_adversary", "resaug"}


def construction_opt(name: str, params: dict, m: int) -> int:
    """Run count of the explicit offline schedule that comes with a construction."""
    if name == "sorted":
        return 1 if _p(params, "n") else 0
    if name == "greedy_gap":
        return 2 * _p(params, "c", 1)
    if name == "chunked":
        return _p(params, "c", 1)
    if name == "rand_adversary":
        return _p(params, "t")
    if name == "nearly_sorted":
        return _p(params, "runs", 3)
    raise UnknownName(f"generator {name!r} has no construction schedule")


# ---------------------------------------------------------------- spec and records


ORACLES = ("bruteforce", "construction", "none")


@dataclass
class ExperimentSpec:
    algorithm: str
    m: int
    input: dict  # {"generator": name, "params": {...}} or {"path": file}
    trials: int = 1
    seed_base: int = 0
    oracle: str = "none"  # bruteforce | ptas:<eps> | construction | none
    input_seed: int | None = None  # fixes the generator seed across trials

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.m < 1:
            raise ValueError("m must be positive")
        get_algorithm(self.algorithm)
        if not (self.oracle in ORACLES or self.oracle.startswith("ptas:")):
            raise UnknownName(f"unknown oracle {self.oracle!r}")
        if "path" not in self.input:
            name = self.input.get("generator")
            if name not in GENERATORS and name not in ADAPTIVE:
                raise UnknownName(f"unknown generator {name!r}")

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentSpec":
        known = {"algorithm", "m", "input", "trials", "seedBase", "seed_base", "oracle", "inputSeed",
                 "input_seed"}
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown spec fields: {sorted(extra)}")
        return cls(algorithm=obj["algorithm"], m=int(obj["m"]), input=dict(obj["input"]),
                   trials=int(obj.get("trials", 1)),
                   seed_base=int(obj.get("seedBase", obj.get("seed_base", 0))),
                   oracle=str(obj.get("oracle", "none")),
                   input_seed=obj.get("inputSeed", obj.get("input_seed")))

    @property
    def params(self) -> dict:
        return dict(self.input.get("params", {}))


@dataclass
class ExperimentRecord:
    algorithm: str
    m: int
    seed: int
    input_id: str
    n: int
    run_count: int
    run_lengths: list[int]
    mean_run_length: float
    opt: int | None
    provenance: str | None
    ratio: float | None
    ambiguous: bool = False
    incomparable: bool = False
    duration_ms: float = 0.0
    realized: list[int] | None = field(default=None, repr=False)

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("realized")
        return d


def input_id(data) -> str:
    h = hashlib.sha1()
    for x in data:
        h.update(int(x).to_bytes(8, "little", signed=True))
    return h.hexdigest()[:16]


def _load_path(path: str) -> list[int]:
    from .formats import read_input
    return read_input(path)


def _run_trial(spec: ExperimentSpec, seed: int) -> ExperimentRecord:
    fn, static_only = get_algorithm(spec.algorithm)
    m = spec.m
    params = spec.params
    eps = Fraction(spec.oracle.split(":", 1)[1]) if spec.oracle.startswith("ptas:") else Fraction(1, 3)
    if "eps" in params:
        eps = Fraction(str(params["eps"]))
    in_seed = spec.input_seed if spec.input_seed is not None else seed
    name = spec.input.get("generator")
    opt = provenance = None
    started = time.perf_counter()
    if name in ADAPTIVE:
        if static_only:
            raise ValueError(f"{spec.algorithm} needs a fixed input; adaptive generators cannot feed it")
        algo = lambda src, mm: fn(src, mm, seed, eps)  # noqa: E731
        if name == "det_adversary":
            outcome = gen.adversary_deterministic(algo, m, _p(params, "t"))
        else:
            outcome = gen.adversary_resaug(algo, m)
        out, data = outcome.output, outcome.realized
        if spec.oracle == "construction":
            opt, provenance = outcome.expected_opt, "construction"
    else:
        data = _load_path(spec.input["path"]) if "path" in spec.input else GENERATORS[name](params, m, in_seed)
        out = fn(data, m, seed, eps)
        if spec.oracle == "construction":
            if name is None:
                raise ValueError("construction OPT needs a named generator")
            opt, provenance = construction_opt(name, params, m), "construction"
    elapsed = (time.perf_counter() - started) * 1000.0

    incomparable = False
    if spec.oracle == "bruteforce":
        try:
            opt, provenance = brute_force_opt(data, m).opt_runs, "bruteforce"
        except BudgetExceeded:
            incomparable, provenance = True, "bruteforce"
    elif spec.oracle.startswith("ptas:"):
        cfg = PtasConfig(Fraction(spec.oracle.split(":", 1)[1]), FIBONACCI if len(set(data)) == len(data) else SIMPLE)
        opt, provenance = len(ptas(list(data), m, cfg)[0]), "ptas"

    r = len(out)
    lengths = out.lengths
    ratio = None
    if opt:
        ratio = r / opt
    elif opt == 0 and r == 0:
        ratio = 1.0
    return ExperimentRecord(spec.algorithm, m, seed, input_id(data), len(data), r, lengths,
                            (sum(lengths) / r) if r else 0.0, opt, provenance, ratio,
                            bool(out.meta.get("ambiguous", False)), incomparable, elapsed,
                            list(data) if name in ADAPTIVE else None)


def _worker(args):
    spec, seed = args
    return _run_trial(spec, seed)


def default_threads() -> int:
    env = os.environ.get("RUNSMITH_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("RUNSMITH_THREADS must be positive")
        return n
    return os.cpu_count() or 1


def run_experiment(spec: ExperimentSpec, threads: int | None = None) -> list[ExperimentRecord]:
    """Run every trial of ``spec``; records come back ordered by seed."""
    seeds = [spec.seed_base + i for i in range(spec.trials)]
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(seeds) == 1:
        return [_run_trial(spec, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=min(threads, len(seeds))) as pool:
        return list(pool.map(_worker, [(spec, s) for s in seeds]))


# ---------------------------------------------------------------- summaries


@dataclass
class Summary:
    max_ratio: float
    mean_ratio: float
    inputs: int
    records: int
    incomparable: int
    ratio_histogram: dict[str, int]
    run_count_histogram: dict[int, int]

    def as_dict(self) -> dict[str, Any]:
        return {"maxRatio": self.max_ratio, "meanRatio": self.mean_ratio, "inputs": self.inputs,
                "records": self.records, "incomparable": self.incomparable,
                "histograms": {"ratio": self.ratio_histogram, "runCount": self.run_count_histogram}}


def competitive_summary(records: list[ExperimentRecord]) -> Summary:
    """Worst ratio, and the worst per-input mean ratio (the expectation over seeds)."""
    if not records:
        raise ValueError("no records to summarize")
    provenances = {r.provenance for r in records}
    if len(provenances) > 1:
        raise ValueError(f"records mix OPT provenances: {sorted(map(str, provenances))}")
    usable = [r for r in records if r.ratio is not None]
    if not usable:
        raise ValueError("no record has an OPT estimate")
    by_input = defaultdict(list)
    for r in usable:
        by_input[r.input_id].append(r.ratio)
    return Summary(max(r.ratio for r in usable), max(mean(v) for v in by_input.values()), len(by_input),
                   len(records), sum(r.incomparable for r in records),
                   dict(sorted(Counter(f"{r.ratio:.2f}" for r in usable).items())),
                   dict(sorted(Counter(r.run_count for r in records).items())))
