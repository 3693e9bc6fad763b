"""Input and result file formats.

Text inputs hold one decimal integer per line.  Binary inputs are the magic
``RGEN1``, a little-endian u64 count, then that many little-endian i64 keys.
Results are JSON objects tagged ``"schema": "runsmith/1"``.
"""
from __future__ import annotations

import json
import re
import struct
from pathlib import Path
from typing import Sequence

from .core import KEY_MAX, KEY_MIN, RunSequence

MAGIC = b"RGEN1"
SCHEMA = "runsmith/1"
_INT = re.compile(r"-?[0-9]+")


class FormatError(ValueError):
    pass


def write_text(path, keys: Sequence[int]):
    Path(path).write_text("".join(f"{k}\n" for k in keys))


def parse_text(text: str) -> list[int]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    out = []
    for i, line in enumerate(lines, 1):
        if not _INT.fullmatch(line):
            raise FormatError(f"line {i}: not an integer: {line!r}")
        v = int(line)
        if not KEY_MIN <= v <= KEY_MAX:
            raise FormatError(f"line {i}: {v} outside signed 64-bit range")
        out.append(v)
    return out


def write_binary(path, keys: Sequence[int]):
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(keys)))
        f.write(struct.pack(f"<{len(keys)}q", *keys))


def parse_binary(blob: bytes) -> list[int]:
    if not blob.startswith(MAGIC) or len(blob) < len(MAGIC) + 8:
        raise FormatError("missing RGEN1 header")
    (count,) = struct.unpack_from("<Q", blob, len(MAGIC))
    payload = blob[len(MAGIC) + 8:]
    if len(payload) != 8 * count:
        raise FormatError(f"header says {count} keys but payload holds {len(payload) / 8:g}")
    return list(struct.unpack(f"<{count}q", payload))


def read_input(path) -> list[int]:
    blob = Path(path).read_bytes()
    if blob.startswith(MAGIC):
        return parse_binary(blob)
    try:
        return parse_text(blob.decode("ascii"))
    except UnicodeDecodeError:
        raise FormatError("input is neither RGEN1 binary nor ASCII text") from None


def result_dict(algo: str, m: int, seed: int | None, out: RunSequence, opt: int | None = None,
                provenance: str | None = None, witness=None) -> dict:
    r = len(out)
    obj = {"schema": SCHEMA, "algo": algo, "m": m, "seed": seed,
           "runs": [{"dir": run.direction.value, "len": len(run)} for run in out.runs],
           "r": r, "opt": opt, "optProvenance": provenance,
           "ratio": (r / opt) if opt else None}
    if witness is not None:
        obj["witness"] = [d.value for d in witness]
    return obj


def write_result(path, obj: dict):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


def load_result(path, n: int | None = None) -> dict:
    """Load a result file and re-check r and (if ``n`` is given) the element total."""
    obj = json.loads(Path(path).read_text())
    if obj.get("schema") != SCHEMA:
        raise FormatError(f"unexpected schema {obj.get('schema')!r}")
    if obj["r"] != len(obj["runs"]):
        raise FormatError("r does not match the number of runs")
    if any(run["dir"] not in ("up", "down") or run["len"] < 1 for run in obj["runs"]):
        raise FormatError("malformed run entry")
    if n is not None and sum(run["len"] for run in obj["runs"]) != n:
        raise FormatError("run lengths do not add up to the input length")
    return obj
