"""JSON Lines trace files.

Line 1 is the header, then one line per record, then the footer::

    {"type": "header", "kind": "solve", "instance": ..., "config": ..., "seed": ...,
     "versions": ..., "started": ..., "wall_time": ...}
    {"type": "row", "k": 1, "rho": 1.0, ...}
    {"type": "footer", "status": "CcmStationary", "certificate": ..., ...}

Floats are written with 17 significant digits so reading a trace back
gives bit-identical numbers.  Anything that varies between otherwise
identical runs (start timestamp, wall time, library versions) lives in
the header, so the rows and the footer of two identical runs are equal
byte for byte.
"""

from __future__ import annotations

import json
import platform
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import serialize
from .salm import RunTrace, SalmConfig, SalmResult, TraceRow

__all__ = ["TraceFile", "body_lines", "make_header", "oracle_trace", "read_trace", "solve_trace", "write_trace"]

_ROW_FIELDS = [f.name for f in fields(TraceRow)]


@dataclass
class TraceFile:
    header: dict
    rows: list[dict] = field(default_factory=list)
    footer: dict = field(default_factory=dict)

    def lines(self) -> list[str]:
        out = [serialize.dumps({"type": "header", **self.header})]
        out += [serialize.dumps({"type": "row", **row}) for row in self.rows]
        out.append(serialize.dumps({"type": "footer", **self.footer}))
        return out

    def run_trace(self) -> RunTrace:
        """Rows of a solve trace as :class:`TraceRow` records."""
        return RunTrace([TraceRow(**{k: row[k] for k in _ROW_FIELDS}) for row in self.rows])


def _versions() -> dict:
    from . import __version__

    return {"ccsalm": __version__, "numpy": np.__version__, "python": platform.python_version()}


def make_header(kind: str, instance: str, config: dict, seed, wall_time: float | None = None, **extra) -> dict:
    return {
        "kind": kind,
        "instance": instance,
        "config": config,
        "seed": seed,
        **extra,
        "versions": _versions(),
        "started": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "wall_time": wall_time,
    }


def solve_trace(result: SalmResult, instance: str, cfg: SalmConfig, x0, seed=None, wall_time=None) -> TraceFile:
    header = make_header("solve", instance, cfg.snapshot(), seed, wall_time, x0=np.asarray(x0).tolist())
    footer = {
        "status": result.status.value,
        "objective": result.objective,
        "x": result.pt.x.tolist(),
        "y": result.pt.y.tolist(),
        "x_sparse": result.x_sparse.tolist(),
        "feasibility": asdict(result.feasibility),
        "certificate": result.certificate.to_dict(),
    }
    return TraceFile(header, [asdict(row) for row in result.trace.rows], footer)


def oracle_trace(result, instance: str, cfg, seed=None, wall_time=None) -> TraceFile:
    doc = result.to_dict()
    per = doc.pop("per_support")
    header = make_header("oracle", instance, cfg.snapshot(), seed, wall_time)
    return TraceFile(header, per, doc)


def write_trace(trace: TraceFile, path) -> None:
    Path(path).write_text("\n".join(trace.lines()) + "\n")


def read_trace(path) -> TraceFile:
    header, rows, footer = None, [], None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as err:
            raise ValueError(f"{path}:{lineno}: {err.msg}") from None
        kind = rec.pop("type", None)
        if kind == "header":
            header = rec
        elif kind == "row":
            rows.append(rec)
        elif kind == "footer":
            footer = rec
        else:
            raise ValueError(f"{path}:{lineno}: unknown record type {kind!r}")
    if header is None or footer is None:
        raise ValueError(f"{path}: missing header or footer")
    return TraceFile(header, rows, footer)


def body_lines(path) -> list[str]:
    """Every line of a trace file except the header."""
    return Path(path).read_text().splitlines()[1:]
