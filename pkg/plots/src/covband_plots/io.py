"""Loaders for the harness's documented file schemas."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

TRACE_HEADER = ["run_id", "rep", "t", "regret"]


class SchemaError(ValueError):
    """An input file does not match its documented schema."""


@dataclass(frozen=True)
class TraceTable:
    """Rows of a trace CSV: (run_id, rep, t, regret)."""

    rows: tuple[tuple[str, int, int, float], ...]

    @property
    def run_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for run_id, *_ in self.rows:
            seen.setdefault(run_id)
        return list(seen)

    def series(self, run_id: str) -> tuple[list[int], list[list[float]]]:
        """Checkpoint times plus one aligned value row per replication."""
        by_rep: dict[int, dict[int, float]] = {}
        for rid, rep, t, regret in self.rows:
            if rid == run_id:
                by_rep.setdefault(rep, {})[t] = regret
        if not by_rep:
            raise SchemaError(f"no rows for run_id {run_id!r}")
        times = sorted({t for vals in by_rep.values() for t in vals})
        matrix = []
        for rep in sorted(by_rep):
            vals = by_rep[rep]
            if sorted(vals) != times:
                raise SchemaError(f"rep {rep} of {run_id!r} misses checkpoints")
            matrix.append([vals[t] for t in times])
        return times, matrix


def load_trace_csv(path) -> TraceTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        if header != TRACE_HEADER:
            raise SchemaError(f"{path}: expected header {TRACE_HEADER}, got {header}")
        rows = []
        for line, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise SchemaError(f"{path}:{line}: expected 4 columns")
            try:
                rows.append((row[0], int(row[1]), int(row[2]), float(row[3])))
            except ValueError as exc:
                raise SchemaError(f"{path}:{line}: {exc}") from None
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return TraceTable(rows=tuple(rows))


def write_trace_csv(path, table: TraceTable) -> None:
    """Inverse of :func:`load_trace_csv`; used by the round-trip test."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for run_id, rep, t, regret in table.rows:
            writer.writerow([run_id, rep, t, repr(regret)])


def load_summary_json(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    return doc


def load_tree_snapshot(path) -> dict:
    doc = load_summary_json(path)
    if doc.get("kind") != "tree_snapshot" or "live_bins" not in doc:
        raise SchemaError(f"{path}: not a tree snapshot")
    return doc
