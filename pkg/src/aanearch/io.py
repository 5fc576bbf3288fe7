"""CSV readers and writers.

Every writer uses a fixed column order, UTF-8, ``\\n`` line endings and
floats rendered with 12 significant digits so outputs are byte-stable.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .cluster import ClusterAssignment
from .embed import EmbeddingMatrix
from .errors import InputError
from .features import ActivityGrid, AttributeTable, CaseSeries, PairwiseIndexMatrix


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if v == 0:
            return "0"
        return format(v, ".12g")
    return str(value)


def write_rows(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_rows(path, required=()):
    path = Path(path)
    if not path.exists():
        raise InputError(f"missing input file: {path}")
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise InputError(f"empty CSV file: {path}") from None
        missing = [c for c in required if c not in header]
        if missing:
            raise InputError(f"{path}: missing column(s) {', '.join(missing)}")
        rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    return header, rows


def _float(cell: str, path, line) -> float:
    cell = cell.strip()
    if cell == "" or cell.lower() in ("na", "nan", "null"):
        return float("nan")
    try:
        return float(cell)
    except ValueError:
        raise InputError(f"{path}:{line}: not a number: {cell!r}") from None


def read_attributes(path, timestep: int = 0) -> AttributeTable:
    """``node_id`` followed by one column per feature; blank cells are missing."""
    header, rows = read_rows(path, required=("node_id",))
    if header[0] != "node_id":
        raise InputError(f"{path}: first column must be node_id")
    ids = [r[0].strip() for r in rows]
    vals = np.array(
        [[_float(c, path, i + 2) for c in r[1:]] for i, r in enumerate(rows)], dtype=float
    ).reshape(len(rows), len(header) - 1)
    try:
        return AttributeTable(ids, header[1:], vals, timestep)
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None


def write_attributes(path, table: AttributeTable):
    rows = ([n, *row] for n, row in zip(table.node_ids, table.values))
    return write_rows(path, ["node_id", *table.columns], rows)


def read_edges(path) -> list:
    header, rows = read_rows(path, required=("src", "dst", "count"))
    si, di, ci = header.index("src"), header.index("dst"), header.index("count")
    out = []
    for i, r in enumerate(rows):
        count = _float(r[ci], path, i + 2)
        if not count >= 0:
            raise InputError(f"{path}:{i + 2}: edge count must be a nonnegative number")
        out.append((r[si].strip(), r[di].strip(), count))
    return out


def write_edges(path, records):
    return write_rows(path, ["src", "dst", "count"], records)


def read_grid(path) -> ActivityGrid:
    header, rows = read_rows(path, required=("x", "y", "intensity"))
    xi, yi, ii = header.index("x"), header.index("y"), header.index("intensity")
    pos = [(_float(r[xi], path, k), _float(r[yi], path, k)) for k, r in enumerate(rows)]
    inten = [_float(r[ii], path, k) for k, r in enumerate(rows)]
    return ActivityGrid(np.array(pos), np.array(inten))


def read_cases(path, step: float = 1.0) -> CaseSeries:
    header, rows = read_rows(path, required=("date", "cumulative_cases"))
    ci = header.index("cumulative_cases")
    return CaseSeries(np.array([_float(r[ci], path, k) for k, r in enumerate(rows)]), step)


def read_pairwise_matrix(path) -> PairwiseIndexMatrix:
    """Dense square matrix; header row lists node ids, optional leading id column."""
    header, rows = read_rows(path)
    if header and header[0] in ("", "node_id"):
        ids = header[1:]
        vals = [[_float(c, path, k) for c in r[1:]] for k, r in enumerate(rows)]
    else:
        ids = header
        vals = [[_float(c, path, k) for c in r] for k, r in enumerate(rows)]
    return PairwiseIndexMatrix(np.array(vals), tuple(ids))


def write_embedding(path, emb: EmbeddingMatrix):
    header = ["node_id", *[f"dim_{j}" for j in range(emb.dimension)]]
    return write_rows(path, header, ([n, *row] for n, row in zip(emb.node_ids, emb.values)))


def read_embedding(path) -> EmbeddingMatrix:
    header, rows = read_rows(path, required=("node_id",))
    vals = np.array([[_float(c, path, k) for c in r[1:]] for k, r in enumerate(rows)])
    return EmbeddingMatrix(vals.reshape(len(rows), len(header) - 1), tuple(r[0] for r in rows))


def write_trace(path, trace):
    return write_rows(path, ["iteration", "objective", "residual"], trace.rows())


ASSIGNMENT_HEADER = ["node_id", "timestep", "method", "K", "label"]


def write_assignments(path, assignments):
    def rows():
        for a in assignments:
            for n, lab in zip(a.node_ids, a.labels):
                yield n, a.timestep, a.method, a.k, lab

    return write_rows(path, ASSIGNMENT_HEADER, rows())


def read_assignments(path) -> dict:
    """Map ``(timestep, K, method)`` to :class:`ClusterAssignment` (score not persisted)."""
    header, rows = read_rows(path, required=ASSIGNMENT_HEADER)
    idx = {c: header.index(c) for c in ASSIGNMENT_HEADER}
    grouped: dict = {}
    for r in rows:
        key = (int(r[idx["timestep"]]), int(r[idx["K"]]), r[idx["method"]])
        grouped.setdefault(key, []).append((r[idx["node_id"]], int(r[idx["label"]])))
    return {
        key: ClusterAssignment([lab for _, lab in v], key[1], key[2], float("nan"), key[0], [n for n, _ in v])
        for key, v in grouped.items()
    }
