"""Readers and writers for the CLI's file formats.

Data matrices are CSV with an optional header of variable names. Edge lists
are TSV with 1-based node indices; an optional ``# p=<int>`` comment line
records the node count. Results and manifests are JSON.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import EdgeSet


class InputFormatError(ValueError):
    """A file could not be parsed; ``line`` is 1-based when known."""

    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


def ensure_writable_dir(path) -> Path:
    """Create ``path`` if needed and prove a file can be written there."""
    path = Path(path)
    try:
        path.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=path, prefix=".probe", delete=True):
            pass
    except OSError as exc:
        raise OSError(f"output directory {path} is not writable: {exc}") from exc
    return path


def _fmt(x) -> str:
    return repr(float(x))


# -- data matrices -----------------------------------------------------------

def write_matrix_csv(path, matrix, names=None) -> None:
    matrix = np.asarray(matrix, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if names is not None:
            w.writerow(names)
        for row in matrix:
            w.writerow([_fmt(v) for v in row])


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def read_matrix_csv(path):
    """Return ``(matrix, names)``; ``names`` is None when there is no header."""
    rows, names = [], None
    with open(path, newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not c.strip() for c in rec):
                continue
            if names is None and not rows and not all(_is_number(c) for c in rec):
                names = [c.strip() for c in rec]
                continue
            try:
                vals = [float(c) for c in rec]
            except ValueError:
                raise InputFormatError(path, "non-numeric entry", lineno) from None
            if rows and len(vals) != len(rows[0]):
                raise InputFormatError(
                    path, f"expected {len(rows[0])} columns, found {len(vals)}", lineno)
            rows.append(vals)
    if not rows:
        raise InputFormatError(path, "no data rows")
    mat = np.array(rows)
    if names is not None and len(names) != mat.shape[1]:
        raise InputFormatError(path, f"header has {len(names)} names for {mat.shape[1]} columns", 1)
    return mat, names


# -- edge lists ------------------------------------------------------------------

def write_truth_edges(path, edge_sets, p=None) -> None:
    """One TSV for all groups: columns ``i j group`` (groups are 1-based too)."""
    p = p if p is not None else edge_sets[0].p
    with open(path, "w") as fh:
        fh.write(f"# p={p}\n")
        fh.write("i\tj\tgroup\n")
        for k, es in enumerate(edge_sets, start=1):
            for i, j in sorted(es):
                fh.write(f"{i + 1}\t{j + 1}\t{k}\n")


def write_estimated_edges(path, edges: EdgeSet, theta, pcor) -> None:
    """Columns ``i j theta_ij partial_correlation``."""
    with open(path, "w") as fh:
        fh.write(f"# p={edges.p}\n")
        fh.write("i\tj\ttheta_ij\tpartial_correlation\n")
        for i, j in sorted(edges):
            fh.write(f"{i + 1}\t{j + 1}\t{_fmt(theta[i, j])}\t{_fmt(pcor[i, j])}\n")


def read_edge_table(path):
    """Parse an edge-list TSV.

    Returns
    -------
    dict
        ``p`` (int or None), ``columns`` (header names) and ``rows`` (list of
        dicts with 0-based ``i``, ``j``, optional 1-based ``group`` and any
        float columns).
    """
    p, header, rows = None, None, []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                if key.strip() == "p":
                    try:
                        p = int(val)
                    except ValueError:
                        raise InputFormatError(path, f"bad node count {val!r}", lineno) from None
                continue
            fields = line.split("\t")
            if header is None:
                header = [f.strip() for f in fields]
                if header[:2] != ["i", "j"]:
                    raise InputFormatError(path, "header must start with columns i, j", lineno)
                continue
            if len(fields) != len(header):
                raise InputFormatError(
                    path, f"expected {len(header)} fields, found {len(fields)}", lineno)
            rec = {}
            try:
                for name, val in zip(header, fields):
                    if name in ("i", "j", "group"):
                        rec[name] = int(val)
                    else:
                        rec[name] = float(val)
            except ValueError:
                raise InputFormatError(path, f"cannot parse field in {line!r}", lineno) from None
            if rec["i"] < 1 or rec["j"] < 1 or rec["i"] == rec["j"]:
                raise InputFormatError(path, "node indices must be distinct and >= 1", lineno)
            if p is not None and max(rec["i"], rec["j"]) > p:
                raise InputFormatError(path, f"node index exceeds p={p}", lineno)
            rec["i"] -= 1
            rec["j"] -= 1
            rows.append(rec)
    if header is None:
        raise InputFormatError(path, "missing header line")
    return {"p": p, "columns": header, "rows": rows}


def edge_sets_from_table(table, p=None, n_groups=None) -> list:
    """Split an edge table into EdgeSets, one per group (a single one if no group column)."""
    p = p if p is not None else table["p"]
    if p is None:
        raise ValueError("node count unknown: pass p or include a '# p=' line")
    if "group" not in table["columns"]:
        return [EdgeSet(p, frozenset((r["i"], r["j"]) for r in table["rows"]))]
    K = n_groups or max((r["group"] for r in table["rows"]), default=0)
    buckets = [set() for _ in range(K)]
    for r in table["rows"]:
        if not 1 <= r["group"] <= K:
            raise ValueError(f"group {r['group']} out of range 1..{K}")
        buckets[r["group"] - 1].add((r["i"], r["j"]))
    return [EdgeSet(p, frozenset(b)) for b in buckets]


def read_edge_sets(path, p=None, n_groups=None) -> list:
    return edge_sets_from_table(read_edge_table(path), p, n_groups)


# -- JSON ------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, payload) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def read_json(path):
    with open(path) as fh:
        return json.load(fh)
