"""Matrix files (CSV, Matrix Market), column splitting, and run reports.

Matrix files store floats with 17 significant digits and JSON reports use
the shortest round-trip repr; both reproduce every 64-bit value exactly.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import MatrixParseError
from .instances import InstancePair
from .linalg import as_matrix

REPORT_SCHEMA = "leverkit.run-report/1"
_MM_FIELDS = {"real", "double", "integer"}
_MM_SYMMETRY = {"general", "symmetric", "skew-symmetric"}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _infer_format(path) -> str:
    suffix = Path(path).suffix.lower()
    return "mm" if suffix in {".mtx", ".mm"} else "csv"


def load_matrix(path, format: str | None = None, *, header: bool = False) -> np.ndarray:
    """Read a dense float64 matrix from CSV or Matrix Market.

    CSV rows are observations, comma separated; lines starting with ``#``
    are skipped and ``header=True`` drops the first data line. Matrix Market
    accepts ``array`` and ``coordinate`` layouts with a real/integer field
    and general/symmetric/skew-symmetric symmetry; coordinate data is
    densified. ``format`` is ``"csv"`` or ``"mm"``, inferred from the suffix
    when omitted.
    """
    fmt = format or _infer_format(path)
    if fmt == "csv":
        return _load_csv(path, header)
    if fmt in {"mm", "matrix-market"}:
        return _load_mm(path)
    raise ValueError(f"unknown matrix format {fmt!r}")


def _parse_float(tok, lineno, path):
    try:
        val = float(tok)
    except ValueError:
        raise MatrixParseError(f"non-numeric value {tok.strip()!r}", lineno, path) from None
    if not np.isfinite(val):
        raise MatrixParseError(f"non-finite value {tok.strip()!r}", lineno, path)
    return val


def _load_csv(path, header):
    rows = []
    width = None
    skipped_header = not header
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if not skipped_header:
                skipped_header = True
                continue
            cells = stripped.split(",")
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise MatrixParseError(f"ragged row: expected {width} fields, got {len(cells)}",
                                       lineno, path)
            rows.append([_parse_float(c, lineno, path) for c in cells])
    if not rows:
        raise MatrixParseError("no data rows", None, path)
    return as_matrix(np.array(rows, dtype=np.float64))


def _load_mm(path):
    with open(path) as fh:
        lines = fh.readlines()
    if not lines:
        raise MatrixParseError("empty file", 1, path)
    head = lines[0].split()
    if len(head) != 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise MatrixParseError("missing '%%MatrixMarket matrix' header", 1, path)
    layout, fld, sym = (h.lower() for h in head[2:])
    if layout not in {"array", "coordinate"}:
        raise MatrixParseError(f"unsupported layout {layout!r}", 1, path)
    if fld not in _MM_FIELDS:
        raise MatrixParseError(f"unsupported field {fld!r}", 1, path)
    if sym not in _MM_SYMMETRY:
        raise MatrixParseError(f"unsupported symmetry {sym!r}", 1, path)

    body = [(i, ln.split()) for i, ln in enumerate(lines[1:], start=2)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise MatrixParseError("missing size line", None, path)
    size_line, size = body[0]
    try:
        dims = [int(t) for t in size]
    except ValueError:
        raise MatrixParseError("malformed size line", size_line, path) from None
    entries = body[1:]

    if layout == "array":
        if len(dims) != 2:
            raise MatrixParseError("array size line needs 2 integers", size_line, path)
        m, n = dims
        if sym == "general":
            slots = [(i, j) for j in range(n) for i in range(m)]
        else:
            if m != n:
                raise MatrixParseError("symmetric matrix must be square", size_line, path)
            first = 1 if sym == "skew-symmetric" else 0
            slots = [(i, j) for j in range(n) for i in range(j + first, m)]
        if len(entries) != len(slots):
            raise MatrixParseError(f"expected {len(slots)} entries, got {len(entries)}",
                                   entries[-1][0] if entries else size_line, path)
        out = np.zeros((m, n))
        for (lineno, toks), (i, j) in zip(entries, slots):
            if len(toks) != 1:
                raise MatrixParseError("array entry must be a single value", lineno, path)
            out[i, j] = _parse_float(toks[0], lineno, path)
    else:
        if len(dims) != 3:
            raise MatrixParseError("coordinate size line needs 3 integers", size_line, path)
        m, n, nnz = dims
        if len(entries) != nnz:
            raise MatrixParseError(f"expected {nnz} entries, got {len(entries)}",
                                   entries[-1][0] if entries else size_line, path)
        out = np.zeros((m, n))
        for lineno, toks in entries:
            if len(toks) != 3:
                raise MatrixParseError("coordinate entry needs 'row col value'", lineno, path)
            try:
                i, j = int(toks[0]) - 1, int(toks[1]) - 1
            except ValueError:
                raise MatrixParseError("non-integer coordinate", lineno, path) from None
            if not (0 <= i < m and 0 <= j < n):
                raise MatrixParseError(f"coordinate ({i + 1}, {j + 1}) out of range", lineno, path)
            out[i, j] += _parse_float(toks[2], lineno, path)
    if sym == "symmetric":
        out = out + np.tril(out, -1).T
    elif sym == "skew-symmetric":
        out = out - np.tril(out, -1).T
    return as_matrix(out)


def write_matrix(x, path, format: str | None = None) -> None:
    """Write ``x`` as CSV or Matrix Market array (column-major)."""
    x = as_matrix(x)
    fmt = format or _infer_format(path)
    if fmt == "csv":
        text = "".join(",".join(_fmt(v) for v in row) + "\n" for row in x)
    elif fmt in {"mm", "matrix-market"}:
        lines = ["%%MatrixMarket matrix array real general", f"{x.shape[0]} {x.shape[1]}"]
        lines += [_fmt(v) for v in x.T.ravel()]
        text = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    _atomic_write(path, text)


def split_columns(x, fraction: float = 0.5, center: bool = False) -> InstancePair:
    """First ``ceil(fraction * cols)`` columns become ``A``, the rest ``B``.

    ``center=True`` subtracts each column's mean from both blocks.
    """
    x = as_matrix(x)
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must lie in (0, 1), got {fraction}")
    n = x.shape[1]
    if n < 2:
        raise ValueError("need at least two columns to split")
    cut = min(max(int(np.ceil(fraction * n - 1e-9)), 1), n - 1)
    if center:
        x = x - x.mean(axis=0)
    return InstancePair(x[:, :cut].copy(), x[:, cut:].copy(),
                        {"split_fraction": fraction, "split_at": cut, "centered": center})


@dataclass
class RunReport:
    """One algorithm run: parameters, outcome and (optionally) timings in milliseconds.

    ``timings_ms`` is None in dry-run mode; everything else is a deterministic
    function of the inputs and seed.
    """

    algorithm: str
    parameters: dict = field(default_factory=dict)
    instance: dict = field(default_factory=dict)
    selected: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    objective: float | None = None
    objective_ratio: float | None = None
    bounds: dict = field(default_factory=dict)
    status: str = "ok"
    timings_ms: dict | None = None
    version: str = __version__
    schema: str = REPORT_SCHEMA

    def to_dict(self, timings: bool = True) -> dict:
        d = asdict(self)
        if not timings:
            d["timings_ms"] = None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        if d.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(**d)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_reports(reports, timings: bool = True) -> str:
    """Serialize one report or a list of them as indented JSON with stable key order."""
    if isinstance(reports, RunReport):
        payload = _jsonable(reports.to_dict(timings))
    else:
        payload = [_jsonable(r.to_dict(timings)) for r in reports]
    return json.dumps(payload, indent=2, allow_nan=True) + "\n"


def write_report(report, path, timings: bool = True) -> None:
    """Write a :class:`RunReport` (or a list of them) to ``path`` atomically."""
    _atomic_write(path, dumps_reports(report, timings))


def read_report(path):
    """Inverse of :func:`write_report`."""
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, list):
        return [RunReport.from_dict(d) for d in data]
    return RunReport.from_dict(data)


CSV_COLUMNS = ("algorithm", "r_fraction", "r_size", "k", "objective", "objective_ratio",
               "status", "svd_ms", "selection_ms", "total_ms")


def report_row(report: RunReport) -> dict:
    p = report.parameters
    t = report.timings_ms or {}
    return {
        "algorithm": report.algorithm,
        "r_fraction": p.get("r_fraction", ""),
        "r_size": p.get("r_size", ""),
        "k": p.get("k", ""),
        "objective": "" if report.objective is None else _fmt(report.objective),
        "objective_ratio": "" if report.objective_ratio is None else _fmt(report.objective_ratio),
        "status": report.status,
        "svd_ms": t.get("svd", ""),
        "selection_ms": t.get("selection", ""),
        "total_ms": t.get("total", ""),
    }


def write_reports_csv(reports, path) -> None:
    """Flat one-row-per-report CSV, for aggregating bench sweeps."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for r in reports:
            writer.writerow(report_row(r))
    os.replace(tmp, path)


def write_text(path, text: str) -> None:
    """Replace ``path`` with ``text`` atomically (temp file + rename)."""
    _atomic_write(path, text)


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".",
                               prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)
