"""CSV and JSON serialization of path reports."""

from __future__ import annotations

import csv
import io
import json
import math

from .harness import REPORT_COLUMNS, PathReport, PathRecord

SCHEMA_VERSION = 1
_INT_COLUMNS = {"groups_discarded", "feat_l1", "feat_l2", "iters"}
_FIELD = {"lambda": "lam"}


def _fmt(v) -> str:
    if isinstance(v, (bool, int)):
        return str(int(v))
    # repr gives the shortest string that round-trips exactly
    return repr(float(v))


def emit_report(report: PathReport, fmt: str = "csv") -> bytes:
    """Serialize ``report`` with a fixed column order.

    CSV writes ``nan`` for undefined ratios; JSON writes ``null`` and
    carries ``schema_version``.
    """
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for rec in report.records:
            w.writerow([_fmt(v) for v in rec.row()])
        return buf.getvalue().encode()
    if fmt == "json":
        rows = []
        for rec in report.records:
            row = {}
            for name, v in zip(REPORT_COLUMNS, rec.row()):
                if isinstance(v, float) and not math.isfinite(v):
                    v = None
                row[name] = v
            rows.append(row)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "mode": report.mode,
            "columns": list(REPORT_COLUMNS),
            "records": rows,
        }
        return (json.dumps(doc, indent=1, allow_nan=False) + "\n").encode()
    raise ValueError(f"unknown report format {fmt!r}; use 'csv' or 'json'")


def _record(values: dict) -> PathRecord:
    kw = {}
    for name in REPORT_COLUMNS:
        v = values[name]
        if name in _INT_COLUMNS:
            v = int(v)
        else:
            v = math.nan if v is None else float(v)
        kw[_FIELD.get(name, name)] = v
    return PathRecord(**kw)


def parse_report(blob: bytes, fmt: str = "csv", mode: str = "") -> PathReport:
    """Inverse of :func:`emit_report` for the emitted columns."""
    text = blob.decode()
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or tuple(rows[0]) != REPORT_COLUMNS:
            raise ValueError("report header does not match the expected columns")
        recs = []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(REPORT_COLUMNS):
                raise ValueError(f"line {lineno}: expected {len(REPORT_COLUMNS)} fields, got {len(row)}")
            recs.append(_record(dict(zip(REPORT_COLUMNS, row))))
        return PathReport(mode, recs)
    if fmt == "json":
        doc = json.loads(text)
        if doc.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {doc.get('schema_version')!r}")
        return PathReport(doc.get("mode", mode), [_record(r) for r in doc["records"]])
    raise ValueError(f"unknown report format {fmt!r}; use 'csv' or 'json'")
