"""Plain-text readers and writers for designs, responses and group files.

Matrices are headerless comma-separated rows; vectors and group files hold
one value per line. Readers reject ragged rows, non-numeric fields and
non-finite values, naming the offending line.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


class DataFormatError(ValueError):
    pass


def _lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if line:
                yield lineno, line


def _number(tok: str, path, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: not a number: {tok.strip()!r}") from None
    if not math.isfinite(v):
        raise DataFormatError(f"{path}:{lineno}: non-finite value {tok.strip()!r}")
    return v


def read_matrix(path) -> np.ndarray:
    rows, width = [], None
    for lineno, line in _lines(path):
        toks = line.split(",")
        if width is None:
            width = len(toks)
        elif len(toks) != width:
            raise DataFormatError(f"{path}:{lineno}: ragged row, {len(toks)} fields but expected {width}")
        rows.append([_number(t, path, lineno) for t in toks])
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def read_vector(path) -> np.ndarray:
    vals = []
    for lineno, line in _lines(path):
        if "," in line:
            raise DataFormatError(f"{path}:{lineno}: expected one value per line")
        vals.append(_number(line, path, lineno))
    if not vals:
        raise DataFormatError(f"{path}: no values")
    return np.array(vals, dtype=float)


def read_groups(path) -> np.ndarray:
    out = []
    for lineno, line in _lines(path):
        try:
            g = int(line)
        except ValueError:
            raise DataFormatError(f"{path}:{lineno}: group index must be an integer, got {line!r}") from None
        if g < 0:
            raise DataFormatError(f"{path}:{lineno}: negative group index {g}")
        out.append(g)
    if not out:
        raise DataFormatError(f"{path}: no group indices")
    return np.array(out, dtype=np.int64)


def write_matrix(path, x) -> None:
    Path(path).write_text("".join(",".join(repr(float(v)) for v in row) + "\n" for row in np.atleast_2d(x)))


def write_vector(path, v) -> None:
    Path(path).write_text("".join(repr(float(t)) + "\n" for t in np.ravel(v)))


def write_groups(path, assignment) -> None:
    Path(path).write_text("".join(f"{int(g)}\n" for g in assignment))
