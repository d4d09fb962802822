"""Time series container and plain-text / CSV ingestion."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise InputError("a time series must be one-dimensional")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def digest(self) -> dict:
        v = self.values
        return {
            "length": int(v.size),
            "mean": float(v.mean()) if v.size else None,
            "sd": float(v.std(ddof=1)) if v.size > 1 else None,
        }


def as_array(x) -> np.ndarray:
    if isinstance(x, TimeSeries):
        return x.values
    a = np.asarray(x, dtype=float)
    if a.ndim != 1:
        raise InputError("expected a one-dimensional sequence")
    return a


def _parse_plain(text: str) -> np.ndarray | None:
    """Bulk path for plain numeric files; ``None`` defers to the line-by-line parser."""
    if "#" in text or "," in text or '"' in text:
        return None
    tokens = text.split()
    if not tokens or len(tokens) != sum(1 for line in text.splitlines() if line.strip()):
        return None
    try:
        v = np.array(tokens, dtype=float)
    except ValueError:
        return None
    return v if np.all(np.isfinite(v)) else None


def parse_series(text: str, source: str = "<input>") -> TimeSeries:
    """Parse one real per line ('#' comments) or a single-column CSV with optional header."""
    fast = _parse_plain(text)
    if fast is not None:
        return TimeSeries(fast, {"source": source})
    values = []
    header_seen = False
    reader = csv.reader(io.StringIO(text))
    for lineno, row in enumerate(reader, start=1):
        if not row:
            continue
        cell = row[0].split("#", 1)[0].strip()
        if not cell:
            continue
        if len([c for c in row if c.strip()]) > 1:
            raise InputError(f"{source}:{lineno}: expected a single column, got {len(row)}")
        try:
            v = float(cell)
        except ValueError:
            if not values and not header_seen:
                header_seen = True
                continue
            raise InputError(f"{source}:{lineno}: cannot parse {cell!r} as a number") from None
        if not math.isfinite(v):
            raise InputError(f"{source}:{lineno}: non-finite value {cell!r}")
        values.append(v)
    if not values:
        raise InputError(f"{source}: no numeric values found")
    return TimeSeries(np.array(values), {"source": source})


def read_series(path) -> TimeSeries:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_series(text, str(path))


def aggregate(x, k: int) -> TimeSeries:
    """Sum over non-overlapping windows of length ``k``; a partial last window is dropped."""
    if k < 1:
        raise InputError("aggregation window must be >= 1")
    meta = dict(x.meta) if isinstance(x, TimeSeries) else {}
    v = as_array(x)
    m = v.size // k
    if m < 1:
        raise InputError(f"series of length {v.size} is shorter than the aggregation window {k}")
    meta["aggregate"] = k
    return TimeSeries(v[: m * k].reshape(m, k).sum(axis=1), meta)
