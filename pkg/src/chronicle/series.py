"""Chronicles (uniformly sampled series), CSV ingestion, alignment and pointwise transforms.

MISSING samples are stored as NaN.  Ingestion never lets NaN through as data,
so inside a :class:`Chronicle` a NaN always means "undefined here" (warm-up
region of a sliding estimator or a gap not yet filled).
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataQualityError, DomainError, FormatError, GridError

logger = logging.getLogger(__name__)

MISSING = float("nan")

_EPOCH = np.datetime64("1970-01-01", "D")
_CALENDARS = ("B", "D")


def is_missing(values) -> np.ndarray:
    return np.isnan(np.asarray(values, dtype=float))


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Chronicle:
    """A real-valued series on the grid ``start + k * step``, k = 0..len-1.

    ``start`` and ``step`` are in days.  For calendar data (``calendar`` is
    ``"B"`` for business days or ``"D"`` for every day) the grid time is the
    ordinal of the date in that calendar, one step per trading day, and
    ``dates`` holds the matching ``datetime64[D]`` labels.
    """

    values: np.ndarray
    label: str = "x"
    start: float = 0.0
    step: float = 1.0
    dates: np.ndarray | None = None
    calendar: str | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        object.__setattr__(self, "values", _readonly(values))
        if not (math.isfinite(self.step) and self.step > 0):
            raise GridError(f"{self.label}: step must be a positive finite number, got {self.step!r}")
        if np.isinf(values).any():
            raise DomainError(f"{self.label}: infinite sample", int(np.flatnonzero(np.isinf(values))[0]))
        if self.calendar is not None and self.calendar not in _CALENDARS:
            raise GridError(f"unknown calendar {self.calendar!r}")
        if self.dates is not None:
            dates = np.array(self.dates, dtype="datetime64[D]").reshape(-1)
            if len(dates) != len(values):
                raise GridError(f"{self.label}: {len(dates)} dates for {len(values)} values")
            if len(dates) > 1 and not (np.diff(dates) > np.timedelta64(0, "D")).all():
                raise GridError(f"{self.label}: dates are not strictly increasing")
            object.__setattr__(self, "dates", _readonly(dates))

    def __len__(self) -> int:
        return len(self.values)

    def __repr__(self) -> str:
        return (f"Chronicle(label={self.label!r}, len={len(self)}, start={self.start!r}, "
                f"step={self.step!r}, missing={int(self.missing.sum())})")

    @property
    def times(self) -> np.ndarray:
        return self.start + self.step * np.arange(len(self), dtype=float)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)

    @property
    def end(self) -> float:
        return self.start + self.step * (len(self) - 1)

    def with_values(self, values, label: str | None = None) -> Chronicle:
        """Same grid, new samples."""
        values = np.asarray(values, dtype=float)
        if values.shape != self.values.shape:
            raise GridError(f"expected {self.values.shape} samples, got {values.shape}")
        return Chronicle(values, label=self.label if label is None else label, start=self.start,
                         step=self.step, dates=self.dates, calendar=self.calendar)

    def time_labels(self) -> list[str]:
        """ISO dates when available, else the numeric grid times."""
        if self.dates is not None:
            return [str(d) for d in self.dates]
        return [_format_number(t) for t in self.times]

    def same_grid(self, other: Chronicle) -> bool:
        return (len(self) == len(other) and self.start == other.start
                and self.step == other.step and self.calendar == other.calendar)


@dataclass(frozen=True, eq=False)
class AlignedPanel:
    """Several chronicles restricted to a shared grid with no MISSING samples.

    ``columns`` has shape ``(length, n_labels)``.
    """

    labels: tuple[str, ...]
    columns: np.ndarray
    start: float = 0.0
    step: float = 1.0
    dates: np.ndarray | None = None
    calendar: str | None = None

    def __post_init__(self):
        labels = tuple(self.labels)
        object.__setattr__(self, "labels", labels)
        cols = np.array(self.columns, dtype=float)
        if cols.ndim == 1:
            cols = cols[:, None]
        if cols.ndim != 2 or cols.shape[1] != len(labels):
            raise GridError(f"columns of shape {cols.shape} do not match {len(labels)} labels")
        if np.isnan(cols).any():
            raise GridError("an aligned panel cannot hold MISSING samples")
        object.__setattr__(self, "columns", _readonly(cols))
        if self.dates is not None:
            dates = np.array(self.dates, dtype="datetime64[D]")
            if len(dates) != cols.shape[0]:
                raise GridError("dates and columns differ in length")
            object.__setattr__(self, "dates", _readonly(dates))

    def __len__(self) -> int:
        return self.columns.shape[0]

    @property
    def n_series(self) -> int:
        return self.columns.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.start + self.step * np.arange(len(self), dtype=float)

    def column(self, key: str | int) -> Chronicle:
        j = self.labels.index(key) if isinstance(key, str) else int(key)
        return Chronicle(self.columns[:, j], label=self.labels[j], start=self.start,
                         step=self.step, dates=self.dates, calendar=self.calendar)

    def chronicles(self) -> list[Chronicle]:
        return [self.column(j) for j in range(self.n_series)]

    def time_labels(self) -> list[str]:
        if self.dates is not None:
            return [str(d) for d in self.dates]
        return [_format_number(t) for t in self.times]

    def slice(self, lo: int, hi: int) -> AlignedPanel:
        """Sub-panel over rows ``lo:hi``."""
        return AlignedPanel(self.labels, self.columns[lo:hi], start=self.start + lo * self.step,
                            step=self.step, dates=None if self.dates is None else self.dates[lo:hi],
                            calendar=self.calendar)

    def equals(self, other: AlignedPanel) -> bool:
        """Exact equality of labels, grid and samples."""
        same_dates = (self.dates is None and other.dates is None) or (
            self.dates is not None and other.dates is not None
            and np.array_equal(self.dates, other.dates))
        return (self.labels == other.labels and self.start == other.start
                and self.step == other.step and self.calendar == other.calendar
                and same_dates and np.array_equal(self.columns, other.columns))


# ---------------------------------------------------------------------------
# ingestion

def _format_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _parse_date(text: str, lineno: int) -> np.datetime64:
    try:
        return np.datetime64(text.strip()[:10], "D")
    except ValueError:
        raise FormatError(f"line {lineno}: unparseable date {text!r}") from None


def _parse_value(text: str, lineno: int, column: str) -> float:
    text = text.strip()
    if text == "":
        return MISSING
    try:
        v = float(text)
    except ValueError:
        raise FormatError(f"line {lineno}: column {column!r} holds non-numeric value {text!r}") from None
    if not math.isfinite(v):
        raise FormatError(f"line {lineno}: column {column!r} holds non-finite value {text!r}")
    return v


def _read_table(path, date_column: str) -> tuple[list[str], np.ndarray, dict[str, np.ndarray]]:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if date_column not in header:
            raise FormatError(f"{path}: no {date_column!r} column in header {header}")
        di = header.index(date_column)
        names = [h for i, h in enumerate(header) if i != di]
        if not names:
            raise FormatError(f"{path}: no value column")
        dates, rows = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise FormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            dates.append(_parse_date(row[di], lineno))
            rows.append([_parse_value(c, lineno, header[i]) for i, c in enumerate(row) if i != di])
    if not dates:
        raise FormatError(f"{path}: no data rows")
    dates = np.array(dates, dtype="datetime64[D]")
    table = np.array(rows, dtype=float).reshape(len(dates), len(names))
    order = np.argsort(dates, kind="stable")
    dates, table = dates[order], table[order]
    if len(dates) > 1 and (np.diff(dates) == np.timedelta64(0, "D")).any():
        dup = dates[1:][np.diff(dates) == np.timedelta64(0, "D")][0]
        raise FormatError(f"{path}: duplicate date {dup}")
    return names, dates, {n: table[:, j] for j, n in enumerate(names)}


def _choose_calendar(dates: np.ndarray, calendar: str) -> str:
    if calendar == "auto":
        return "B" if np.is_busday(dates).all() else "D"
    if calendar not in _CALENDARS:
        raise FormatError(f"calendar must be 'auto', 'B' or 'D', got {calendar!r}")
    if calendar == "B" and not np.is_busday(dates).all():
        bad = dates[~np.is_busday(dates)][0]
        raise FormatError(f"date {bad} is not a business day")
    return calendar


def _grid(first, last, calendar: str) -> np.ndarray:
    days = np.arange(first, last + np.timedelta64(1, "D"), dtype="datetime64[D]")
    return days[np.is_busday(days)] if calendar == "B" else days


def _grid_origin(first, calendar: str) -> float:
    if calendar == "B":
        return float(np.busday_count(_EPOCH, first)) if first >= _EPOCH else -float(np.busday_count(first, _EPOCH))
    return float((first - _EPOCH).astype(int))


def _fill_gaps(values: np.ndarray, grid: np.ndarray, max_gap: int, label: str) -> tuple[np.ndarray, int]:
    """Forward-fill interior MISSING runs of at most ``max_gap`` steps."""
    values = values.copy()
    miss = np.isnan(values)
    filled = 0
    i, n = 0, len(values)
    while i < n:
        if not miss[i]:
            i += 1
            continue
        j = i
        while j < n and miss[j]:
            j += 1
        run = j - i
        if i == 0 or j == n:
            # leading/trailing runs are trimmed by the caller
            i = j
            continue
        if run > max_gap:
            raise DataQualityError(
                f"{label}: gap of {run} steps between {grid[i - 1]} and {grid[j]} exceeds max_gap={max_gap}")
        values[i:j] = values[i - 1]
        filled += run
        i = j
    return values, filled


def load_csv(path, value_column: str | None = None, *, max_gap: int = 10, calendar: str = "auto",
             date_column: str = "date", require_positive: bool = False,
             return_fill_count: bool = False):
    """Read a ``date,value`` CSV into a chronicle on a uniform trading-day grid.

    With ``calendar="auto"`` the grid is business days unless the file holds
    a weekend date, in which case every calendar day is a step.  Grid days
    absent from the file are forward-filled when the hole spans at most
    ``max_gap`` steps.
    """
    names, dates, table = _read_table(path, date_column)
    if value_column is None:
        if len(names) != 1:
            raise FormatError(f"{path}: several value columns {names}; pass value_column")
        value_column = names[0]
    if value_column not in table:
        raise FormatError(f"{path}: no column {value_column!r} (have {names})")
    raw = table[value_column]
    ok = ~np.isnan(raw)
    if not ok.any():
        raise FormatError(f"{path}: column {value_column!r} holds no values")
    dates, raw = dates[ok], raw[ok]
    cal = _choose_calendar(dates, calendar)
    grid = _grid(dates[0], dates[-1], cal)
    values = np.full(len(grid), MISSING)
    values[np.searchsorted(grid, dates)] = raw
    values, fills = _fill_gaps(values, grid, max_gap, value_column)
    if require_positive and (values <= 0).any():
        k = int(np.flatnonzero(values <= 0)[0])
        raise DomainError(f"{value_column}: nonpositive price {values[k]!r} on {grid[k]}", k)
    if fills:
        logger.info("%s: forward-filled %d missing steps", value_column, fills)
    chron = Chronicle(values, label=value_column, start=_grid_origin(grid[0], cal), step=1.0,
                      dates=grid, calendar=cal)
    return (chron, fills) if return_fill_count else chron


def load_panel_csv(path, *, max_gap: int = 10, calendar: str = "auto", date_column: str = "date",
                   return_fill_count: bool = False):
    """Read a multi-asset CSV (``date`` plus one column per label) into an aligned panel."""
    names, dates, table = _read_table(path, date_column)
    cal = _choose_calendar(dates, calendar)
    grid = _grid(dates[0], dates[-1], cal)
    pos = np.searchsorted(grid, dates)
    origin = _grid_origin(grid[0], cal)
    series, total = [], 0
    for name in names:
        values = np.full(len(grid), MISSING)
        values[pos] = table[name]
        values, fills = _fill_gaps(values, grid, max_gap, name)
        total += fills
        series.append(Chronicle(values, label=name, start=origin, step=1.0, dates=grid, calendar=cal))
    panel = align(series)
    return (panel, total) if return_fill_count else panel


# ---------------------------------------------------------------------------
# alignment

def _forward_fill(values: np.ndarray) -> np.ndarray:
    values = values.copy()
    miss = np.isnan(values)
    if miss.any():
        idx = np.where(~miss, np.arange(len(values)), 0)
        np.maximum.accumulate(idx, out=idx)
        values = values[idx]
    return values


def align(series: Sequence[Chronicle]) -> AlignedPanel:
    """Restrict chronicles to their maximal common span and forward-fill inside it.

    Each chronicle's span runs from its first to its last non-MISSING sample.
    """
    series = list(series)
    if not series:
        raise GridError("align needs at least one chronicle")
    step = series[0].step
    cal = series[0].calendar
    for s in series[1:]:
        if not math.isclose(s.step, step, rel_tol=1e-12, abs_tol=0.0):
            raise GridError(f"step mismatch: {series[0].label}={step}, {s.label}={s.step}")
        if s.calendar != cal:
            raise GridError(f"calendar mismatch: {series[0].label}={cal}, {s.label}={s.calendar}")
    firsts, lasts = [], []
    for s in series:
        ok = np.flatnonzero(~s.missing)
        if len(ok) == 0:
            raise GridError(f"{s.label}: no defined samples")
        firsts.append(s.start + ok[0] * s.step)
        lasts.append(s.start + ok[-1] * s.step)
    lo, hi = max(firsts), min(lasts)
    if hi < lo:
        raise GridError("chronicles have an empty common span")
    length = int(round((hi - lo) / step)) + 1
    cols, dates = [], None
    for s in series:
        off = (lo - s.start) / step
        k = int(round(off))
        if abs(off - k) > 1e-9:
            raise GridError(f"{s.label}: grid is offset by a fractional step from the others")
        cols.append(_forward_fill(s.values)[k:k + length])
        if dates is None and s.dates is not None:
            dates = s.dates[k:k + length]
    return AlignedPanel(tuple(s.label for s in series), np.column_stack(cols), start=lo, step=step,
                        dates=dates, calendar=cal)


# ---------------------------------------------------------------------------
# pointwise transforms

def log_transform(x: Chronicle) -> Chronicle:
    v = x.values
    bad = ~np.isnan(v) & (v <= 0)
    if bad.any():
        k = int(np.flatnonzero(bad)[0])
        raise DomainError(f"{x.label}: log of nonpositive value {v[k]!r} at index {k}", k)
    return x.with_values(np.log(v), label=f"ln {x.label}")


def exp_transform(x: Chronicle) -> Chronicle:
    return x.with_values(np.exp(x.values), label=f"exp {x.label}")


def lag(x: Chronicle, k: int) -> Chronicle:
    """``out[i] = x[i - k]`` on the same grid; samples shifted in from outside are MISSING."""
    v = np.full(len(x), MISSING)
    n = len(x)
    if 0 <= k < n:
        v[k:] = x.values[:n - k]
    elif -n < k < 0:
        v[:k] = x.values[-k:]
    return x.with_values(v)


# ---------------------------------------------------------------------------
# output

def _cell(v) -> str:
    if isinstance(v, str):
        return v
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def write_csv(path, columns: Mapping[str, Iterable], first: str = "date") -> None:
    """Write named equal-length columns; MISSING becomes an empty field.

    Floats are written with ``repr`` so reading them back is bit-exact.
    """
    names = list(columns)
    cols = [list(columns[n]) for n in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise GridError(f"columns differ in length: {dict(zip(names, map(len, cols)))}")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_cell(v) for v in row])


def to_jsonable(v):
    if isinstance(v, np.ndarray):
        return [to_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [to_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): to_jsonable(x) for k, x in v.items()}
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_json(path, obj) -> None:
    """Write ``obj`` as JSON with NaN as ``null``; keys keep insertion order."""
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(to_jsonable(obj), fh, indent=1, allow_nan=False)
        fh.write("\n")


def save_csv(x: Chronicle, path) -> None:
    """Write a chronicle in the single-series input format (``date`` + value column)."""
    write_csv(path, {"date": x.time_labels(), x.label: x.values})
