"""Closing-price ingestion, gap filling and return computation.

Prices come from a UTF-8 CSV with a header row (default columns ``date`` and
``close``). Empty close cells are treated as missing and can be filled with
:func:`clean` before converting to daily returns.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FetchError, NetworkError, ParseError, ValidationError

__all__ = [
    "PriceSeries",
    "ReturnSeries",
    "CsvSchema",
    "CLEANING_POLICIES",
    "parse_csv_text",
    "load_csv",
    "fetch_csv_url",
    "clean",
    "count_missing",
    "daily_returns",
    "interval_return",
    "net_return",
]

CLEANING_POLICIES = ("forward_fill", "ma5")


@dataclass(frozen=True)
class CsvSchema:
    date: str = "date"
    close: str = "close"


@dataclass(frozen=True)
class PriceSeries:
    """Closing prices indexed by ISO-8601 date strings.

    Missing closes are stored as NaN.
    """

    dates: tuple[str, ...]
    closes: np.ndarray

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=np.float64)
        if closes.ndim != 1 or len(closes) != len(self.dates):
            raise ValidationError("dates and closes must be 1-D and equally long")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise ValidationError(f"dates must be strictly increasing ({prev} >= {cur})")
        closes.setflags(write=False)
        object.__setattr__(self, "closes", closes)

    def __len__(self) -> int:
        return len(self.dates)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return self.dates == other.dates and np.array_equal(
            self.closes, other.closes, equal_nan=True
        )


@dataclass(frozen=True)
class ReturnSeries:
    """Daily simple returns; ``dates[k]`` is the day the return was realised."""

    dates: tuple[str, ...]
    returns: np.ndarray

    def __post_init__(self):
        returns = np.asarray(self.returns, dtype=np.float64)
        if returns.ndim != 1 or len(returns) != len(self.dates):
            raise ValidationError("dates and returns must be 1-D and equally long")
        if not np.all(np.isfinite(returns)):
            raise ValidationError("returns must be finite")
        returns.setflags(write=False)
        object.__setattr__(self, "returns", returns)

    def __len__(self) -> int:
        return len(self.returns)


def _as_schema(schema) -> CsvSchema:
    if schema is None:
        return CsvSchema()
    if isinstance(schema, CsvSchema):
        return schema
    date_col, close_col = schema
    return CsvSchema(date_col, close_col)


def parse_csv_text(text: str, schema=None, source: str | None = None) -> PriceSeries:
    """Parse CSV text into a date-sorted :class:`PriceSeries`.

    Raises
    ------
    ParseError
        A row has an invalid date or a non-numeric close; carries the line number.
    ValidationError
        Empty input, missing columns, or duplicate dates.
    """
    schema = _as_schema(schema)
    if text.startswith("﻿"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValidationError(f"{source or 'input'}: empty CSV") from None
    header = [h.strip() for h in header]
    try:
        di = header.index(schema.date)
        ci = header.index(schema.close)
    except ValueError:
        raise ValidationError(
            f"{source or 'input'}: header must contain columns "
            f"{schema.date!r} and {schema.close!r}, got {header}"
        ) from None

    rows: dict[str, float] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) <= max(di, ci):
            raise ParseError(f"expected at least {max(di, ci) + 1} fields", lineno, source)
        raw_date = row[di].strip()
        try:
            date = dt.date.fromisoformat(raw_date).isoformat()
        except ValueError:
            raise ParseError(f"invalid date {raw_date!r}", lineno, source) from None
        raw_close = row[ci].strip()
        if raw_close == "":
            close = math.nan
        else:
            try:
                close = float(raw_close)
            except ValueError:
                raise ParseError(f"invalid close {raw_close!r}", lineno, source) from None
            if not math.isfinite(close):
                raise ParseError(f"non-finite close {raw_close!r}", lineno, source)
        if date in rows:
            raise ValidationError(f"{source or 'input'}: duplicate date {date} (line {lineno})")
        rows[date] = close

    if not rows:
        raise ValidationError(f"{source or 'input'}: CSV has no data rows")
    dates = tuple(sorted(rows))
    return PriceSeries(dates, np.array([rows[d] for d in dates]))


def load_csv(path, schema=None) -> PriceSeries:
    """Read a price CSV from disk. See :func:`parse_csv_text`."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        text = fh.read()
    return parse_csv_text(text, schema, source=str(path))


def fetch_csv_url(url: str, schema=None, timeout: float = 30.0) -> PriceSeries:
    """GET ``url`` and parse the body exactly like :func:`load_csv`."""
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            status = resp.status
            body = resp.read()
    except urllib.error.HTTPError as exc:
        raise FetchError(f"GET {url} returned HTTP {exc.code}", status=exc.code) from exc
    except (urllib.error.URLError, OSError) as exc:
        reason = getattr(exc, "reason", exc)
        raise NetworkError(f"GET {url} failed: {reason}") from exc
    if not 200 <= status < 300:
        raise FetchError(f"GET {url} returned HTTP {status}", status=status)
    try:
        text = body.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FetchError(f"GET {url}: body is not UTF-8 text", status=status) from exc
    try:
        return parse_csv_text(text, schema, source=url)
    except ParseError:
        raise
    except ValidationError as exc:
        raise FetchError(f"GET {url}: body is not a price CSV ({exc})", status=status) from exc


def count_missing(series: PriceSeries) -> tuple[int, int]:
    """Return ``(leading, interior)`` counts of missing closes."""
    missing = np.isnan(series.closes)
    if missing.all():
        return len(missing), 0
    first = int(np.argmin(missing))
    return first, int(missing[first:].sum())


def clean(series: PriceSeries, policy: str = "forward_fill") -> PriceSeries:
    """Fill missing closes.

    ``forward_fill`` copies the most recent prior close. ``ma5`` uses the mean
    of up to five prior observed (non-missing) closes. Leading missing values
    have no prior data and are dropped.
    """
    if policy not in CLEANING_POLICIES:
        raise ValidationError(f"unknown cleaning policy {policy!r}")
    if len(series) == 0:
        raise ValidationError("cannot clean an empty series")
    closes = series.closes
    missing = np.isnan(closes)
    if missing.all():
        raise ValidationError("all closes are missing")
    first = int(np.argmin(missing))
    dates = series.dates[first:]
    src = closes[first:]
    out = src.copy()
    observed: list[float] = []
    for k, value in enumerate(src):
        if not math.isnan(value):
            observed.append(value)
            continue
        if policy == "forward_fill":
            out[k] = out[k - 1]
        else:
            out[k] = float(np.mean(observed[-5:]))
    return PriceSeries(dates, out)


def daily_returns(series: PriceSeries) -> ReturnSeries:
    """Simple close-to-close returns ``(c[t] - c[t-1]) / c[t-1]``."""
    closes = series.closes
    if len(closes) < 2:
        raise ValidationError("need at least 2 closes to compute returns")
    if np.isnan(closes).any():
        raise ValidationError("series has missing closes; run clean() first")
    if (closes <= 0).any():
        bad = int(np.argmax(closes <= 0))
        raise ValidationError(f"close on {series.dates[bad]} is not positive ({closes[bad]})")
    returns = (closes[1:] - closes[:-1]) / closes[:-1]
    return ReturnSeries(series.dates[1:], returns)


def interval_return(window: Sequence[float]) -> float:
    """Growth factor over a window: the product of ``1 + r``.

    A flat window gives 1.0; use :func:`net_return` for the product minus one.
    """
    arr = np.asarray(window, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("interval_return of an empty window")
    growth = 1.0 + arr
    if (growth <= 0).any():
        raise ValidationError("every 1 + R must be positive")
    result = 1.0
    for g in growth:
        result *= float(g)
    return result


def net_return(window: Sequence[float]) -> float:
    return interval_return(window) - 1.0
