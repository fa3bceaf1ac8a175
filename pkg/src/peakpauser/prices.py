"""Hourly electricity price ingestion, validation and summaries.

Two CSV layouts are accepted:

* long -- one row per hour, header ``timestamp,price_usd_per_kwh``,
  timestamps like ``2024-01-15T07:00``;
* wide -- one row per day, header ``date,h00,...,h23``, dates like
  ``2024-01-15``.

The long layout is the canonical interchange form and the only one
written back out. Timestamps are naive market-local times at hour
resolution; no timezone conversion is applied, and a DST fold or skip
shows up as a duplicate or a gap and is rejected. Prices are $/kWh and
may be negative (real-time markets clear below zero on occasion);
NaN and infinities are rejected.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta
from enum import Enum

import numpy as np

from .errors import DataFormatError, GapError

HOURS_PER_DAY = 24
ONE_HOUR = timedelta(hours=1)

LONG_HEADER = ("timestamp", "price_usd_per_kwh")
WIDE_HEADER = ("date",) + tuple(f"h{h:02d}" for h in range(HOURS_PER_DAY))


class CsvFormat(str, Enum):
    LONG = "long"
    WIDE = "wide"


class GapPolicy(str, Enum):
    REJECT = "reject"
    IMPUTE_HOUR_MEAN = "impute_hour_mean"


def floor_to_hour(ts: datetime) -> datetime:
    return ts.replace(minute=0, second=0, microsecond=0)


def _check_hour_aligned(ts: datetime) -> None:
    if ts.tzinfo is not None:
        raise ValueError(f"timestamp {ts.isoformat()} must be naive market-local time")
    if ts.minute or ts.second or ts.microsecond:
        raise ValueError(f"timestamp {ts.isoformat()} is not hour-aligned")


@dataclass(frozen=True)
class PricePoint:
    """One hour of market price in $/kWh."""

    timestamp: datetime
    price: float

    def __post_init__(self):
        _check_hour_aligned(self.timestamp)
        if not math.isfinite(self.price):
            raise ValueError(f"price at {self.timestamp.isoformat()} is not finite")


@dataclass(frozen=True)
class PriceSeries:
    """Strictly increasing hourly price points.

    Unless ``gap_tolerant`` is set, consecutive points must be exactly
    one hour apart. Equality compares the points only; provenance
    fields are ignored.
    """

    points: tuple[PricePoint, ...]
    source_label: str = field(default="", compare=False)
    imputed: tuple[datetime, ...] = field(default=(), compare=False)
    gap_tolerant: bool = field(default=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        for prev, cur in zip(self.points, self.points[1:]):
            delta = cur.timestamp - prev.timestamp
            if delta <= timedelta(0):
                raise ValueError(
                    f"timestamps not strictly increasing at {cur.timestamp.isoformat()}")
            if not self.gap_tolerant and delta != ONE_HOUR:
                raise ValueError(
                    f"gap of {delta} before {cur.timestamp.isoformat()}; "
                    "series must be contiguous")

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def start(self) -> datetime:
        return self.points[0].timestamp

    @property
    def end(self) -> datetime:
        """Exclusive end: one hour past the last point."""
        return self.points[-1].timestamp + ONE_HOUR

    def prices(self) -> np.ndarray:
        return np.array([p.price for p in self.points])

    def slice(self, window: tuple[datetime, datetime]) -> "PriceSeries":
        """Points with ``start <= timestamp < end`` for a half-open window."""
        start, end = window
        picked = tuple(p for p in self.points if start <= p.timestamp < end)
        return PriceSeries(picked, source_label=self.source_label,
                           gap_tolerant=self.gap_tolerant)

    def price_lookup(self) -> dict[datetime, float]:
        return {p.timestamp: p.price for p in self.points}

    def days(self) -> dict[date, tuple[PricePoint, ...]]:
        """Points grouped by calendar date, in series order."""
        grouped: dict[date, list[PricePoint]] = {}
        for p in self.points:
            grouped.setdefault(p.timestamp.date(), []).append(p)
        return {d: tuple(v) for d, v in grouped.items()}

    def complete_days(self) -> dict[date, tuple[PricePoint, ...]]:
        return {d: pts for d, pts in self.days().items() if len(pts) == HOURS_PER_DAY}


@dataclass(frozen=True)
class HourlyProfile:
    """Mean price and sample count per hour-of-day (0..23)."""

    mean_price_by_hour: tuple[float, ...]
    sample_count_by_hour: tuple[int, ...]

    def __post_init__(self):
        if len(self.mean_price_by_hour) != HOURS_PER_DAY:
            raise ValueError("profile needs exactly 24 hourly means")
        if len(self.sample_count_by_hour) != HOURS_PER_DAY:
            raise ValueError("profile needs exactly 24 sample counts")
        if not all(math.isfinite(m) for m in self.mean_price_by_hour):
            raise ValueError("hourly means must be finite")
        if any(c < 0 for c in self.sample_count_by_hour):
            raise ValueError("sample counts must be non-negative")


def _decode(data: bytes | str) -> str:
    if isinstance(data, str):
        return data
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"not valid UTF-8: {exc}") from None


def _parse_hour_timestamp(cell: str, line: int) -> datetime:
    try:
        ts = datetime.fromisoformat(cell.strip())
    except ValueError:
        raise DataFormatError(f"bad timestamp {cell.strip()!r}", line=line) from None
    try:
        _check_hour_aligned(ts)
    except ValueError as exc:
        raise DataFormatError(str(exc), line=line) from None
    return ts


def _parse_price(cell: str, line: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataFormatError(f"bad price {cell.strip()!r}", line=line) from None
    if not math.isfinite(value):
        raise DataFormatError(f"non-finite price {cell.strip()!r}", line=line)
    return value


def parse_price_csv(data: bytes | str,
                    fmt: CsvFormat | str = CsvFormat.LONG,
                    gap_policy: GapPolicy | str = GapPolicy.REJECT,
                    source_label: str = "") -> PriceSeries:
    """Parse one of the two supported layouts into a canonical series.

    Malformed rows raise :class:`DataFormatError` carrying the 1-based
    line number. Missing hours raise :class:`GapError` under ``reject``;
    under ``impute_hour_mean`` each missing hour is filled with the mean
    of that hour-of-day over the rest of the file and recorded in the
    returned series' ``imputed`` field.
    """
    fmt = CsvFormat(fmt)
    gap_policy = GapPolicy(gap_policy)
    rows = list(csv.reader(io.StringIO(_decode(data))))

    entries: dict[datetime, float] = {}
    lines: dict[datetime, int] = {}
    declared_missing: set[datetime] = set()

    header_seen = False
    expected_header = LONG_HEADER if fmt is CsvFormat.LONG else WIDE_HEADER
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        cells = [c.strip() for c in row]
        if not header_seen:
            if tuple(cells) != expected_header:
                raise DataFormatError(
                    f"expected header {','.join(expected_header)!r}, got {','.join(cells)!r}",
                    line=lineno)
            header_seen = True
            continue
        if fmt is CsvFormat.LONG:
            if len(cells) != 2:
                raise DataFormatError(f"expected 2 columns, got {len(cells)}", line=lineno)
            ts = _parse_hour_timestamp(cells[0], lineno)
            _record_entry(entries, lines, ts, _parse_price(cells[1], lineno), lineno)
        else:
            if len(cells) != 1 + HOURS_PER_DAY:
                raise DataFormatError(
                    f"expected {1 + HOURS_PER_DAY} columns, got {len(cells)}", line=lineno)
            try:
                day = date.fromisoformat(cells[0])
            except ValueError:
                raise DataFormatError(f"bad date {cells[0]!r}", line=lineno) from None
            for hour, cell in enumerate(cells[1:]):
                ts = datetime.combine(day, time(hour))
                if not cell:
                    declared_missing.add(ts)
                    continue
                _record_entry(entries, lines, ts, _parse_price(cell, lineno), lineno)

    if not header_seen:
        raise DataFormatError("empty file")
    if not entries:
        raise DataFormatError("no data rows")

    ordered = sorted(entries)
    missing_set = declared_missing - set(entries)
    cursor = ordered[0]
    while cursor < ordered[-1]:
        if cursor not in entries:
            missing_set.add(cursor)
        cursor += ONE_HOUR
    missing = sorted(missing_set)

    if missing:
        if gap_policy is GapPolicy.REJECT:
            extra = f" (and {len(missing) - 1} more)" if len(missing) > 1 else ""
            raise GapError(f"missing hour {missing[0].isoformat()}{extra}",
                           missing=missing[0])
        by_hour: dict[int, list[float]] = {}
        for ts, price in entries.items():
            by_hour.setdefault(ts.hour, []).append(price)
        for ts in missing:
            samples = by_hour.get(ts.hour)
            if not samples:
                raise GapError(
                    f"cannot impute {ts.isoformat()}: no samples for hour {ts.hour:02d}",
                    missing=ts)
            entries[ts] = sum(samples) / len(samples)

    points = tuple(PricePoint(ts, entries[ts]) for ts in sorted(entries))
    return PriceSeries(points, source_label=source_label, imputed=tuple(missing))


def _record_entry(entries, lines, ts, price, lineno):
    if ts in entries:
        raise DataFormatError(f"duplicate timestamp {ts.isoformat()} "
                              f"(first seen on line {lines[ts]})", line=lineno)
    entries[ts] = price
    lines[ts] = lineno


def serialize_price_csv(series: PriceSeries) -> bytes:
    """Emit the canonical long layout; floats round-trip exactly."""
    out = ["timestamp,price_usd_per_kwh"]
    for p in series.points:
        out.append(f"{p.timestamp:%Y-%m-%dT%H:00},{p.price!r}")
    return ("\n".join(out) + "\n").encode("utf-8")


def hourly_profile(series: PriceSeries,
                   window: tuple[datetime, datetime] | None = None) -> HourlyProfile:
    """Mean price per hour-of-day over an optional half-open window.

    Every hour-of-day must have at least one sample in the window.
    """
    pts = series.points if window is None else series.slice(window).points
    if not pts:
        raise ValueError("window selects no price points")
    sums = [0.0] * HOURS_PER_DAY
    counts = [0] * HOURS_PER_DAY
    for p in pts:
        sums[p.timestamp.hour] += p.price
        counts[p.timestamp.hour] += 1
    for hour, count in enumerate(counts):
        if count == 0:
            raise ValueError(f"no samples for hour {hour:02d} in window")
    means = tuple(s / c for s, c in zip(sums, counts))
    return HourlyProfile(means, tuple(counts))


def peak_hour_histogram(series: PriceSeries, top_k: int) -> tuple[int, ...]:
    """How often each hour-of-day ranks among a day's ``top_k`` prices.

    Requires complete days. Per-day ties are broken in favour of the
    earlier hour, so the result is deterministic.
    """
    if not 1 <= top_k <= HOURS_PER_DAY:
        raise ValueError(f"top_k must be in 1..{HOURS_PER_DAY}, got {top_k}")
    counts = [0] * HOURS_PER_DAY
    for day, pts in series.days().items():
        if len(pts) != HOURS_PER_DAY:
            raise DataFormatError(f"incomplete day {day.isoformat()}: {len(pts)} hours")
        ranked = sorted(pts, key=lambda p: (-p.price, p.timestamp.hour))
        for p in ranked[:top_k]:
            counts[p.timestamp.hour] += 1
    return tuple(counts)
