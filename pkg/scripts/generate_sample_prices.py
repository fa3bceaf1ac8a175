#!/usr/bin/env python3
"""Regenerate the bundled synthetic hourly price dataset.

The series mimics a Midwest real-time tariff: a broad afternoon peak
around 15:00, a small morning shoulder, softer weekends, mild seasonal
drift and a few negative overnight clearings. Everything is driven by
a fixed seed, so the output is reproducible byte for byte.

Output: src/peakpauser/data/sample_prices.csv (canonical long layout,
2024-01-01 through 2024-04-30, 121 days x 24 hours = 2904 rows).
"""

from __future__ import annotations

import math
from datetime import date, timedelta
from pathlib import Path

import numpy as np

START = date(2024, 1, 1)
DAYS = 121
SEED = 20240101

OUT = Path(__file__).resolve().parent.parent / "src" / "peakpauser" / "data" / "sample_prices.csv"


def hour_shape(hour: int) -> float:
    """Mean $/kWh by hour-of-day: afternoon bell plus a morning shoulder."""
    afternoon = 0.013 * math.exp(-(((hour - 14.6) / 3.0) ** 2))
    morning = 0.003 * math.exp(-(((hour - 8.0) / 2.5) ** 2))
    return 0.024 + afternoon + morning


def main() -> None:
    rng = np.random.default_rng(SEED)
    dip_days = set(rng.choice(DAYS, size=3, replace=False).tolist())
    lines = ["timestamp,price_usd_per_kwh"]
    for d in range(DAYS):
        day = START + timedelta(days=d)
        weekend = 0.90 if day.weekday() >= 5 else 1.0
        seasonal = 1.0 + 0.06 * math.cos(2.0 * math.pi * (d - 15) / DAYS)
        for hour in range(24):
            price = hour_shape(hour) * weekend * seasonal
            price *= 1.0 + 0.10 * rng.standard_normal()
            if d in dip_days and hour in (3, 4):
                price = -rng.uniform(0.0005, 0.0020)
            lines.append(f"{day.isoformat()}T{hour:02d}:00,{round(price, 5)!r}")
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")

    hourly = np.array([float(line.split(",")[1]) for line in lines[1:]]).reshape(DAYS, 24)
    means = hourly.mean(axis=0)
    top4 = sorted(np.argsort(-means)[:4].tolist())
    print(f"wrote {len(lines) - 1} rows to {OUT}")
    print(f"mean price {means.mean():.5f} $/kWh; top-4 mean hours: {top4}")


if __name__ == "__main__":
    main()
