from __future__ import annotations

from datetime import datetime, timedelta

import pytest

from peakpauser.prices import PricePoint, PriceSeries

START = datetime(2024, 1, 1)


def make_series(values, start=START, label="test") -> PriceSeries:
    """Contiguous hourly series from a list of prices."""
    points = tuple(PricePoint(start + timedelta(hours=i), float(v))
                   for i, v in enumerate(values))
    return PriceSeries(points, source_label=label)


def daily_series(pattern, days, start=START, label="test") -> PriceSeries:
    """Repeat a 24-value hour-of-day pattern over whole days."""
    assert len(pattern) == 24
    return make_series(list(pattern) * days, start=start, label=label)


@pytest.fixture(scope="session")
def sample_series():
    from peakpauser.data import load_sample_prices
    return load_sample_prices()
