"""Bundled sample data.

``sample_prices.csv`` is a synthetic 4-month hourly price series in the
canonical long layout: afternoon-peaked like a Midwest real-time tariff,
with softer weekends and a few negative overnight clearings. It exists
so every test and CLI walkthrough runs offline; regenerate it with
``scripts/generate_sample_prices.py`` and substitute real utility data
with ``scripts/fetch_real_prices.py``.
"""

from importlib import resources
from pathlib import Path

from ..prices import PriceSeries, parse_price_csv


def sample_prices_path() -> Path:
    """Filesystem path of the bundled price dataset."""
    return Path(str(resources.files(__package__).joinpath("sample_prices.csv")))


def load_sample_prices() -> PriceSeries:
    data = resources.files(__package__).joinpath("sample_prices.csv").read_bytes()
    return parse_price_csv(data, source_label="bundled sample dataset")
