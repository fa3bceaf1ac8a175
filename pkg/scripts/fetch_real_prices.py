#!/usr/bin/env python3
"""Convert a downloaded utility price export into the canonical layout.

The bundled dataset is synthetic so the test suite runs offline. To
reproduce results against real market data, download an hourly
real-time price history, e.g.:

* Ameren Illinois "Power Smart Pricing" historical day-ahead/real-time
  hourly prices (published as daily tables in cents per kWh),
* a MISO/PJM hourly LMP export for your node ($ per MWh),

and convert it with this script. Accepted inputs:

* ``wide-cents``   one row per day: date,h00..h23 in cents/kWh
* ``wide-dollars`` one row per day: date,h00..h23 in $/kWh
* ``long-cents``   timestamp,price rows in cents/kWh
* ``long-dollars`` timestamp,price rows in $/kWh (already canonical)

The output is the long layout in $/kWh that ``peakpauser ingest``
validates. Swap it for ``src/peakpauser/data/sample_prices.csv`` or
pass it with ``--prices`` to rerun any experiment on real data.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from peakpauser.prices import parse_price_csv, serialize_price_csv  # noqa: E402
from peakpauser.prices import PricePoint, PriceSeries  # noqa: E402

LAYOUTS = ("wide-cents", "wide-dollars", "long-cents", "long-dollars")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--input", required=True, type=Path,
                        help="downloaded utility CSV")
    parser.add_argument("--layout", required=True, choices=LAYOUTS)
    parser.add_argument("--output", required=True, type=Path,
                        help="canonical long $/kWh CSV to write")
    parser.add_argument("--gap-policy", default="reject",
                        choices=("reject", "impute_hour_mean"))
    args = parser.parse_args()

    fmt = "wide" if args.layout.startswith("wide") else "long"
    series = parse_price_csv(args.input.read_bytes(), fmt=fmt,
                             gap_policy=args.gap_policy,
                             source_label=str(args.input))
    if args.layout.endswith("-cents"):
        series = PriceSeries(
            tuple(PricePoint(p.timestamp, p.price / 100.0) for p in series),
            source_label=series.source_label, imputed=series.imputed)
    args.output.write_bytes(serialize_price_csv(series))
    print(f"wrote {len(series)} hourly rows to {args.output}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
