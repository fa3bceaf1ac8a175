"""Energy/cost integration, savings comparison and emission charge-backs.

Integration is the left rectangle rule over a uniformly sampled power
trace: each sample contributes ``P * delta`` watt-hours of energy and
``P/1000 * delta * price(hour)`` dollars, where ``delta`` is the sample
interval in hours and ``price(hour)`` the $/kWh price of the hour the
sample falls in. Units throughout: power W, prices $/kWh, energy kWh.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import datetime, timedelta

import numpy as np

from . import _kernels
from .errors import CoverageError, DataFormatError
from .power import (DEFAULT_SAMPLE_INTERVAL, PowerTrace, ScheduleMask,
                    ServerPowerModel, synthesize_trace)
from .predictor import ExpensiveHourPolicy
from .prices import HOURS_PER_DAY, ONE_HOUR, PriceSeries, floor_to_hour
from .scheduling import mask_from_policy

KG_PER_LB = 0.45359237
HOURS_PER_YEAR = 8760.0


def cef_lb_per_mwh_to_kg_per_kwh(value: float) -> float:
    """Convert a lb/MWh emission factor (the unit utility filings use)."""
    return value * KG_PER_LB / 1000.0


@dataclass(frozen=True)
class EnergyCostResult:
    """Integrated energy and cost over one trace interval."""

    energy_kwh: float
    cost_usd: float
    start: datetime
    end: datetime
    samples_used: int

    def __post_init__(self):
        if self.samples_used < 1:
            raise ValueError("integration needs at least one sample")

    @property
    def hours(self) -> float:
        return (self.end - self.start).total_seconds() / 3600.0

    def to_dict(self) -> dict:
        return {
            "energy_kwh": self.energy_kwh,
            "cost_usd": self.cost_usd,
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
            "samples_used": self.samples_used,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "EnergyCostResult":
        try:
            return cls(energy_kwh=float(raw["energy_kwh"]),
                       cost_usd=float(raw["cost_usd"]),
                       start=datetime.fromisoformat(raw["start"]),
                       end=datetime.fromisoformat(raw["end"]),
                       samples_used=int(raw["samples_used"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"bad energy/cost document: {exc}") from None


@dataclass(frozen=True)
class SavingsReport:
    """Baseline vs scheduled energy, cost, availability and CPU time."""

    baseline: EnergyCostResult
    scheduled: EnergyCostResult
    energy_savings: float
    cost_savings: float
    availability: float
    cpu_time_lost: float

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline.to_dict(),
            "scheduled": self.scheduled.to_dict(),
            "energy_savings": self.energy_savings,
            "cost_savings": self.cost_savings,
            "availability": self.availability,
            "cpu_time_lost": self.cpu_time_lost,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> "SavingsReport":
        try:
            return cls(baseline=EnergyCostResult.from_dict(raw["baseline"]),
                       scheduled=EnergyCostResult.from_dict(raw["scheduled"]),
                       energy_savings=float(raw["energy_savings"]),
                       cost_savings=float(raw["cost_savings"]),
                       availability=float(raw["availability"]),
                       cpu_time_lost=float(raw["cpu_time_lost"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"bad savings report: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "SavingsReport":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"bad savings report JSON: {exc}") from None
        return cls.from_dict(raw)


@dataclass(frozen=True)
class EmissionParams:
    """Carbon emission factor (kg CO2e per kWh) and facility PUE."""

    cef_kg_per_kwh: float
    pue: float

    def __post_init__(self):
        if self.cef_kg_per_kwh <= 0:
            raise ValueError("cef must be positive")
        if self.pue < 1.0:
            raise ValueError("pue must be >= 1")


@dataclass(frozen=True)
class GreenSlaQuote:
    """Terms a provider could offer for reduced-availability instances."""

    availability: float
    hourly_price_usd: float
    annual_chargeback_kg: float
    chargeback_delta_vs_normal_kg: float

    def to_json(self) -> str:
        return json.dumps({
            "availability": self.availability,
            "hourly_price_usd": self.hourly_price_usd,
            "annual_chargeback_kg": self.annual_chargeback_kg,
            "chargeback_delta_vs_normal_kg": self.chargeback_delta_vs_normal_kg,
        }, indent=2) + "\n"


def integrate_cost(trace: PowerTrace, prices: PriceSeries) -> EnergyCostResult:
    """Left-rectangle energy and cost of a trace under hourly prices.

    Every hour the trace touches must be present in the price series.
    """
    base = floor_to_hour(trace.start)
    offset = (trace.start - base).total_seconds()
    n = len(trace)
    hour_count = int((offset + (n - 1) * trace.sample_interval) // 3600.0) + 1
    lookup = prices.price_lookup()
    price_by_hour = np.empty(hour_count)
    for k in range(hour_count):
        hour = base + k * ONE_HOUR
        try:
            price_by_hour[k] = lookup[hour]
        except KeyError:
            raise CoverageError(f"no price for hour {hour.isoformat()}") from None
    energy_kwh, cost_usd = _kernels.integrate_hourly_prices(
        trace.samples, price_by_hour, offset, trace.sample_interval)
    return EnergyCostResult(energy_kwh=energy_kwh, cost_usd=cost_usd,
                            start=trace.start, end=trace.end, samples_used=n)


def _savings(baseline: EnergyCostResult, scheduled: EnergyCostResult,
             availability: float, cpu_time_lost: float) -> SavingsReport:
    if baseline.energy_kwh == 0:
        raise ValueError("baseline energy is zero; savings undefined")
    if baseline.cost_usd == 0:
        raise ValueError("baseline cost is zero; savings undefined")
    return SavingsReport(
        baseline=baseline,
        scheduled=scheduled,
        energy_savings=1.0 - scheduled.energy_kwh / baseline.energy_kwh,
        cost_savings=1.0 - scheduled.cost_usd / baseline.cost_usd,
        availability=availability,
        cpu_time_lost=cpu_time_lost,
    )


def compare(model: ServerPowerModel, policy: ExpensiveHourPolicy,
            prices: PriceSeries, interval: tuple[datetime, datetime],
            sample_interval: float = DEFAULT_SAMPLE_INTERVAL) -> SavingsReport:
    """Savings of running the pause schedule vs always-on.

    Both traces are synthesized from the same model and seed, so they
    share their noise wherever both run unpaused and the difference is
    the schedule, not the noise.
    """
    start, end = interval
    duration = end - start
    if duration <= timedelta(0):
        raise ValueError("interval end must be after start")
    scheduled_mask = mask_from_policy(policy, start, duration, sample_interval)
    baseline_mask = ScheduleMask(start, sample_interval,
                                 np.zeros(len(scheduled_mask), dtype=bool))
    baseline = integrate_cost(synthesize_trace(model, baseline_mask), prices)
    scheduled = integrate_cost(synthesize_trace(model, scheduled_mask), prices)
    availability = 1.0 - scheduled_mask.paused_samples / len(scheduled_mask)
    return _savings(baseline, scheduled, availability, policy.n / HOURS_PER_DAY)


def compare_traces(baseline_trace: PowerTrace, scheduled_trace: PowerTrace,
                   prices: PriceSeries,
                   policy: ExpensiveHourPolicy) -> SavingsReport:
    """Savings from two measured traces (e.g. wattmeter exports)."""
    return _savings(integrate_cost(baseline_trace, prices),
                    integrate_cost(scheduled_trace, prices),
                    availability=1.0 - policy.n / HOURS_PER_DAY,
                    cpu_time_lost=policy.n / HOURS_PER_DAY)


@dataclass(frozen=True)
class SavingsTable:
    """Sweep of savings over idle ratios (rows) x peak powers (columns)."""

    peak_powers: tuple[float, ...]
    idle_ratios: tuple[float, ...]
    reports: tuple[tuple[SavingsReport, ...], ...]  # [idle][peak]

    def cell(self, idle_ratio: float, peak_power: float) -> SavingsReport:
        i = self.idle_ratios.index(idle_ratio)
        j = self.peak_powers.index(peak_power)
        return self.reports[i][j]

    def to_csv(self) -> str:
        header = (["idle_ratio"]
                  + [f"energy_savings_pct_{p:g}W" for p in self.peak_powers]
                  + [f"cost_savings_pct_{p:g}W" for p in self.peak_powers])
        lines = [",".join(header)]
        for ratio, row in zip(self.idle_ratios, self.reports):
            cells = [f"{ratio:g}"]
            cells += [f"{100.0 * rep.energy_savings:.4f}" for rep in row]
            cells += [f"{100.0 * rep.cost_savings:.4f}" for rep in row]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({
            "peak_powers_w": list(self.peak_powers),
            "idle_ratios": list(self.idle_ratios),
            "energy_savings": [[rep.energy_savings for rep in row]
                               for row in self.reports],
            "cost_savings": [[rep.cost_savings for rep in row]
                             for row in self.reports],
        }, indent=2) + "\n"


def savings_table(peak_powers, idle_ratios, policy: ExpensiveHourPolicy,
                  prices: PriceSeries, interval: tuple[datetime, datetime],
                  noise_sigma: float = 0.0, seed: int = 0,
                  sample_interval: float = DEFAULT_SAMPLE_INTERVAL) -> SavingsTable:
    """Run ``compare`` per (idle_ratio, peak_power) cell.

    Each cell gets its own derived seed so cells stay independent and
    could be evaluated in parallel.
    """
    peak_powers = tuple(float(p) for p in peak_powers)
    idle_ratios = tuple(float(r) for r in idle_ratios)
    if not peak_powers or not idle_ratios:
        raise ValueError("need at least one peak power and one idle ratio")
    rows = []
    for i, ratio in enumerate(idle_ratios):
        row = []
        for j, peak in enumerate(peak_powers):
            model = ServerPowerModel(peak_power=peak, idle_ratio=ratio,
                                     noise_sigma=noise_sigma,
                                     seed=seed + i * len(peak_powers) + j)
            row.append(compare(model, policy, prices, interval, sample_interval))
        rows.append(tuple(row))
    return SavingsTable(peak_powers, idle_ratios, tuple(rows))


def environmental_chargeback(energy_kwh: float, params: EmissionParams) -> float:
    """kg CO2e attributed to consuming ``energy_kwh``: CEF * PUE * energy."""
    if energy_kwh < 0:
        raise ValueError("energy must be non-negative")
    return params.cef_kg_per_kwh * params.pue * energy_kwh


def floor_to_mills(price: float) -> float:
    """Round a $ amount down to the nearest $0.001 (float-fuzz guarded)."""
    return math.floor(round(price * 1000.0, 6)) / 1000.0


def sla_quote(normal_hourly_price: float, report: SavingsReport,
              params: EmissionParams,
              annual_hours: float = HOURS_PER_YEAR) -> GreenSlaQuote:
    """Terms for the reduced-availability instance class.

    The hourly price applies the report's cost savings to the normal
    price, floored to the nearest $0.001. Charge-backs scale the
    report's integrated energies up to ``annual_hours``.
    """
    if normal_hourly_price < 0:
        raise ValueError("normal hourly price must be non-negative")
    if annual_hours <= 0:
        raise ValueError("annual hours must be positive")
    scale = annual_hours / report.scheduled.hours
    green = environmental_chargeback(report.scheduled.energy_kwh * scale, params)
    normal = environmental_chargeback(report.baseline.energy_kwh * scale, params)
    return GreenSlaQuote(
        availability=report.availability,
        hourly_price_usd=floor_to_mills(normal_hourly_price * (1.0 - report.cost_savings)),
        annual_chargeback_kg=green,
        chargeback_delta_vs_normal_kg=normal - green,
    )
