"""Selection of the statistically most expensive hours of the day.

A policy is trained once on a window of historical prices: average the
price of each hour-of-day over the window, sort descending and keep the
first ``n``, where ``n = ceil(downtime_ratio * 24)``. At runtime the
only question is membership of the current hour in that set.
"""

from __future__ import annotations

import calendar
import json
import math
from dataclasses import dataclass, field
from datetime import date, datetime

from .errors import DataFormatError
from .prices import HOURS_PER_DAY, HourlyProfile, PriceSeries, hourly_profile


def hours_to_pause(downtime_ratio: float) -> int:
    """n = ceil(downtime_ratio * 24), guarded against float fuzz."""
    if not 0.0 <= downtime_ratio <= 1.0:
        raise ValueError(f"downtime_ratio must be in [0, 1], got {downtime_ratio}")
    return math.ceil(round(downtime_ratio * HOURS_PER_DAY, 9))


@dataclass(frozen=True)
class ExpensiveHourPolicy:
    """The hours-of-day a scheduler should spend paused."""

    downtime_ratio: float
    n: int
    expensive_hours: frozenset[int]
    trained_on: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "expensive_hours", frozenset(self.expensive_hours))
        expected = hours_to_pause(self.downtime_ratio)
        if self.n != expected:
            raise ValueError(f"n={self.n} inconsistent with downtime_ratio="
                             f"{self.downtime_ratio} (expected {expected})")
        if len(self.expensive_hours) != self.n:
            raise ValueError(f"policy needs exactly {self.n} hours, "
                             f"got {len(self.expensive_hours)}")
        if any(not 0 <= h < HOURS_PER_DAY for h in self.expensive_hours):
            raise ValueError("expensive hours must be in 0..23")

    def to_dict(self) -> dict:
        return {
            "downtime_ratio": self.downtime_ratio,
            "n": self.n,
            "expensive_hours": sorted(self.expensive_hours),
            "trained_on": self.trained_on,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> "ExpensiveHourPolicy":
        try:
            return cls(downtime_ratio=float(raw["downtime_ratio"]),
                       n=int(raw["n"]),
                       expensive_hours=frozenset(int(h) for h in raw["expensive_hours"]),
                       trained_on=str(raw.get("trained_on", "")))
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"bad policy document: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "ExpensiveHourPolicy":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"bad policy JSON: {exc}") from None
        return cls.from_dict(raw)


def find_expensive_hours(profile: HourlyProfile, downtime_ratio: float,
                         trained_on: str = "") -> ExpensiveHourPolicy:
    """Pick the n hours with the largest mean price; earlier hour wins ties."""
    n = hours_to_pause(downtime_ratio)
    means = profile.mean_price_by_hour
    ranked = sorted(range(HOURS_PER_DAY), key=lambda h: (-means[h], h))
    return ExpensiveHourPolicy(downtime_ratio=downtime_ratio, n=n,
                               expensive_hours=frozenset(ranked[:n]),
                               trained_on=trained_on)


def is_expensive(policy: ExpensiveHourPolicy, now: datetime) -> bool:
    """True iff the hour-of-day of ``now`` is in the policy; minutes ignored."""
    return now.hour in policy.expensive_hours


def default_history_window(target_day: date) -> tuple[datetime, datetime]:
    """The 3 calendar months preceding (non-inclusive) the target day."""
    year, month = target_day.year, target_day.month - 3
    if month < 1:
        month += 12
        year -= 1
    day = min(target_day.day, calendar.monthrange(year, month)[1])
    start = datetime(year, month, day)
    return start, datetime.combine(target_day, datetime.min.time())


def daily_retrained_policies(series: PriceSeries, downtime_ratio: float
                             ) -> dict[date, ExpensiveHourPolicy]:
    """Optional rolling training: one policy per day in the series.

    Each day's policy is trained on the default 3-month window
    preceding it; days without full hour-of-day coverage in their
    window are skipped. The scheduler's default remains a single
    static policy per experiment.
    """
    out: dict[date, ExpensiveHourPolicy] = {}
    for day in series.days():
        window = default_history_window(day)
        try:
            profile = hourly_profile(series, window)
        except ValueError:
            continue
        out[day] = find_expensive_hours(
            profile, downtime_ratio,
            trained_on=f"{window[0].isoformat()}..{window[1].isoformat()}")
    return out


@dataclass(frozen=True)
class OracleComparison:
    """Prediction error against the per-day hindsight optimum."""

    rmse: float
    relative_error: float


def evaluate_vs_oracle(history: PriceSeries, test: PriceSeries,
                       downtime_ratio: float) -> OracleComparison:
    """Score a fixed trained policy against an a-priori daily oracle.

    For each complete test day, the policy's expensive-hour price sum is
    compared with the sum over that day's true n most expensive hours;
    the gap is never negative. Returns the RMSE of the gaps and the RMSE
    relative to the mean oracle sum.
    """
    policy = find_expensive_hours(hourly_profile(history), downtime_ratio)
    n = policy.n
    gaps = []
    opt_sums = []
    for day, pts in test.days().items():
        if len(pts) != HOURS_PER_DAY:
            raise DataFormatError(f"incomplete day {day.isoformat()}: {len(pts)} hours")
        s_pred = sum(p.price for p in pts
                     if p.timestamp.hour in policy.expensive_hours)
        s_opt = sum(sorted((p.price for p in pts), reverse=True)[:n])
        gaps.append(s_opt - s_pred)
        opt_sums.append(s_opt)
    if not gaps:
        raise ValueError("test series has no days")
    rmse = math.sqrt(sum(g * g for g in gaps) / len(gaps))
    mean_opt = sum(opt_sums) / len(opt_sums)
    if mean_opt == 0.0:
        relative = 0.0 if rmse == 0.0 else math.inf
    else:
        relative = rmse / mean_opt
    return OracleComparison(rmse=rmse, relative_error=relative)
