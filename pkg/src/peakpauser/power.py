"""Server power traces: synthesis, smoothing and CSV round-trips.

Synthetic traces oscillate normally around two levels: the server's
peak power while instances execute, and ``idle_ratio * peak`` while
they are paused. Draws are clamped at 0 W and fully determined by the
model seed, so a baseline (never paused) and a scheduled trace built
from the same model share their noise wherever both are unpaused.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta

import numpy as np

from . import _kernels
from .errors import DataFormatError

DEFAULT_SAMPLE_INTERVAL = 5.0  # seconds
DEFAULT_NOISE_SIGMA = 2.0  # watts; calibration choice, not a measured value

TRACE_HEADER = ("timestamp", "power_w")


@dataclass(frozen=True)
class ServerPowerModel:
    """Energy elasticity of one server."""

    peak_power: float
    idle_ratio: float
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    seed: int = 0

    def __post_init__(self):
        if not (self.peak_power > 0 and math.isfinite(self.peak_power)):
            raise ValueError(f"peak_power must be positive, got {self.peak_power}")
        if not 0.0 <= self.idle_ratio <= 1.0:
            raise ValueError(f"idle_ratio must be in [0, 1], got {self.idle_ratio}")
        if not (self.noise_sigma >= 0 and math.isfinite(self.noise_sigma)):
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    @property
    def idle_power(self) -> float:
        return self.idle_ratio * self.peak_power


def _freeze_array(obj, name: str, values, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=dtype)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D array")
    arr.setflags(write=False)
    object.__setattr__(obj, name, arr)
    return arr


def _check_timing(start: datetime, sample_interval: float) -> None:
    if start.tzinfo is not None:
        raise ValueError("start must be a naive market-local datetime")
    if not (sample_interval > 0 and math.isfinite(sample_interval)):
        raise ValueError(f"sample_interval must be positive, got {sample_interval}")


@dataclass(frozen=True, eq=False)
class PowerTrace:
    """Uniformly sampled active power in watts."""

    start: datetime
    sample_interval: float  # seconds
    samples: np.ndarray
    label: str = field(default="")

    def __post_init__(self):
        _check_timing(self.start, self.sample_interval)
        arr = _freeze_array(self, "samples", self.samples, np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("samples must be finite")
        if np.any(arr < 0):
            raise ValueError("samples must be non-negative")

    def __len__(self) -> int:
        return int(self.samples.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PowerTrace):
            return NotImplemented
        return (self.start == other.start
                and self.sample_interval == other.sample_interval
                and np.array_equal(self.samples, other.samples))

    @property
    def end(self) -> datetime:
        return self.start + timedelta(seconds=self.sample_interval * len(self))

    @property
    def duration_hours(self) -> float:
        return self.sample_interval * len(self) / 3600.0

    def timestamps(self) -> list[datetime]:
        step_us = _interval_microseconds(self.sample_interval)
        return [self.start + timedelta(microseconds=i * step_us)
                for i in range(len(self))]


@dataclass(frozen=True, eq=False)
class ScheduleMask:
    """Per-sample paused flags aligned with a trace's timing."""

    start: datetime
    sample_interval: float
    flags: np.ndarray

    def __post_init__(self):
        _check_timing(self.start, self.sample_interval)
        _freeze_array(self, "flags", self.flags, np.bool_)

    def __len__(self) -> int:
        return int(self.flags.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScheduleMask):
            return NotImplemented
        return (self.start == other.start
                and self.sample_interval == other.sample_interval
                and np.array_equal(self.flags, other.flags))

    @property
    def paused_samples(self) -> int:
        return int(self.flags.sum())

    @property
    def paused_hours(self) -> float:
        return self.paused_samples * self.sample_interval / 3600.0


def synthesize_trace(model: ServerPowerModel, mask: ScheduleMask) -> PowerTrace:
    """Normal draws around peak (running) or idle (paused) power.

    Sample i ~ N(mean_i, noise_sigma) clamped at 0 W, where mean_i is
    ``idle_power`` when mask.flags[i] else ``peak_power``. Bit-identical
    for identical seed and inputs.
    """
    rng = np.random.default_rng(model.seed)
    z = rng.standard_normal(len(mask))
    samples = _kernels.two_level_gauss(mask.flags, z, model.peak_power,
                                       model.idle_power, model.noise_sigma)
    label = (f"synthetic peak={model.peak_power:g}W idle_ratio={model.idle_ratio:g} "
             f"sigma={model.noise_sigma:g}W seed={model.seed}")
    return PowerTrace(mask.start, mask.sample_interval, samples, label=label)


def ewma_smooth(trace: PowerTrace, alpha: float) -> PowerTrace:
    """Exponentially weighted moving average for reporting.

    out[0] = in[0]; out[i] = alpha*in[i] + (1-alpha)*out[i-1]. Timing
    metadata is preserved. Accounting must always use the raw trace.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    smoothed = _kernels.ewma(trace.samples, alpha)
    label = f"{trace.label} ewma(alpha={alpha:g})" if trace.label else f"ewma(alpha={alpha:g})"
    return PowerTrace(trace.start, trace.sample_interval, smoothed, label=label)


def _interval_microseconds(sample_interval: float) -> int:
    step_us = round(sample_interval * 1_000_000)
    if step_us <= 0 or abs(step_us - sample_interval * 1_000_000) > 1e-6:
        raise ValueError("sample_interval must be a whole number of microseconds "
                         f"for timestamp materialisation, got {sample_interval}")
    return step_us


def save_trace_csv(trace: PowerTrace) -> bytes:
    """Serialize as ``timestamp,power_w`` rows; floats round-trip exactly."""
    step_us = _interval_microseconds(trace.sample_interval)
    whole_seconds = step_us % 1_000_000 == 0 and trace.start.microsecond == 0
    spec = "seconds" if whole_seconds else "microseconds"
    out = [",".join(TRACE_HEADER)]
    for i, value in enumerate(trace.samples.tolist()):
        ts = trace.start + timedelta(microseconds=i * step_us)
        out.append(f"{ts.isoformat(timespec=spec)},{value!r}")
    return ("\n".join(out) + "\n").encode("utf-8")


def load_trace_csv(data: bytes | str, label: str = "") -> PowerTrace:
    """Parse a trace CSV; sampling must be uniform."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    rows = list(csv.reader(io.StringIO(text)))
    stamps: list[datetime] = []
    values: list[float] = []
    header_seen = False
    for lineno, row in enumerate(rows, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        cells = [c.strip() for c in row]
        if not header_seen:
            if tuple(cells) != TRACE_HEADER:
                raise DataFormatError(
                    f"expected header {','.join(TRACE_HEADER)!r}, got {','.join(cells)!r}",
                    line=lineno)
            header_seen = True
            continue
        if len(cells) != 2:
            raise DataFormatError(f"expected 2 columns, got {len(cells)}", line=lineno)
        try:
            ts = datetime.fromisoformat(cells[0])
        except ValueError:
            raise DataFormatError(f"bad timestamp {cells[0]!r}", line=lineno) from None
        try:
            value = float(cells[1])
        except ValueError:
            raise DataFormatError(f"bad power value {cells[1]!r}", line=lineno) from None
        if not math.isfinite(value) or value < 0:
            raise DataFormatError(f"power must be finite and >= 0, got {cells[1]!r}",
                                  line=lineno)
        stamps.append(ts)
        values.append(value)
    if not header_seen:
        raise DataFormatError("empty file")
    if len(values) < 2:
        raise DataFormatError("need at least 2 samples to establish the sample interval")
    step = stamps[1] - stamps[0]
    if step <= timedelta(0):
        raise DataFormatError(f"timestamps not increasing at {stamps[1].isoformat()}")
    for i in range(2, len(stamps)):
        gap = stamps[i] - stamps[i - 1]
        if gap != step:
            raise DataFormatError(
                f"non-uniform sampling at {stamps[i].isoformat()}: "
                f"gap {gap.total_seconds():g}s, expected {step.total_seconds():g}s")
    return PowerTrace(stamps[0], step.total_seconds(), np.asarray(values),
                      label=label or "loaded")
