"""Command line surface: ingest -> predict -> simulate -> report -> sla.

Every subcommand is deterministic given its flags and --seed. Exit
codes: 0 success, 1 validation error (bad data or parameters), 2
usage/IO/runtime error. A JSON ExperimentConfig can supply any value
via --config; explicit flags win.
"""

from __future__ import annotations

import functools
import json
from dataclasses import dataclass, fields as dc_fields
from datetime import date, datetime, timedelta
from pathlib import Path

import click

from . import __version__
from .accounting import (EmissionParams, SavingsReport,
                         cef_lb_per_mwh_to_kg_per_kwh, compare, compare_traces,
                         savings_table, sla_quote)
from .errors import ClockError, DataFormatError, PeakPauserError
from .power import (DEFAULT_NOISE_SIGMA, DEFAULT_SAMPLE_INTERVAL,
                    ServerPowerModel, ewma_smooth, load_trace_csv,
                    save_trace_csv, synthesize_trace)
from .predictor import (ExpensiveHourPolicy, default_history_window,
                        evaluate_vs_oracle, find_expensive_hours)
from .prices import (hourly_profile, parse_price_csv, peak_hour_histogram,
                     serialize_price_csv)
from .scheduling import (EventKind, MockController, SchedulerState,
                         SimulatedClock, events_to_jsonl, mask_from_policy,
                         run_loop)


class _RuntimeFailure(click.ClickException):
    exit_code = 2


def _friendly_errors(f):
    @functools.wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except click.ClickException:
            raise
        except (ClockError, OSError) as exc:
            raise _RuntimeFailure(str(exc)) from exc
        except (PeakPauserError, ValueError) as exc:
            raise click.ClickException(str(exc)) from exc
    return wrapper


@dataclass
class ExperimentConfig:
    """Values a --config JSON file may provide instead of flags."""

    prices: Path | None = None
    format: str | None = None
    gap_policy: str | None = None
    window: str | None = None
    target_day: str | None = None
    downtime_ratio: float | None = None
    peak_powers: list[float] | None = None
    idle_ratios: list[float] | None = None
    noise_sigma: float | None = None
    seed: int | None = None
    sample_interval: float | None = None
    start: str | None = None
    duration_hours: float | None = None
    instances: list[str] | None = None
    cef_lb_per_mwh: float | None = None
    pue: float | None = None
    normal_hourly_price: float | None = None
    annual_hours: float | None = None
    output_dir: Path | None = None

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        if path is None:
            return cls()
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"bad config JSON: {exc}") from None
        known = {f.name for f in dc_fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise DataFormatError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        # paths in a config file are relative to the config file
        if cfg.prices is not None:
            cfg.prices = path.parent / cfg.prices
        if cfg.output_dir is not None:
            cfg.output_dir = path.parent / cfg.output_dir
        for name in ("peak_powers", "idle_ratios", "instances"):
            value = getattr(cfg, name)
            if value is not None and not isinstance(value, list):
                raise DataFormatError(f"config key {name!r} must be a list")
        return cfg


def _pick(*values, default=None):
    for v in values:
        if v is not None:
            return v
    return default


def _required(name, *values):
    value = _pick(*values)
    if value is None:
        raise click.UsageError(f"missing {name}")
    return value


def _read_bytes(path: Path) -> bytes:
    return Path(path).read_bytes()


def _read_text(path: Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _parse_dt(text: str) -> datetime:
    try:
        return datetime.fromisoformat(str(text))
    except ValueError:
        raise ValueError(f"bad date-time {text!r} (want ISO format)") from None


def _parse_window(text: str) -> tuple[datetime, datetime]:
    parts = str(text).split("..")
    if len(parts) != 2:
        raise ValueError(f"bad window {text!r} (want START..END)")
    start, end = _parse_dt(parts[0]), _parse_dt(parts[1])
    if end <= start:
        raise ValueError(f"window end {parts[1]} is not after start {parts[0]}")
    return start, end


def _parse_float_list(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(v) for v in str(value).split(",") if v.strip()]


def _parse_str_list(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _emit(text: str, output: Path | None, what: str) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"wrote {what} to {output}")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def main():
    """Electricity-price-aware VM pause scheduling toolkit."""


@main.command()
@click.option("--prices", "prices_path", type=Path, help="Input price CSV.")
@click.option("--format", "fmt", type=click.Choice(["long", "wide"]),
              help="Input layout (default: long).")
@click.option("--gap-policy", type=click.Choice(["reject", "impute_hour_mean"]),
              help="Missing-hour handling (default: reject).")
@click.option("--output", "-o", "output", type=Path,
              help="Canonical long CSV to write (default: <input>.long.csv).")
@click.option("--profile-out", type=Path,
              help="Also export the mean price per hour-of-day as CSV.")
@click.option("--histogram-out", type=Path,
              help="Also export the peak-hour histogram as CSV.")
@click.option("--top-k", type=int, default=4, show_default=True,
              help="Per-day rank cutoff for --histogram-out.")
@click.option("--config", "config_path", type=Path, help="ExperimentConfig JSON.")
@_friendly_errors
def ingest(prices_path, fmt, gap_policy, output, profile_out, histogram_out,
           top_k, config_path):
    """Validate a price file and emit the canonical long-form CSV."""
    cfg = ExperimentConfig.load(config_path)
    prices_path = Path(_required("--prices", prices_path, cfg.prices))
    series = parse_price_csv(
        _read_bytes(prices_path),
        fmt=_pick(fmt, cfg.format, default="long"),
        gap_policy=_pick(gap_policy, cfg.gap_policy, default="reject"),
        source_label=str(prices_path))
    output = Path(output) if output is not None else prices_path.with_suffix(".long.csv")
    output.write_bytes(serialize_price_csv(series))
    days = series.days()
    complete = sum(1 for pts in days.values() if len(pts) == 24)
    values = series.prices()
    covered = len({p.timestamp.hour for p in series})
    click.echo(f"wrote {len(series)} rows to {output}")
    click.echo(f"days: {len(days)} (complete {complete})")
    click.echo(f"hour coverage: {covered}/24")
    click.echo(f"price $/kWh: mean {values.mean():.6g} "
               f"min {values.min():.6g} max {values.max():.6g}")
    if series.imputed:
        click.echo(f"imputed hours: {len(series.imputed)}")
    if profile_out is not None:
        profile = hourly_profile(series)
        lines = ["hour,mean_price_usd_per_kwh,samples"]
        lines += [f"{h},{m!r},{c}" for h, (m, c)
                  in enumerate(zip(profile.mean_price_by_hour,
                                   profile.sample_count_by_hour))]
        Path(profile_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        click.echo(f"wrote hourly profile to {profile_out}")
    if histogram_out is not None:
        counts = peak_hour_histogram(series, top_k)
        lines = [f"hour,days_in_top_{top_k}"]
        lines += [f"{h},{c}" for h, c in enumerate(counts)]
        Path(histogram_out).write_text("\n".join(lines) + "\n", encoding="utf-8")
        click.echo(f"wrote peak-hour histogram to {histogram_out}")


@main.command()
@click.option("--prices", "prices_path", type=Path, help="Historical price CSV.")
@click.option("--format", "fmt", type=click.Choice(["long", "wide"]))
@click.option("--gap-policy", type=click.Choice(["reject", "impute_hour_mean"]))
@click.option("--window", "window_text",
              help="Training window START..END (half-open).")
@click.option("--target-day", "target_day_text",
              help="Train on the 3 calendar months before this day.")
@click.option("--downtime-ratio", type=float,
              help="Fraction of the day to pause, in [0, 1].")
@click.option("--evaluate", "evaluate_text",
              help="Held-out window START..END to score against the daily oracle.")
@click.option("--output", "-o", "output", type=Path, default=Path("policy.json"),
              show_default=True, help="Policy JSON to write.")
@click.option("--config", "config_path", type=Path, help="ExperimentConfig JSON.")
@_friendly_errors
def predict(prices_path, fmt, gap_policy, window_text, target_day_text,
            downtime_ratio, evaluate_text, output, config_path):
    """Train an expensive-hour policy from historical prices."""
    cfg = ExperimentConfig.load(config_path)
    prices_path = Path(_required("--prices", prices_path, cfg.prices))
    ratio = float(_required("--downtime-ratio", downtime_ratio, cfg.downtime_ratio))
    series = parse_price_csv(
        _read_bytes(prices_path),
        fmt=_pick(fmt, cfg.format, default="long"),
        gap_policy=_pick(gap_policy, cfg.gap_policy, default="reject"),
        source_label=str(prices_path))
    window_text = _pick(window_text, cfg.window)
    target_day_text = _pick(target_day_text, cfg.target_day)
    if window_text and target_day_text:
        raise click.UsageError("use --window or --target-day, not both")
    if window_text:
        window = _parse_window(window_text)
    elif target_day_text:
        window = default_history_window(date.fromisoformat(target_day_text))
    else:
        window = None
    profile = hourly_profile(series, window)
    span = (f"{window[0].isoformat()}..{window[1].isoformat()}" if window
            else f"{series.start.isoformat()}..{series.end.isoformat()}")
    samples = sum(profile.sample_count_by_hour)
    policy = find_expensive_hours(profile, ratio,
                                  trained_on=f"{span} ({samples} hourly samples)")
    Path(output).write_text(policy.to_json(), encoding="utf-8")
    click.echo(f"wrote policy ({policy.n} hours: "
               f"{sorted(policy.expensive_hours)}) to {output}")
    if evaluate_text:
        test = series.slice(_parse_window(evaluate_text))
        history = series.slice(window) if window else series
        scored = evaluate_vs_oracle(history, test, ratio)
        click.echo(f"oracle rmse: {scored.rmse:.6g} $/kWh "
                   f"(relative {100.0 * scored.relative_error:.3f}%)")


@main.command()
@click.option("--policy", "policy_path", type=Path, help="Policy JSON from predict.")
@click.option("--peak-power", type=float, help="Watts at full load (default 200).")
@click.option("--idle-ratio", type=float, help="Idle/peak power ratio (default 0).")
@click.option("--noise-sigma", type=float,
              help=f"Gaussian noise in watts (default {DEFAULT_NOISE_SIGMA:g}).")
@click.option("--seed", type=int, help="RNG seed (default 0).")
@click.option("--interval", type=float,
              help=f"Sample interval in seconds (default {DEFAULT_SAMPLE_INTERVAL:g}).")
@click.option("--duration", type=float, help="Simulated hours (default 24).")
@click.option("--start", "start_text", help="Start date-time (default 2024-01-01T00:00).")
@click.option("--instances", "instances_text",
              help="Comma-separated instance ids (default green-0).")
@click.option("--output-dir", type=Path, help="Directory for trace.csv and events.jsonl.")
@click.option("--config", "config_path", type=Path, help="ExperimentConfig JSON.")
@_friendly_errors
def simulate(policy_path, peak_power, idle_ratio, noise_sigma, seed, interval,
             duration, start_text, instances_text, output_dir, config_path):
    """Synthesize a scheduled power trace and the pause/unpause event log."""
    cfg = ExperimentConfig.load(config_path)
    policy_path = Path(_required("--policy", policy_path))
    policy = ExpensiveHourPolicy.from_json(_read_text(policy_path))
    cfg_peak = cfg.peak_powers[0] if cfg.peak_powers else None
    cfg_idle = cfg.idle_ratios[0] if cfg.idle_ratios else None
    model = ServerPowerModel(
        peak_power=float(_pick(peak_power, cfg_peak, default=200.0)),
        idle_ratio=float(_pick(idle_ratio, cfg_idle, default=0.0)),
        noise_sigma=float(_pick(noise_sigma, cfg.noise_sigma,
                                default=DEFAULT_NOISE_SIGMA)),
        seed=int(_pick(seed, cfg.seed, default=0)))
    sample_interval = float(_pick(interval, cfg.sample_interval,
                                  default=DEFAULT_SAMPLE_INTERVAL))
    start = _parse_dt(_pick(start_text, cfg.start, default="2024-01-01T00:00"))
    hours = float(_pick(duration, cfg.duration_hours, default=24.0))
    ids = _parse_str_list(_pick(instances_text, cfg.instances, default="green-0"))
    out_dir = Path(_pick(output_dir, cfg.output_dir, default="."))

    mask = mask_from_policy(policy, start, timedelta(hours=hours), sample_interval)
    trace = synthesize_trace(model, mask)
    state = SchedulerState.initial(policy, ids)
    _, events = run_loop(state, MockController(ids), SimulatedClock(start),
                         start + timedelta(hours=hours))

    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "trace.csv"
    events_path = out_dir / "events.jsonl"
    trace_path.write_bytes(save_trace_csv(trace))
    events_path.write_text(events_to_jsonl(events), encoding="utf-8")
    transitions = sum(1 for e in events if e.kind is not EventKind.NOOP)
    click.echo(f"simulated {hours:g} h at {sample_interval:g} s sampling: "
               f"{len(trace)} samples, {transitions} transitions")
    click.echo(f"trace: {trace_path}")
    click.echo(f"events: {events_path}")


@main.command()
@click.option("--prices", "prices_path", type=Path, help="Price CSV covering the interval.")
@click.option("--format", "fmt", type=click.Choice(["long", "wide"]))
@click.option("--gap-policy", type=click.Choice(["reject", "impute_hour_mean"]))
@click.option("--policy", "policy_path", type=Path, help="Policy JSON from predict.")
@click.option("--trace", "trace_path", type=Path,
              help="Measured scheduled trace CSV (needs --baseline-trace).")
@click.option("--baseline-trace", "baseline_path", type=Path,
              help="Measured always-on trace CSV.")
@click.option("--peak-power", "peak_text",
              help="Peak watts, comma-separated for a sweep (default 200).")
@click.option("--idle-ratio", "idle_text",
              help="Idle ratios, comma-separated for a sweep (default 0).")
@click.option("--noise-sigma", type=float,
              help="Gaussian noise in watts (default 0: reports are noiseless).")
@click.option("--seed", type=int, help="RNG seed (default 0).")
@click.option("--interval", type=float,
              help=f"Sample interval in seconds (default {DEFAULT_SAMPLE_INTERVAL:g}).")
@click.option("--start", "start_text",
              help="Interval start (default: first priced hour).")
@click.option("--duration", type=float, help="Interval length in hours (default 24).")
@click.option("--table", is_flag=True, help="Emit the sweep as CSV instead of JSON.")
@click.option("--output", "-o", "output", type=Path, help="Write instead of stdout.")
@click.option("--smoothed-out", "smoothed_out", type=Path,
              help="Also export the EWMA-smoothed scheduled trace CSV.")
@click.option("--alpha", type=float, default=0.1, show_default=True,
              help="EWMA smoothing factor for --smoothed-out.")
@click.option("--config", "config_path", type=Path, help="ExperimentConfig JSON.")
@_friendly_errors
def report(prices_path, fmt, gap_policy, policy_path, trace_path, baseline_path,
           peak_text, idle_text, noise_sigma, seed, interval, start_text,
           duration, table, output, smoothed_out, alpha, config_path):
    """Savings report for a model sweep or a pair of measured traces."""
    cfg = ExperimentConfig.load(config_path)
    prices_path = Path(_required("--prices", prices_path, cfg.prices))
    policy_path = Path(_required("--policy", policy_path))
    series = parse_price_csv(
        _read_bytes(prices_path),
        fmt=_pick(fmt, cfg.format, default="long"),
        gap_policy=_pick(gap_policy, cfg.gap_policy, default="reject"),
        source_label=str(prices_path))
    policy = ExpensiveHourPolicy.from_json(_read_text(policy_path))

    if (trace_path is None) != (baseline_path is None):
        raise click.UsageError("--trace and --baseline-trace go together")

    smoothed_source = None
    if trace_path is not None:
        scheduled = load_trace_csv(_read_bytes(trace_path), label=str(trace_path))
        baseline = load_trace_csv(_read_bytes(baseline_path), label=str(baseline_path))
        result = compare_traces(baseline, scheduled, series, policy)
        _emit(result.to_json(), output, "report")
        smoothed_source = scheduled
    else:
        peaks = _parse_float_list(_pick(peak_text, cfg.peak_powers, default="200"))
        idles = _parse_float_list(_pick(idle_text, cfg.idle_ratios, default="0"))
        sigma = float(_pick(noise_sigma, cfg.noise_sigma, default=0.0))
        seed = int(_pick(seed, cfg.seed, default=0))
        sample_interval = float(_pick(interval, cfg.sample_interval,
                                      default=DEFAULT_SAMPLE_INTERVAL))
        start_value = _pick(start_text, cfg.start)
        start = _parse_dt(start_value) if start_value is not None else series.start
        hours = float(_pick(duration, cfg.duration_hours, default=24.0))
        window = (start, start + timedelta(hours=hours))
        if table or len(peaks) > 1 or len(idles) > 1:
            sweep = savings_table(peaks, idles, policy, series, window,
                                  noise_sigma=sigma, seed=seed,
                                  sample_interval=sample_interval)
            _emit(sweep.to_csv() if table else sweep.to_json(), output, "sweep")
        else:
            model = ServerPowerModel(peaks[0], idles[0], sigma, seed)
            result = compare(model, policy, series, window, sample_interval)
            _emit(result.to_json(), output, "report")
        if smoothed_out is not None:
            model = ServerPowerModel(peaks[0], idles[0], sigma, seed)
            mask = mask_from_policy(policy, start, timedelta(hours=hours),
                                    sample_interval)
            smoothed_source = synthesize_trace(model, mask)

    if smoothed_out is not None:
        smoothed = ewma_smooth(smoothed_source, alpha)
        Path(smoothed_out).write_bytes(save_trace_csv(smoothed))
        click.echo(f"wrote smoothed trace to {smoothed_out}")


@main.command()
@click.option("--report", "report_path", type=Path, help="SavingsReport JSON.")
@click.option("--normal-price", type=float, help="Normal instance price, $/h.")
@click.option("--cef", type=float,
              help="Carbon emission factor in lb/MWh (default 1537.82).")
@click.option("--pue", type=float, help="Power usage effectiveness (default 1.3).")
@click.option("--annual-hours", type=float, help="Hours per year (default 8760).")
@click.option("--output", "-o", "output", type=Path, help="Write instead of stdout.")
@click.option("--config", "config_path", type=Path, help="ExperimentConfig JSON.")
@_friendly_errors
def sla(report_path, normal_price, cef, pue, annual_hours, output, config_path):
    """Quote green-instance terms from a savings report."""
    cfg = ExperimentConfig.load(config_path)
    report_path = Path(_required("--report", report_path))
    normal_price = float(_required("--normal-price", normal_price,
                                   cfg.normal_hourly_price))
    cef_lb = float(_pick(cef, cfg.cef_lb_per_mwh, default=1537.82))
    params = EmissionParams(cef_kg_per_kwh=cef_lb_per_mwh_to_kg_per_kwh(cef_lb),
                            pue=float(_pick(pue, cfg.pue, default=1.3)))
    result = SavingsReport.from_json(_read_text(report_path))
    quote = sla_quote(normal_price, result, params,
                      annual_hours=float(_pick(annual_hours, cfg.annual_hours,
                                               default=8760.0)))
    _emit(quote.to_json(), output, "SLA quote")


if __name__ == "__main__":
    main()
