"""End-to-end CLI behaviour via click's test runner."""

import json
from datetime import datetime, timedelta

import pytest
from click.testing import CliRunner

from conftest import START, daily_series, make_series
from peakpauser.cli import main
from peakpauser.data import sample_prices_path
from peakpauser.power import load_trace_csv
from peakpauser.predictor import ExpensiveHourPolicy
from peakpauser.prices import serialize_price_csv
from peakpauser.scheduling import EventKind, events_from_jsonl


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def flat_prices(tmp_path):
    path = tmp_path / "flat.csv"
    path.write_bytes(serialize_price_csv(daily_series([0.03] * 24, days=3)))
    return path


@pytest.fixture()
def policy_file(tmp_path):
    policy = ExpensiveHourPolicy(4 / 24, 4, frozenset({13, 14, 15, 16}))
    path = tmp_path / "policy.json"
    path.write_text(policy.to_json())
    return path


WIDE_HEADER = "date," + ",".join(f"h{h:02d}" for h in range(24))


# ------------------------------------------------------------- ingest

def test_ingest_wide_becomes_canonical_long(runner, tmp_path):
    wide = tmp_path / "wide.csv"
    rows = [WIDE_HEADER]
    for day in ("2024-03-01", "2024-03-02"):
        rows.append(day + "," + ",".join("0.03" for _ in range(24)))
    wide.write_text("\n".join(rows) + "\n")
    out = tmp_path / "long.csv"
    result = runner.invoke(main, ["ingest", "--prices", str(wide),
                                  "--format", "wide", "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert "wrote 48 rows" in result.output
    assert "hour coverage: 24/24" in result.output
    text = out.read_text()
    assert text.startswith("timestamp,price_usd_per_kwh\n2024-03-01T00:00,0.03\n")


def test_ingest_gap_rejected_exit_1_names_hour(runner, tmp_path):
    series = daily_series([0.03] * 24, days=1)
    lines = serialize_price_csv(series).decode().splitlines()
    del lines[8]  # drop hour 7
    gapped = tmp_path / "gapped.csv"
    gapped.write_text("\n".join(lines) + "\n")
    result = runner.invoke(main, ["ingest", "--prices", str(gapped)])
    assert result.exit_code == 1
    assert "2024-01-01T07:00" in result.output


def test_ingest_imputes_when_asked(runner, tmp_path):
    series = daily_series([0.03] * 24, days=2)
    lines = serialize_price_csv(series).decode().splitlines()
    del lines[8]
    gapped = tmp_path / "gapped.csv"
    gapped.write_text("\n".join(lines) + "\n")
    result = runner.invoke(main, ["ingest", "--prices", str(gapped),
                                  "--gap-policy", "impute_hour_mean"])
    assert result.exit_code == 0, result.output
    assert "imputed hours: 1" in result.output


def test_ingest_bundled_dataset_summary(runner, tmp_path):
    out = tmp_path / "canonical.csv"
    result = runner.invoke(main, ["ingest", "--prices", str(sample_prices_path()),
                                  "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert "wrote 2904 rows" in result.output
    assert "days: 121 (complete 121)" in result.output
    assert "hour coverage: 24/24" in result.output


def test_ingest_missing_file_is_io_error(runner, tmp_path):
    result = runner.invoke(main, ["ingest", "--prices", str(tmp_path / "nope.csv")])
    assert result.exit_code == 2


def test_ingest_exports_profile_and_histogram(runner, tmp_path):
    out = tmp_path / "c.csv"
    profile = tmp_path / "profile.csv"
    histogram = tmp_path / "hist.csv"
    result = runner.invoke(main, ["ingest", "--prices", str(sample_prices_path()),
                                  "--output", str(out),
                                  "--profile-out", str(profile),
                                  "--histogram-out", str(histogram)])
    assert result.exit_code == 0, result.output
    profile_lines = profile.read_text().splitlines()
    assert profile_lines[0] == "hour,mean_price_usd_per_kwh,samples"
    assert len(profile_lines) == 25
    means = [float(line.split(",")[1]) for line in profile_lines[1:]]
    assert max(range(24), key=lambda h: means[h]) in (14, 15)  # afternoon peak
    hist_lines = histogram.read_text().splitlines()
    assert hist_lines[0] == "hour,days_in_top_4"
    counts = [int(line.split(",")[1]) for line in hist_lines[1:]]
    assert sum(counts) == 4 * 121


# ------------------------------------------------------------- predict

def test_predict_ratio_016_yields_4_hours(runner, tmp_path):
    out = tmp_path / "policy.json"
    result = runner.invoke(main, ["predict", "--prices", str(sample_prices_path()),
                                  "--window", "2024-01-01..2024-04-01",
                                  "--downtime-ratio", "0.16",
                                  "--output", str(out)])
    assert result.exit_code == 0, result.output
    policy = ExpensiveHourPolicy.from_json(out.read_text())
    assert policy.n == 4
    assert sorted(policy.expensive_hours) == [13, 14, 15, 16]
    assert "2024-01-01" in policy.trained_on


def test_predict_zero_ratio_empty_policy(runner, tmp_path, flat_prices):
    out = tmp_path / "policy.json"
    result = runner.invoke(main, ["predict", "--prices", str(flat_prices),
                                  "--downtime-ratio", "0", "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert ExpensiveHourPolicy.from_json(out.read_text()).expensive_hours == frozenset()


def test_predict_evaluate_prints_rmse(runner, tmp_path):
    out = tmp_path / "policy.json"
    result = runner.invoke(main, ["predict", "--prices", str(sample_prices_path()),
                                  "--window", "2024-01-01..2024-04-01",
                                  "--downtime-ratio", "0.16",
                                  "--evaluate", "2024-04-01..2024-05-01",
                                  "--output", str(out)])
    assert result.exit_code == 0, result.output
    line = next(ln for ln in result.output.splitlines() if "oracle rmse" in ln)
    rmse = float(line.split("rmse:")[1].split("$/kWh")[0])
    assert rmse >= 0.0


def test_predict_target_day_uses_three_prior_months(runner, tmp_path):
    out = tmp_path / "policy.json"
    result = runner.invoke(main, ["predict", "--prices", str(sample_prices_path()),
                                  "--target-day", "2024-04-01",
                                  "--downtime-ratio", "0.16",
                                  "--output", str(out)])
    assert result.exit_code == 0, result.output
    policy = ExpensiveHourPolicy.from_json(out.read_text())
    assert policy.trained_on.startswith("2024-01-01T00:00:00..2024-04-01T00:00:00")


def test_predict_bad_ratio_exit_1(runner, flat_prices, tmp_path):
    result = runner.invoke(main, ["predict", "--prices", str(flat_prices),
                                  "--downtime-ratio", "1.5",
                                  "--output", str(tmp_path / "p.json")])
    assert result.exit_code == 1


# ------------------------------------------------------------- simulate

def test_simulate_writes_trace_and_events(runner, tmp_path, policy_file):
    outdir = tmp_path / "run"
    result = runner.invoke(main, ["simulate", "--policy", str(policy_file),
                                  "--noise-sigma", "0", "--interval", "300",
                                  "--duration", "24", "--output-dir", str(outdir)])
    assert result.exit_code == 0, result.output
    events = events_from_jsonl((outdir / "events.jsonl").read_text())
    active = [e for e in events if e.kind is not EventKind.NOOP]
    assert [e.kind for e in active] == [EventKind.PAUSE_ALL, EventKind.UNPAUSE_ALL]
    trace = load_trace_csv((outdir / "trace.csv").read_bytes())
    assert len(trace) == 288
    assert set(trace.samples.tolist()) == {0.0, 200.0}  # noiseless two-valued


def test_simulate_same_seed_byte_identical(runner, tmp_path, policy_file):
    a, b = tmp_path / "a", tmp_path / "b"
    for outdir in (a, b):
        result = runner.invoke(main, ["simulate", "--policy", str(policy_file),
                                      "--seed", "42", "--interval", "60",
                                      "--duration", "6",
                                      "--output-dir", str(outdir)])
        assert result.exit_code == 0, result.output
    assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()
    assert (a / "events.jsonl").read_bytes() == (b / "events.jsonl").read_bytes()


def test_simulate_custom_instances(runner, tmp_path, policy_file):
    outdir = tmp_path / "run"
    result = runner.invoke(main, ["simulate", "--policy", str(policy_file),
                                  "--instances", "g-0,g-1,g-2",
                                  "--interval", "3600", "--duration", "24",
                                  "--output-dir", str(outdir)])
    assert result.exit_code == 0, result.output
    events = events_from_jsonl((outdir / "events.jsonl").read_text())
    pause = next(e for e in events if e.kind is EventKind.PAUSE_ALL)
    assert pause.affected == ("g-0", "g-1", "g-2")


# ------------------------------------------------------------- report

def test_report_single_cell_json(runner, tmp_path, flat_prices, policy_file):
    result = runner.invoke(main, ["report", "--prices", str(flat_prices),
                                  "--policy", str(policy_file),
                                  "--interval", "300"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["energy_savings"] == pytest.approx(4 / 24, rel=1e-9)
    assert doc["cost_savings"] == pytest.approx(4 / 24, rel=1e-9)
    assert doc["availability"] == pytest.approx(1 - 4 / 24, rel=1e-9)


def test_report_table_on_flat_prices_equalises_columns(runner, tmp_path,
                                                       flat_prices, policy_file):
    out = tmp_path / "table.csv"
    result = runner.invoke(main, ["report", "--prices", str(flat_prices),
                                  "--policy", str(policy_file),
                                  "--peak-power", "100,200",
                                  "--idle-ratio", "0,0.3,0.6",
                                  "--interval", "300", "--table",
                                  "--output", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert len(lines) == 4
    for line in lines[1:]:
        cells = line.split(",")
        energy, cost = cells[1:3], cells[3:5]
        assert energy == cost  # flat prices: both savings identical


def test_report_empty_policy_zero_savings(runner, tmp_path, flat_prices):
    empty = tmp_path / "empty.json"
    empty.write_text(ExpensiveHourPolicy(0.0, 0, frozenset()).to_json())
    result = runner.invoke(main, ["report", "--prices", str(flat_prices),
                                  "--policy", str(empty), "--interval", "900"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["energy_savings"] == 0.0
    assert doc["cost_savings"] == 0.0
    assert doc["availability"] == 1.0


def test_report_from_measured_traces(runner, tmp_path, flat_prices, policy_file):
    sim = tmp_path / "sim"
    runner.invoke(main, ["simulate", "--policy", str(policy_file),
                         "--noise-sigma", "0", "--interval", "300",
                         "--duration", "24", "--output-dir", str(sim)])
    base = tmp_path / "base"
    empty = tmp_path / "empty.json"
    empty.write_text(ExpensiveHourPolicy(0.0, 0, frozenset()).to_json())
    runner.invoke(main, ["simulate", "--policy", str(empty),
                         "--noise-sigma", "0", "--interval", "300",
                         "--duration", "24", "--output-dir", str(base)])
    result = runner.invoke(main, ["report", "--prices", str(flat_prices),
                                  "--policy", str(policy_file),
                                  "--trace", str(sim / "trace.csv"),
                                  "--baseline-trace", str(base / "trace.csv")])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["energy_savings"] == pytest.approx(4 / 24, rel=1e-9)


def test_report_trace_requires_baseline(runner, flat_prices, policy_file, tmp_path):
    result = runner.invoke(main, ["report", "--prices", str(flat_prices),
                                  "--policy", str(policy_file),
                                  "--trace", str(tmp_path / "x.csv")])
    assert result.exit_code == 2
    assert "go together" in result.output


def test_report_smoothed_export(runner, tmp_path, flat_prices, policy_file):
    smoothed = tmp_path / "smooth.csv"
    result = runner.invoke(main, ["report", "--prices", str(flat_prices),
                                  "--policy", str(policy_file),
                                  "--interval", "300", "--noise-sigma", "3",
                                  "--smoothed-out", str(smoothed),
                                  "--alpha", "0.2"])
    assert result.exit_code == 0, result.output
    trace = load_trace_csv(smoothed.read_bytes())
    assert len(trace) == 288


# ------------------------------------------------------------- sla

def make_report_file(tmp_path, cost_savings=0.266):
    start, end = START, START + timedelta(days=1)
    doc = {
        "baseline": {"energy_kwh": 4.8, "cost_usd": 0.144,
                     "start": start.isoformat(), "end": end.isoformat(),
                     "samples_used": 24},
        "scheduled": {"energy_kwh": 4.0, "cost_usd": 0.144 * (1 - cost_savings),
                      "start": start.isoformat(), "end": end.isoformat(),
                      "samples_used": 24},
        "energy_savings": 1 - 4.0 / 4.8,
        "cost_savings": cost_savings,
        "availability": 1 - 4 / 24,
        "cpu_time_lost": 4 / 24,
    }
    path = tmp_path / "report.json"
    path.write_text(json.dumps(doc))
    return path


def test_sla_reference_constants(runner, tmp_path):
    report = make_report_file(tmp_path)
    result = runner.invoke(main, ["sla", "--report", str(report),
                                  "--normal-price", "0.060"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.output)
    assert doc["hourly_price_usd"] == 0.044
    assert doc["availability"] == pytest.approx(0.833, abs=5e-4)
    assert doc["annual_chargeback_kg"] == pytest.approx(1300, rel=0.05)
    assert doc["chargeback_delta_vs_normal_kg"] == pytest.approx(300, rel=0.15)


def test_sla_zero_savings_price_unchanged(runner, tmp_path):
    report = make_report_file(tmp_path, cost_savings=0.0)
    result = runner.invoke(main, ["sla", "--report", str(report),
                                  "--normal-price", "0.060"])
    doc = json.loads(result.output)
    assert doc["hourly_price_usd"] == 0.060


def test_sla_doubled_hours_double_chargebacks(runner, tmp_path):
    report = make_report_file(tmp_path)
    one = json.loads(runner.invoke(main, ["sla", "--report", str(report),
                                          "--normal-price", "0.060"]).output)
    two = json.loads(runner.invoke(main, ["sla", "--report", str(report),
                                          "--normal-price", "0.060",
                                          "--annual-hours", "17520"]).output)
    assert two["annual_chargeback_kg"] == pytest.approx(
        2 * one["annual_chargeback_kg"], rel=1e-12)


# ------------------------------------------------------------- config

def test_config_supplies_values_and_flags_win(runner, tmp_path):
    config = tmp_path / "experiment.json"
    config.write_text(json.dumps({
        "prices": str(sample_prices_path()),
        "window": "2024-01-01..2024-04-01",
        "downtime_ratio": 0.16,
    }))
    out = tmp_path / "p1.json"
    result = runner.invoke(main, ["predict", "--config", str(config),
                                  "--output", str(out)])
    assert result.exit_code == 0, result.output
    assert ExpensiveHourPolicy.from_json(out.read_text()).n == 4

    out2 = tmp_path / "p2.json"
    result = runner.invoke(main, ["predict", "--config", str(config),
                                  "--downtime-ratio", "0.5",
                                  "--output", str(out2)])
    assert result.exit_code == 0, result.output
    assert ExpensiveHourPolicy.from_json(out2.read_text()).n == 12


def test_config_unknown_key_exit_1(runner, tmp_path):
    config = tmp_path / "experiment.json"
    config.write_text(json.dumps({"bogus": 1}))
    result = runner.invoke(main, ["predict", "--config", str(config),
                                  "--downtime-ratio", "0.16"])
    assert result.exit_code == 1
    assert "unknown config keys" in result.output


def test_missing_required_flag_is_usage_error(runner):
    result = runner.invoke(main, ["predict", "--downtime-ratio", "0.16"])
    assert result.exit_code == 2
    assert "missing --prices" in result.output
