"""Pause VM groups during the statistically most expensive grid hours.

The pipeline: ingest hourly electricity prices, pick the hours of the
day that are historically most expensive, drive a pause/unpause loop
over a VM controller during those hours, and account for the energy,
cost, availability and emission consequences.
"""

from . import errors
from ._kernels import backend as kernel_backend
from .accounting import (EmissionParams, EnergyCostResult, GreenSlaQuote,
                         SavingsReport, SavingsTable,
                         cef_lb_per_mwh_to_kg_per_kwh, compare, compare_traces,
                         environmental_chargeback, integrate_cost, savings_table,
                         sla_quote)
from .power import (PowerTrace, ScheduleMask, ServerPowerModel, ewma_smooth,
                    load_trace_csv, save_trace_csv, synthesize_trace)
from .predictor import (ExpensiveHourPolicy, OracleComparison,
                        daily_retrained_policies, default_history_window,
                        evaluate_vs_oracle, find_expensive_hours,
                        hours_to_pause, is_expensive)
from .prices import (CsvFormat, GapPolicy, HourlyProfile, PricePoint,
                     PriceSeries, hourly_profile, parse_price_csv,
                     peak_hour_histogram, serialize_price_csv)
from .scheduling import (InstanceGroup, MockController, ScheduleEvent,
                         SchedulerState, SimulatedClock, SystemClock,
                         VmController, events_from_jsonl, events_to_jsonl,
                         load_daemon_config, mask_from_policy, run_daemon,
                         run_loop, step)

__version__ = "0.1.0"

__all__ = [
    "CsvFormat",
    "EmissionParams",
    "EnergyCostResult",
    "ExpensiveHourPolicy",
    "GapPolicy",
    "GreenSlaQuote",
    "HourlyProfile",
    "InstanceGroup",
    "MockController",
    "OracleComparison",
    "PowerTrace",
    "PricePoint",
    "PriceSeries",
    "SavingsReport",
    "SavingsTable",
    "ScheduleEvent",
    "ScheduleMask",
    "SchedulerState",
    "ServerPowerModel",
    "SimulatedClock",
    "SystemClock",
    "VmController",
    "cef_lb_per_mwh_to_kg_per_kwh",
    "compare",
    "compare_traces",
    "daily_retrained_policies",
    "default_history_window",
    "environmental_chargeback",
    "errors",
    "evaluate_vs_oracle",
    "events_from_jsonl",
    "events_to_jsonl",
    "ewma_smooth",
    "find_expensive_hours",
    "hourly_profile",
    "hours_to_pause",
    "integrate_cost",
    "is_expensive",
    "kernel_backend",
    "load_daemon_config",
    "load_trace_csv",
    "mask_from_policy",
    "parse_price_csv",
    "peak_hour_histogram",
    "run_daemon",
    "run_loop",
    "save_trace_csv",
    "savings_table",
    "serialize_price_csv",
    "sla_quote",
    "step",
    "synthesize_trace",
]
