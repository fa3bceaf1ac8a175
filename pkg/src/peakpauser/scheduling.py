"""Pause/unpause state machine over a pluggable VM controller.

The loop evaluates once per hour boundary: entering an expensive hour
pauses every instance in the managed group, leaving one unpauses them,
anything else is a noop. Controller failures are recorded in the event
log and the divergent instances are retried at the next step; they
never abort the remaining instances or raise out of the loop.

The time source is injected so the identical loop runs against the
wall clock (daemon mode) and against simulated time (tests), where it
never sleeps.
"""

from __future__ import annotations

import json
import time as _time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from pathlib import Path
from typing import Protocol

import numpy as np

from .errors import (ClockError, ControllerError, ControllerTimeoutError,
                     DataFormatError, UnknownInstanceError)
from .power import ScheduleMask
from .predictor import ExpensiveHourPolicy, is_expensive
from .prices import floor_to_hour

ONE_HOUR = timedelta(hours=1)
DEFAULT_CONTROLLER_DEADLINE = 30.0  # seconds


class InstanceState(str, Enum):
    RUNNING = "running"
    PAUSED = "paused"


class Phase(str, Enum):
    CHEAP = "cheap"
    EXPENSIVE = "expensive"


class EventKind(str, Enum):
    PAUSE_ALL = "pause_all"
    UNPAUSE_ALL = "unpause_all"
    NOOP = "noop"


class EventOutcome(str, Enum):
    OK = "ok"
    PARTIAL = "partial"
    FAILED = "failed"


class VmController(ABC):
    """Control surface a hypervisor adapter must provide.

    Implementations must make ``pause`` on a paused instance and
    ``unpause`` on a running instance idempotent no-ops, and must
    complete or fail each call within their configured deadline.
    """

    @abstractmethod
    def pause(self, instance_id: str) -> None:
        """Pause one instance; raise ControllerError on failure."""

    @abstractmethod
    def unpause(self, instance_id: str) -> None:
        """Unpause one instance; raise ControllerError on failure."""

    @abstractmethod
    def status(self, instance_id: str) -> InstanceState:
        """Current state of one instance."""


class MockController(VmController):
    """In-memory controller with scriptable failures and latencies.

    ``fail`` lists instance ids whose pause/unpause calls always fail;
    ``latencies`` maps ids to a simulated call duration in seconds --
    no real sleeping happens, but a latency above ``deadline`` raises
    ControllerTimeoutError. Every attempted call is recorded in
    ``calls`` for inspection.
    """

    def __init__(self, instance_ids, fail=(), latencies=None,
                 deadline: float = DEFAULT_CONTROLLER_DEADLINE):
        self._states = {iid: InstanceState.RUNNING for iid in instance_ids}
        if not self._states:
            raise ValueError("controller needs at least one instance id")
        self._fail = set(fail)
        self._latencies = dict(latencies or {})
        self._deadline = deadline
        self.calls: list[tuple[str, str]] = []

    def _check(self, op: str, instance_id: str) -> None:
        self.calls.append((op, instance_id))
        if instance_id not in self._states:
            raise UnknownInstanceError(f"unknown instance {instance_id!r}")
        if self._latencies.get(instance_id, 0.0) > self._deadline:
            raise ControllerTimeoutError(
                f"{op} {instance_id!r} exceeded {self._deadline:g}s deadline")
        if instance_id in self._fail:
            raise ControllerError(f"scripted failure: {op} {instance_id!r}")

    def pause(self, instance_id: str) -> None:
        self._check("pause", instance_id)
        self._states[instance_id] = InstanceState.PAUSED

    def unpause(self, instance_id: str) -> None:
        self._check("unpause", instance_id)
        self._states[instance_id] = InstanceState.RUNNING

    def status(self, instance_id: str) -> InstanceState:
        if instance_id not in self._states:
            raise UnknownInstanceError(f"unknown instance {instance_id!r}")
        return self._states[instance_id]


@dataclass(frozen=True)
class InstanceGroup:
    """The managed set of instances and their last known states."""

    instance_ids: tuple[str, ...]
    state_by_id: dict[str, InstanceState]

    def __post_init__(self):
        object.__setattr__(self, "instance_ids", tuple(self.instance_ids))
        object.__setattr__(self, "state_by_id", dict(self.state_by_id))
        if not self.instance_ids:
            raise ValueError("instance group must not be empty")
        if len(set(self.instance_ids)) != len(self.instance_ids):
            raise ValueError("instance ids must be unique")
        if set(self.state_by_id) != set(self.instance_ids):
            raise ValueError("every instance id needs exactly one state")

    @classmethod
    def running(cls, instance_ids) -> "InstanceGroup":
        ids = tuple(instance_ids)
        return cls(ids, {iid: InstanceState.RUNNING for iid in ids})

    def all_in(self, state: InstanceState) -> bool:
        return all(s is state for s in self.state_by_id.values())


@dataclass(frozen=True)
class ScheduleEvent:
    """One audit-log entry of a scheduler step."""

    at: datetime
    kind: EventKind
    affected: tuple[str, ...]
    outcome: EventOutcome
    failed: tuple[str, ...] = ()

    def to_json_line(self) -> str:
        return json.dumps({
            "at": self.at.isoformat(),
            "kind": self.kind.value,
            "affected": list(self.affected),
            "outcome": self.outcome.value,
            "failed": list(self.failed),
        }, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "ScheduleEvent":
        try:
            raw = json.loads(line)
            return cls(at=datetime.fromisoformat(raw["at"]),
                       kind=EventKind(raw["kind"]),
                       affected=tuple(raw["affected"]),
                       outcome=EventOutcome(raw["outcome"]),
                       failed=tuple(raw.get("failed", ())))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"bad event line: {exc}") from None


def events_to_jsonl(events) -> str:
    return "".join(e.to_json_line() + "\n" for e in events)


def events_from_jsonl(text: str) -> list[ScheduleEvent]:
    return [ScheduleEvent.from_json_line(line)
            for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class SchedulerState:
    policy: ExpensiveHourPolicy
    group: InstanceGroup
    phase: Phase = Phase.CHEAP
    last_transition: datetime | None = None

    @classmethod
    def initial(cls, policy: ExpensiveHourPolicy, instance_ids) -> "SchedulerState":
        return cls(policy=policy, group=InstanceGroup.running(instance_ids))


def step(state: SchedulerState, controller: VmController,
         now: datetime) -> tuple[SchedulerState, ScheduleEvent]:
    """Evaluate the policy at ``now`` and reconcile the group.

    Entering an expensive hour issues pause for every instance; leaving
    one issues unpause for every instance (idempotent for instances
    already in the desired state). Outside transitions, only instances
    that missed an earlier call are retried. Controller errors end up
    in the event, never raised.
    """
    want_paused = is_expensive(state.policy, now)
    desired = InstanceState.PAUSED if want_paused else InstanceState.RUNNING
    entering = ((want_paused and state.phase is Phase.CHEAP)
                or (not want_paused and state.phase is Phase.EXPENSIVE))
    if entering:
        targets = state.group.instance_ids
    else:
        targets = tuple(iid for iid in state.group.instance_ids
                        if state.group.state_by_id[iid] is not desired)
    if not targets:
        return state, ScheduleEvent(at=now, kind=EventKind.NOOP, affected=(),
                                    outcome=EventOutcome.OK)

    op = controller.pause if want_paused else controller.unpause
    new_states = dict(state.group.state_by_id)
    failures = []
    for iid in targets:
        try:
            op(iid)
            new_states[iid] = desired
        except ControllerError:
            failures.append(iid)
    if not failures:
        outcome = EventOutcome.OK
    elif len(failures) == len(targets):
        outcome = EventOutcome.FAILED
    else:
        outcome = EventOutcome.PARTIAL

    new_state = SchedulerState(
        policy=state.policy,
        group=InstanceGroup(state.group.instance_ids, new_states),
        phase=Phase.EXPENSIVE if want_paused else Phase.CHEAP,
        last_transition=now if entering else state.last_transition,
    )
    event = ScheduleEvent(
        at=now,
        kind=EventKind.PAUSE_ALL if want_paused else EventKind.UNPAUSE_ALL,
        affected=targets,
        outcome=outcome,
        failed=tuple(failures),
    )
    return new_state, event


class Clock(Protocol):
    def now(self) -> datetime: ...

    def sleep_until(self, when: datetime) -> None: ...


class SimulatedClock:
    """Deterministic time source; ``sleep_until`` jumps instantly."""

    def __init__(self, start: datetime):
        self._now = start

    def now(self) -> datetime:
        return self._now

    def sleep_until(self, when: datetime) -> None:
        if when > self._now:
            self._now = when


class SystemClock:
    """Wall-clock time source for daemon mode."""

    def now(self) -> datetime:
        return datetime.now()

    def sleep_until(self, when: datetime) -> None:
        while True:
            remaining = (when - self.now()).total_seconds()
            if remaining <= 0:
                return
            _time.sleep(remaining)


def run_loop(state: SchedulerState, controller: VmController, clock: Clock,
             until: datetime) -> tuple[SchedulerState, list[ScheduleEvent]]:
    """Drive ``step`` at hour boundaries until ``until``.

    Steps once immediately, then sleeps to each following hour boundary,
    so the policy is evaluated at most once per wall-clock hour. Returns
    the final state and the ordered event log.
    """
    events: list[ScheduleEvent] = []
    prev: datetime | None = None
    while True:
        now = clock.now()
        if prev is not None and now < prev:
            raise ClockError(f"clock went backwards: {now.isoformat()} "
                             f"< {prev.isoformat()}")
        if now >= until:
            break
        prev = now
        state, event = step(state, controller, now)
        events.append(event)
        clock.sleep_until(min(floor_to_hour(now) + ONE_HOUR, until))
    return state, events


def mask_from_policy(policy: ExpensiveHourPolicy, start: datetime,
                     duration: timedelta | float,
                     sample_interval: float) -> ScheduleMask:
    """Per-sample paused flags: flag[i] = is_expensive at start + i*interval.

    ``duration`` (timedelta, or seconds) must be a positive multiple of
    ``sample_interval``.
    """
    total = duration.total_seconds() if isinstance(duration, timedelta) else float(duration)
    if total <= 0:
        raise ValueError(f"duration must be positive, got {total}s")
    count = total / sample_interval
    n = round(count)
    if n <= 0 or abs(count - n) > 1e-9:
        raise ValueError(f"duration {total}s is not a multiple of the "
                         f"sample interval {sample_interval}s")
    offset = (start - start.replace(hour=0, minute=0, second=0,
                                    microsecond=0)).total_seconds()
    positions = offset + sample_interval * np.arange(n)
    hours = (positions // 3600.0).astype(np.int64) % 24
    flags = np.isin(hours, sorted(policy.expensive_hours))
    return ScheduleMask(start, sample_interval, flags)


def load_daemon_config(path) -> tuple[ExpensiveHourPolicy, tuple[str, ...]]:
    """Read daemon configuration: a policy and the instance ids to manage.

    The JSON document carries ``instances`` plus either an inline
    ``policy`` object or a ``policy_file`` path (resolved relative to
    the config file).
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"bad daemon config: {exc}") from None
    unknown = set(raw) - {"policy", "policy_file", "instances"}
    if unknown:
        raise DataFormatError(f"unknown daemon config keys: {sorted(unknown)}")
    if ("policy" in raw) == ("policy_file" in raw):
        raise DataFormatError("daemon config needs exactly one of "
                              "'policy' or 'policy_file'")
    if "policy" in raw:
        policy = ExpensiveHourPolicy.from_dict(raw["policy"])
    else:
        policy_path = path.parent / raw["policy_file"]
        policy = ExpensiveHourPolicy.from_json(policy_path.read_text(encoding="utf-8"))
    instances = raw.get("instances")
    if (not isinstance(instances, list) or not instances
            or not all(isinstance(i, str) for i in instances)):
        raise DataFormatError("daemon config needs a non-empty 'instances' list")
    return policy, tuple(instances)


def run_daemon(config_path, controller: VmController | None = None,
               clock: Clock | None = None, until: datetime | None = None):
    """Run the scheduling loop from a daemon config file.

    Defaults wire a MockController over the configured ids and the
    system clock; pass a real hypervisor adapter for production use.
    """
    policy, instance_ids = load_daemon_config(config_path)
    controller = controller or MockController(instance_ids)
    clock = clock or SystemClock()
    state = SchedulerState.initial(policy, instance_ids)
    return run_loop(state, controller, clock, until or datetime.max)
