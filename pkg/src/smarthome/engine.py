"""Event loop: apply scenario events, fire rules, keep the energy ledger."""

from __future__ import annotations

import dataclasses
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .activity import AGENT, ENVIRONMENT, ActivityLog, LogRecord
from .errors import IllegalTransition, OpenInterval
from .health import HealthConfig, health_alerts, summarize_health
from .house import DEVICES, DeviceRatings, HouseConfig, LocationKind, WorldState
from .rules import RuleSet, evaluate_rules, resolve_location
from .scenario import EventKind, ScenarioEvent, Timeline, ValidatedTimeline, validate_timeline

log = logging.getLogger(__name__)

HOUSE_BUCKET = "house"
GROUPINGS = ("house", "location", "device", "resident")


@dataclass(frozen=True)
class LedgerEntry:
    """A device-on interval ``[on_from, on_to)`` in minutes, with who was in the room."""

    location: str
    device: str
    on_from: int
    on_to: int
    occupants: tuple[str, ...] = ()

    @property
    def minutes(self) -> int:
        return self.on_to - self.on_from


class EnergyLedger:
    def __init__(self, entries=()):
        self.entries: list[LedgerEntry] = list(entries)
        self._open: dict[tuple[str, str], tuple[int, tuple[str, ...]]] = {}

    @property
    def closed(self) -> bool:
        return not self._open

    def is_open(self, location: str, device: str) -> bool:
        return (location, device) in self._open

    def open(self, location: str, device: str, minute: int, occupants=()) -> None:
        key = (location, device)
        if key in self._open:
            raise ValueError(f"{device} in {location} already on")
        self._open[key] = (minute, tuple(sorted(occupants)))

    def close(self, location: str, device: str, minute: int) -> None:
        start, occupants = self._open.pop((location, device))
        if minute > start:  # zero-length intervals carry no energy
            self.entries.append(LedgerEntry(location, device, start, minute, occupants))

    def sync(self, world: WorldState, minute: int) -> None:
        """Bring open intervals in line with device states and room occupancy."""
        for loc, state in world.locations.items():
            occupants = tuple(sorted(state.occupants))
            for device in DEVICES:
                key = (loc, device)
                on = state.device_on(device)
                if key in self._open:
                    if not on:
                        self.close(loc, device, minute)
                    elif self._open[key][1] != occupants:
                        self.close(loc, device, minute)
                        self.open(loc, device, minute, occupants)
                elif on:
                    self.open(loc, device, minute, occupants)

    def close_all(self, minute: int) -> None:
        for loc, device in sorted(self._open):
            self.close(loc, device, minute)
        self.entries.sort(key=lambda e: (e.on_from, e.location, e.device))

    def hours(self, device: str | None = None) -> Fraction:
        return sum(
            (Fraction(e.minutes, 60) for e in self.entries if device is None or e.device == device),
            Fraction(0),
        )


@dataclass
class SimulationResult:
    log: ActivityLog
    ledger: EnergyLedger
    alerts: list[tuple[int, str]] = field(default_factory=list)
    final_world: WorldState | None = None

    @property
    def house(self) -> HouseConfig:
        return self.final_world.house

    @property
    def people(self) -> list[str]:
        return list(self.final_world.residents)


def apply_event(world: WorldState, e: ScenarioEvent) -> WorldState:
    """Update occupancy, sleep, darkness and manual TV state for one event."""

    def bad(msg: str):
        return IllegalTransition(f"{e.kind.value} at {e.at}: {msg}")

    kind = e.kind
    if kind is EventKind.END:
        return world
    if kind is EventKind.DARKNESS:
        if e.location not in world.locations:
            raise bad(f"unknown location {e.location!r}")
        world.locations[e.location].dark = bool(e.dark)
        return world
    if kind is EventKind.VISITOR:
        if e.resident in world.residents:
            raise bad(f"{e.resident} is already known")
        world.add_person(e.resident)
        return world

    person = world.residents.get(e.resident)
    if person is None:
        raise bad(f"unknown resident {e.resident!r}")
    if e.location is not None and e.location not in world.locations:
        raise bad(f"unknown location {e.location!r}")
    if kind is EventKind.WAKE:
        if not person.asleep:
            raise bad(f"{e.resident} is awake")
        person.asleep = False
        return world
    if person.asleep:
        raise bad(f"{e.resident} is asleep")

    if kind is EventKind.ENTER:
        if person.position == e.location:
            raise bad(f"{e.resident} is already in {e.location}")
        if person.position is not None:
            world.locations[person.position].occupants.discard(e.resident)
        world.locations[e.location].occupants.add(e.resident)
        person.position = e.location
    elif kind is EventKind.LEAVE:
        if person.position is None:
            raise bad(f"{e.resident} is outside")
        world.locations[person.position].occupants.discard(e.resident)
        person.position = None
    elif kind is EventKind.SLEEP:
        if person.position is None or world.house.location(person.position).kind is not LocationKind.BEDROOM:
            raise bad(f"{e.resident} is not in a bedroom")
        person.asleep = True
    elif kind in (EventKind.TV_ON, EventKind.TV_OFF):
        if not world.house.location(e.location).has_tv:
            raise bad(f"{e.location} has no TV")
        if person.position != e.location:
            raise bad(f"{e.resident} is not in {e.location}")
        # residents decide about TVs themselves
        world.locations[e.location].tv_on = kind is EventKind.TV_ON
    elif kind is EventKind.TOILET:
        if person.position != e.location:
            raise bad(f"{e.resident} is not in {e.location}")
    return world


def _resolve(e: ScenarioEvent, before: str | None, world: WorldState) -> ScenarioEvent:
    """Fill in the locations implied by the world so rules can refer to them."""
    if e.kind is EventKind.ENTER:
        return dataclasses.replace(e, origin=before)
    if e.kind is EventKind.LEAVE:
        return dataclasses.replace(e, location=before, origin=before)
    if e.kind in (EventKind.SLEEP, EventKind.WAKE):
        return dataclasses.replace(e, location=world.residents[e.resident].position)
    return e


def _event_record(e: ScenarioEvent) -> LogRecord:
    if e.kind is EventKind.DARKNESS:
        return LogRecord(e.at, ENVIRONMENT, "dark" if e.dark else "bright", e.location)
    return LogRecord(e.at, e.resident, e.kind.value, e.location)


def _targets(action, event, world) -> tuple[str | None, list[str]]:
    loc = resolve_location(action.target, event, world)
    devices = list(DEVICES) if action.device == "all" else [action.device]
    return loc, devices


def _report_conflicts(fired, event, world, index) -> None:
    verbs = defaultdict(set)
    for _, action in fired:
        if action.verb not in ("turn_on", "turn_off"):
            continue
        loc, devices = _targets(action, event, world)
        for device in devices:
            verbs[(loc, device)].add(action.verb)
    for (loc, device), seen in verbs.items():
        if len(seen) > 1:
            log.warning("event %d: conflicting rules for %s in %s; last action wins", index, device, loc)


def _execute(rule_name, action, event, world, activity, alerts) -> None:
    minute = event.at
    if action.verb == "alert":
        alerts.append((minute, action.text))
        activity.append(LogRecord(minute, AGENT, "alert", event.location, rule_name))
        return
    if action.verb == "record":
        activity.append(LogRecord(minute, AGENT, f"record:{action.text}", event.location, rule_name))
        return
    loc, devices = _targets(action, event, world)
    if loc is None:
        log.debug("rule %s: %s does not resolve for this event", rule_name, action.target)
        return
    spec = world.house.location(loc)
    want = action.verb == "turn_on"
    for device in devices:
        if not spec.has(device):
            if action.device != "all":
                log.debug("rule %s: %s has no %s", rule_name, loc, device)
            continue
        state = world.locations[loc]
        if state.device_on(device) != want:
            state.set_device(device, want)
            activity.append(
                LogRecord(minute, AGENT, f"{device}_{'on' if want else 'off'}", loc, rule_name)
            )


def run_simulation(
    house: HouseConfig,
    rules: RuleSet,
    timeline: Timeline,
    health=None,
    observer: Callable[[int, ScenarioEvent, WorldState], None] | None = None,
) -> SimulationResult:
    """Replay ``timeline`` against ``house`` under ``rules``.

    ``health`` is a :class:`smarthome.health.HealthConfig` (default bounds when
    omitted). ``observer`` is called after every event once its actions have run.
    """
    if not isinstance(timeline, ValidatedTimeline):
        timeline = validate_timeline(timeline, house)
    health = health or HealthConfig()

    world = WorldState.initial(house)
    activity = ActivityLog(end=timeline.end)
    ledger = EnergyLedger()
    alerts: list[tuple[int, str]] = []

    for index, event in enumerate(timeline.events):
        world.clock = event.at
        if event.kind is EventKind.END:
            break
        before = world.residents[event.resident].position if event.resident in world.residents else None
        try:
            apply_event(world, event)
        except IllegalTransition as exc:
            exc.event_index = index
            raise
        resolved = _resolve(event, before, world)
        activity.append(_event_record(resolved))
        ledger.sync(world, event.at)

        snapshot = world.snapshot()
        fired = evaluate_rules(rules, resolved, snapshot)
        if len(fired) > 1:
            _report_conflicts(fired, resolved, snapshot, index)
        for rule_name, action in fired:
            _execute(rule_name, action, resolved, world, activity, alerts)
            ledger.sync(world, event.at)
        if observer is not None:
            observer(index, resolved, world)

    world.clock = timeline.end
    ledger.close_all(timeline.end)
    result = SimulationResult(activity, ledger, alerts, world)
    alerts.extend(health_alerts(summarize_health(activity, house, health), health))
    alerts.sort(key=lambda a: a[0])
    return result


def energy_totals(
    ledger: EnergyLedger, ratings: DeviceRatings, group_by: str = "house", groups=()
) -> dict[str, Fraction]:
    """Energy in daW·h per group; ``groups`` pre-seeds keys that should appear as 0.

    Resident grouping splits each interval equally among the people in the
    room; energy burned in an empty room lands in the ``"house"`` bucket.
    """
    if group_by not in GROUPINGS:
        raise ValueError(f"group_by must be one of {GROUPINGS}")
    if not ledger.closed:
        raise OpenInterval("ledger still has devices switched on")
    totals: dict[str, Fraction] = {g: Fraction(0) for g in groups}
    if group_by == "house":
        totals.setdefault(HOUSE_BUCKET, Fraction(0))
    for e in ledger.entries:
        energy = Fraction(ratings.rating(e.device) * e.minutes, 60)
        if group_by == "house":
            keys = [HOUSE_BUCKET]
        elif group_by == "location":
            keys = [e.location]
        elif group_by == "device":
            keys = [e.device]
        else:
            keys = list(e.occupants) or [HOUSE_BUCKET]
        share = energy / len(keys)
        for key in keys:
            totals[key] = totals.get(key, Fraction(0)) + share
    return totals
