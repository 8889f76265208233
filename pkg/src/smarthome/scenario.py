"""Scenario scripts: ``<HH:MM> <verb> <args...>`` lines driving a run."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import Issue, ScenarioParseError, TimelineError
from .house import HouseConfig, LocationKind, can_occupy


class EventKind(str, Enum):
    ENTER = "enter"
    LEAVE = "leave"
    SLEEP = "sleep"
    WAKE = "wake"
    TV_ON = "tv_on"
    TV_OFF = "tv_off"
    TOILET = "toilet"
    DARKNESS = "darkness"
    VISITOR = "visitor"
    END = "end"


# verb -> argument names
_ARITY = {
    EventKind.ENTER: ("resident", "location"),
    EventKind.LEAVE: ("resident",),
    EventKind.SLEEP: ("resident",),
    EventKind.WAKE: ("resident",),
    EventKind.TV_ON: ("resident", "location"),
    EventKind.TV_OFF: ("resident", "location"),
    EventKind.TOILET: ("resident", "location"),
    EventKind.DARKNESS: ("location", "level"),
    EventKind.VISITOR: ("resident",),
    EventKind.END: (),
}

_TIME = re.compile(r"^(\d{1,3}):([0-5]\d)$")


@dataclass(frozen=True)
class ScenarioEvent:
    at: int
    kind: EventKind
    resident: str | None = None
    location: str | None = None
    dark: bool | None = None
    # where the resident was before an enter/leave; filled in by the engine
    origin: str | None = field(default=None, compare=False)
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Timeline:
    events: tuple[ScenarioEvent, ...]

    @property
    def end(self) -> int:
        return self.events[-1].at

    def __len__(self) -> int:
        return len(self.events)


@dataclass(frozen=True)
class ValidatedTimeline(Timeline):
    visitors: tuple[str, ...] = ()


def parse_time(text: str) -> int:
    m = _TIME.match(text)
    if not m:
        raise ValueError(text)
    return int(m.group(1)) * 60 + int(m.group(2))


def format_time(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def parse_scenario(text: str) -> Timeline:
    issues: list[Issue] = []
    events: list[ScenarioEvent] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        stamp, *rest = line.split()
        try:
            at = parse_time(stamp)
        except ValueError:
            issues.append(Issue("BadTimestamp", f"expected HH:MM, got {stamp!r}", lineno))
            continue
        if not rest:
            issues.append(Issue("ArityMismatch", "missing event verb", lineno))
            continue
        verb, args = rest[0], rest[1:]
        try:
            kind = EventKind(verb)
        except ValueError:
            issues.append(Issue("UnknownEventKind", f"unknown verb {verb!r}", lineno))
            continue
        names = _ARITY[kind]
        if len(args) != len(names):
            issues.append(
                Issue("ArityMismatch", f"{verb} takes {len(names)} argument(s), got {len(args)}", lineno)
            )
            continue
        values = dict(zip(names, args))
        dark = None
        if kind is EventKind.DARKNESS:
            level = values.pop("level")
            if level not in ("dark", "bright"):
                issues.append(Issue("BadValue", f"darkness level must be dark or bright, got {level!r}", lineno))
                continue
            dark = level == "dark"
        events.append(ScenarioEvent(at, kind, dark=dark, line=lineno, **values))

    # stable: equal timestamps keep input order
    events.sort(key=lambda e: e.at)
    ends = [e for e in events if e.kind is EventKind.END]
    if not ends:
        issues.append(Issue("MissingEnd", "scenario has no end event"))
    elif len(ends) > 1:
        issues.append(Issue("MultipleEnd", "scenario has more than one end event", ends[1].line))
    elif events[-1].kind is not EventKind.END:
        issues.append(Issue("EventAfterEnd", "events scheduled after end", events[-1].line))

    if issues:
        raise ScenarioParseError(sorted(issues, key=lambda i: i.line or 0))
    return Timeline(tuple(events))


def format_scenario(timeline: Timeline) -> str:
    lines = []
    for e in timeline.events:
        parts = [format_time(e.at), e.kind.value]
        if e.kind is EventKind.DARKNESS:
            parts += [e.location, "dark" if e.dark else "bright"]
        else:
            parts += [getattr(e, name) for name in _ARITY[e.kind]]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def validate_timeline(t: Timeline, house: HouseConfig) -> ValidatedTimeline:
    """Replay positions and sleep state, rejecting any event the house can't host."""
    issues: list[Issue] = []
    residents = set(house.resident_names)
    position: dict[str, str | None] = {name: None for name in residents}
    asleep: dict[str, bool] = {name: False for name in residents}
    visitors: list[str] = []

    def fail(code: str, e: ScenarioEvent, msg: str) -> None:
        issues.append(Issue(code, msg, e.line))

    for e in t.events:
        if e.kind is EventKind.VISITOR:
            if e.resident in position or not e.resident:
                fail("DuplicateName", e, f"visitor {e.resident!r} clashes with an existing person")
                continue
            position[e.resident] = None
            asleep[e.resident] = False
            visitors.append(e.resident)
            continue
        if e.kind is EventKind.END:
            continue

        if e.resident is not None and e.resident not in position:
            fail("UnknownName", e, f"unknown resident {e.resident!r}")
            continue
        if e.location is not None and not house.has_location(e.location):
            fail("UnknownName", e, f"unknown location {e.location!r}")
            continue
        if e.kind is EventKind.DARKNESS:
            continue

        who = e.resident
        here = position[who]
        if e.kind is EventKind.WAKE:
            if not asleep[who]:
                fail("IllegalTransition", e, f"{who} wakes while awake")
                continue
            asleep[who] = False
            continue
        if asleep[who]:
            fail("IllegalTransition", e, f"{who} is asleep and cannot {e.kind.value}")
            continue

        if e.kind is EventKind.ENTER:
            if here == e.location:
                fail("IllegalTransition", e, f"{who} is already in {e.location}")
                continue
            present = {p for p, pos in position.items() if pos == e.location}
            if not can_occupy(house, who, e.location, present):
                fail("AccessViolation", e, f"{who} may not enter {e.location}")
                continue
            position[who] = e.location
        elif e.kind is EventKind.LEAVE:
            if here is None:
                fail("NotPresent", e, f"{who} is already outside")
                continue
            position[who] = None
        elif e.kind is EventKind.SLEEP:
            if here is None:
                fail("NotPresent", e, f"{who} is outside")
                continue
            if house.location(here).kind is not LocationKind.BEDROOM:
                fail("SleepOutsideBedroom", e, f"{who} cannot sleep in {here}")
                continue
            asleep[who] = True
        elif e.kind in (EventKind.TV_ON, EventKind.TV_OFF):
            if not house.location(e.location).has_tv:
                fail("NoSuchDevice", e, f"{e.location} has no TV")
                continue
            if here != e.location:
                fail("NotPresent", e, f"{who} is not in {e.location}")
                continue
        elif e.kind is EventKind.TOILET:
            if house.location(e.location).kind is not LocationKind.BATHROOM:
                fail("NoSuchDevice", e, f"{e.location} has no toilet")
                continue
            if here != e.location:
                fail("NotPresent", e, f"{who} is not in {e.location}")
                continue

    if issues:
        raise TimelineError(issues)
    return ValidatedTimeline(t.events, tuple(visitors))
