"""Prioritized condition -> action rules evaluated once per scenario event."""

from __future__ import annotations

from dataclasses import dataclass

from .house import WorldState
from .scenario import ScenarioEvent

EVENT_LOCATION = "event.location"
EVENT_ORIGIN = "event.from"

# name -> check against (world, location name)
PREDICATES = {
    "dark": lambda w, loc: w.locations[loc].dark,
    "occupied": lambda w, loc: w.occupied(loc),
    "empty": lambda w, loc: not w.occupied(loc),
    "asleep_any": lambda w, loc: w.asleep_any(loc),
    "light_on": lambda w, loc: w.locations[loc].light_on,
    "tv_on": lambda w, loc: w.locations[loc].tv_on,
}


def resolve_location(expr: str, event: ScenarioEvent, world: WorldState) -> str | None:
    if expr == EVENT_LOCATION:
        loc = event.location
    elif expr == EVENT_ORIGIN:
        loc = event.origin
    else:
        loc = expr
    if loc is None or loc not in world.locations:
        return None
    return loc


class Condition:
    def holds(self, event: ScenarioEvent, world: WorldState) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class Always(Condition):
    def holds(self, event, world):
        return True


@dataclass(frozen=True)
class KindIs(Condition):
    kind: str
    negate: bool = False

    def holds(self, event, world):
        return (event.kind.value == self.kind) != self.negate


@dataclass(frozen=True)
class LocationKindIs(Condition):
    kind: str
    negate: bool = False

    def holds(self, event, world):
        loc = resolve_location(EVENT_LOCATION, event, world)
        actual = None if loc is None else world.house.location(loc).kind.value
        return (actual == self.kind) != self.negate


@dataclass(frozen=True)
class Predicate(Condition):
    name: str
    location: str

    def holds(self, event, world):
        loc = resolve_location(self.location, event, world)
        # predicates about a location that doesn't resolve are false
        return loc is not None and PREDICATES[self.name](world, loc)


@dataclass(frozen=True)
class And(Condition):
    left: Condition
    right: Condition

    def holds(self, event, world):
        return self.left.holds(event, world) and self.right.holds(event, world)


@dataclass(frozen=True)
class Or(Condition):
    left: Condition
    right: Condition

    def holds(self, event, world):
        return self.left.holds(event, world) or self.right.holds(event, world)


@dataclass(frozen=True)
class Not(Condition):
    operand: Condition

    def holds(self, event, world):
        return not self.operand.holds(event, world)


@dataclass(frozen=True)
class Action:
    """``turn_on``/``turn_off`` a device (``light``, ``tv`` or ``all``) somewhere,
    raise an ``alert``, or ``record`` an activity tag."""

    verb: str
    device: str | None = None
    target: str | None = None
    text: str | None = None


@dataclass(frozen=True)
class Rule:
    name: str
    priority: int
    when: Condition
    then: tuple[Action, ...]


@dataclass(frozen=True)
class RuleSet:
    rules: tuple[Rule, ...] = ()

    def __post_init__(self):
        names = [r.name for r in self.rules]
        if len(names) != len(set(names)):
            raise ValueError("rule names must be unique")
        ordered = tuple(sorted(self.rules, key=lambda r: (-r.priority, r.name)))
        object.__setattr__(self, "rules", ordered)

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def get(self, name: str) -> Rule | None:
        for r in self.rules:
            if r.name == name:
                return r
        return None

    @property
    def names(self) -> list[str]:
        return [r.name for r in self.rules]


def evaluate_rules(rs: RuleSet, event: ScenarioEvent, world: WorldState) -> list[tuple[str, Action]]:
    """Actions of every rule whose condition holds, in rule-set order.

    ``world`` must be a snapshot; nothing here mutates it and fired actions never
    feed back into evaluation for the same event.
    """
    fired = []
    for rule in rs:
        if rule.when.holds(event, world):
            fired.extend((rule.name, action) for action in rule.then)
    return fired


def merge_rulesets(base: RuleSet, override: RuleSet) -> RuleSet:
    shadowed = set(override.names)
    kept = [r for r in base if r.name not in shadowed]
    return RuleSet(tuple(kept) + override.rules)
