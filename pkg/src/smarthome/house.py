"""House layout, residents, device ratings and the mutable world state."""

from __future__ import annotations

import copy
import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import HouseConfigError, Issue, UnknownLocation

SHARED = "shared"
DEVICES = ("light", "tv")

_TOKEN = re.compile(r"^\S+$")


class LocationKind(str, Enum):
    BEDROOM = "bedroom"
    BATHROOM = "bathroom"
    LIVING = "living"


@dataclass(frozen=True)
class LocationSpec:
    name: str
    kind: LocationKind
    has_light: bool = True
    has_tv: bool = False
    access: str = SHARED  # "shared" or the owning resident's name

    @property
    def shared(self) -> bool:
        return self.access == SHARED

    @property
    def owner(self) -> str | None:
        return None if self.shared else self.access

    def has(self, device: str) -> bool:
        return self.has_light if device == "light" else self.has_tv


@dataclass(frozen=True)
class Resident:
    name: str
    age: int | None = None
    weight: int | None = None  # opaque fitness index, not a mass


@dataclass(frozen=True)
class DeviceRatings:
    """Device power draw in dekawatts."""

    light_daW: int = 2
    tv_daW: int = 2

    def rating(self, device: str) -> int:
        if device == "light":
            return self.light_daW
        if device == "tv":
            return self.tv_daW
        raise ValueError(f"unknown device {device!r}")


@dataclass(frozen=True)
class HouseConfig:
    locations: tuple[LocationSpec, ...]
    residents: tuple[Resident, ...]
    ratings: DeviceRatings = DeviceRatings()

    def location(self, name: str) -> LocationSpec:
        for loc in self.locations:
            if loc.name == name:
                return loc
        raise UnknownLocation(name)

    def has_location(self, name: str) -> bool:
        return any(loc.name == name for loc in self.locations)

    @property
    def location_names(self) -> list[str]:
        return [loc.name for loc in self.locations]

    @property
    def resident_names(self) -> list[str]:
        return [r.name for r in self.residents]

    def resident(self, name: str) -> Resident | None:
        for r in self.residents:
            if r.name == name:
                return r
        return None


def validate_house(raw: HouseConfig) -> HouseConfig:
    """Return ``raw`` unchanged if it is consistent, else raise with every violation."""
    issues: list[Issue] = []
    names = set()
    for r in raw.residents:
        if not r.name or not _TOKEN.match(r.name):
            issues.append(Issue("BadName", f"resident name {r.name!r} must be a non-empty token"))
        if r.name in names:
            issues.append(Issue("DuplicateResident", f"resident {r.name!r} declared twice"))
        names.add(r.name)
        for attr in ("age", "weight"):
            value = getattr(r, attr)
            if value is not None and value < 0:
                issues.append(Issue("NegativeDemographic", f"resident {r.name!r} has negative {attr}"))

    seen = set()
    for loc in raw.locations:
        if not loc.name or not _TOKEN.match(loc.name):
            issues.append(Issue("BadName", f"location name {loc.name!r} must be a non-empty token"))
        if loc.name in seen:
            issues.append(Issue("DuplicateLocation", f"location {loc.name!r} declared twice"))
        seen.add(loc.name)
        if not loc.has_light:
            issues.append(Issue("NoLight", f"location {loc.name!r} has no light source"))
        if loc.has_tv and loc.kind is LocationKind.BATHROOM:
            issues.append(Issue("TvWithoutLocation", f"bathroom {loc.name!r} cannot hold a TV"))
        if not loc.shared and loc.access not in names:
            issues.append(
                Issue("UnknownResidentInAccess", f"location {loc.name!r} is private to unknown resident {loc.access!r}")
            )
    if raw.locations and not any(loc.shared for loc in raw.locations):
        issues.append(Issue("NoSharedLocation", "house needs at least one shared location"))
    if not raw.locations:
        issues.append(Issue("NoLocations", "house has no locations"))

    for device in DEVICES:
        if raw.ratings.rating(device) <= 0:
            issues.append(Issue("NonPositiveRating", f"{device} rating must be positive"))

    if issues:
        raise HouseConfigError(issues)
    return raw


def default_house() -> HouseConfig:
    """The five-location, two-resident house with TVs in both bedrooms and the living room."""
    locations = (
        LocationSpec("bedroom1", LocationKind.BEDROOM, has_tv=True, access="X"),
        LocationSpec("bathroom1", LocationKind.BATHROOM, access="X"),
        LocationSpec("bedroom2", LocationKind.BEDROOM, has_tv=True, access="Y"),
        LocationSpec("bathroom2", LocationKind.BATHROOM, access="Y"),
        LocationSpec("living_room", LocationKind.LIVING, has_tv=True),
    )
    residents = (Resident("X", age=66, weight=5), Resident("Y", age=61, weight=5))
    return HouseConfig(locations, residents, DeviceRatings(light_daW=2, tv_daW=2))


def can_occupy(house: HouseConfig, resident: str, loc: str, present=frozenset()) -> bool:
    """Access policy.

    ``present`` is the set of people already in ``loc``; a guest (anyone who is
    not a house resident) may enter a private room only while its owner is there.
    """
    spec = house.location(loc)
    if spec.shared or spec.owner == resident:
        return True
    if house.resident(resident) is None:
        return spec.owner in present
    return False


# -- house file -------------------------------------------------------------

_LOCATION_KEYS = {"kind", "light", "tv", "access"}
_RESIDENT_KEYS = {"age", "weight"}
_RATING_KEYS = {"light", "tv"}


def _parse_flag(value: str) -> bool:
    if value not in ("0", "1"):
        raise ValueError(f"expected 0 or 1, got {value!r}")
    return value == "1"


def parse_house(text: str) -> HouseConfig:
    """Parse the line-oriented house format and validate the result."""
    issues: list[Issue] = []
    locations: list[LocationSpec] = []
    residents: list[Resident] = []
    ratings = DeviceRatings()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()
        kv: dict[str, str] = {}
        positional: list[str] = []
        for tok in rest:
            if "=" in tok:
                k, v = tok.split("=", 1)
                if k in kv:
                    issues.append(Issue("DuplicateKey", f"key {k!r} repeated", lineno))
                kv[k] = v
            else:
                positional.append(tok)
        try:
            if head == "location":
                if len(positional) != 1:
                    raise ValueError("location needs exactly one name")
                _check_keys(kv, _LOCATION_KEYS, {"kind"})
                kind = LocationKind(kv["kind"])
                locations.append(
                    LocationSpec(
                        positional[0],
                        kind,
                        has_light=_parse_flag(kv.get("light", "1")),
                        has_tv=_parse_flag(kv.get("tv", "0")),
                        access=kv.get("access", SHARED),
                    )
                )
            elif head == "resident":
                if len(positional) != 1:
                    raise ValueError("resident needs exactly one name")
                _check_keys(kv, _RESIDENT_KEYS, set())
                residents.append(
                    Resident(
                        positional[0],
                        age=int(kv["age"]) if "age" in kv else None,
                        weight=int(kv["weight"]) if "weight" in kv else None,
                    )
                )
            elif head == "rating":
                if positional:
                    raise ValueError("rating takes only key=value pairs")
                _check_keys(kv, _RATING_KEYS, _RATING_KEYS)
                ratings = DeviceRatings(light_daW=int(kv["light"]), tv_daW=int(kv["tv"]))
            else:
                issues.append(Issue("UnknownDirective", f"unknown directive {head!r}", lineno))
        except KeyError as exc:
            issues.append(Issue("UnknownKey", str(exc.args[0]), lineno))
        except ValueError as exc:
            issues.append(Issue("BadValue", str(exc), lineno))

    if issues:
        raise HouseConfigError(issues)
    return validate_house(HouseConfig(tuple(locations), tuple(residents), ratings))


def _check_keys(kv: dict, allowed: set, required: set) -> None:
    unknown = sorted(set(kv) - allowed)
    if unknown:
        raise KeyError(f"unknown key(s): {', '.join(unknown)}")
    missing = sorted(required - set(kv))
    if missing:
        raise KeyError(f"missing key(s): {', '.join(missing)}")


def format_house(house: HouseConfig) -> str:
    lines = [f"rating light={house.ratings.light_daW} tv={house.ratings.tv_daW}"]
    for r in house.residents:
        parts = [f"resident {r.name}"]
        if r.age is not None:
            parts.append(f"age={r.age}")
        if r.weight is not None:
            parts.append(f"weight={r.weight}")
        lines.append(" ".join(parts))
    for loc in house.locations:
        lines.append(
            f"location {loc.name} kind={loc.kind.value} light={int(loc.has_light)} "
            f"tv={int(loc.has_tv)} access={loc.access}"
        )
    return "\n".join(lines) + "\n"


# -- world state ------------------------------------------------------------


@dataclass
class LocationState:
    occupants: set[str] = field(default_factory=set)
    dark: bool = False
    light_on: bool = False
    tv_on: bool = False

    def device_on(self, device: str) -> bool:
        return self.light_on if device == "light" else self.tv_on

    def set_device(self, device: str, on: bool) -> None:
        if device == "light":
            self.light_on = on
        else:
            self.tv_on = on


@dataclass
class ResidentState:
    position: str | None = None  # None means outside the house
    asleep: bool = False


@dataclass
class WorldState:
    """Everything that changes during a run. Owned by exactly one run."""

    house: HouseConfig
    clock: int = 0
    locations: dict[str, LocationState] = field(default_factory=dict)
    residents: dict[str, ResidentState] = field(default_factory=dict)

    @classmethod
    def initial(cls, house: HouseConfig) -> WorldState:
        return cls(
            house=house,
            locations={loc.name: LocationState() for loc in house.locations},
            residents={name: ResidentState() for name in house.resident_names},
        )

    def add_person(self, name: str) -> None:
        self.residents.setdefault(name, ResidentState())

    def snapshot(self) -> WorldState:
        # house is immutable and shared
        return WorldState(
            self.house, self.clock, copy.deepcopy(self.locations), copy.deepcopy(self.residents)
        )

    def occupied(self, loc: str) -> bool:
        return bool(self.locations[loc].occupants)

    def asleep_any(self, loc: str) -> bool:
        return any(self.residents[p].asleep for p in self.locations[loc].occupants)

    def outside(self) -> list[str]:
        return [name for name, st in self.residents.items() if st.position is None]

    def check_invariants(self) -> list[str]:
        """Return a description of every broken invariant (empty when consistent)."""
        problems = []
        for name, st in self.residents.items():
            holders = [loc for loc, ls in self.locations.items() if name in ls.occupants]
            expected = [] if st.position is None else [st.position]
            if holders != expected:
                problems.append(f"{name} position {st.position!r} but listed in {holders}")
            if st.asleep and (
                st.position is None or self.house.location(st.position).kind is not LocationKind.BEDROOM
            ):
                problems.append(f"{name} asleep outside a bedroom")
        for loc, ls in self.locations.items():
            spec = self.house.location(loc)
            if ls.light_on and not spec.has_light:
                problems.append(f"light on in {loc} which has none")
            if ls.tv_on and not spec.has_tv:
                problems.append(f"tv on in {loc} which has none")
        return problems
