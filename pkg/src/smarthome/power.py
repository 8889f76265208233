"""The power agent's builtin rules and per-resident energy attribution."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .engine import SimulationResult, energy_totals
from .house import DeviceRatings
from .resources import BUILTIN_RULES, read_data
from .rule_dsl import parse_rules
from .rules import RuleSet

OCCUPANCY_RULES = "occupancy_lights.rules"


def builtin_rules_text() -> str:
    return read_data(BUILTIN_RULES)


@lru_cache(maxsize=None)
def builtin_power_rules() -> RuleSet:
    return parse_rules(builtin_rules_text())


@lru_cache(maxsize=None)
def occupancy_light_rules() -> RuleSet:
    """Baseline that keeps lights on in every occupied room, for savings comparisons."""
    return parse_rules(read_data(OCCUPANCY_RULES))


def attribute_energy(result: SimulationResult, ratings: DeviceRatings | None = None) -> dict[str, Fraction]:
    """daW·h per person, splitting shared intervals equally; everyone present in the run is listed."""
    ratings = ratings or result.house.ratings
    return energy_totals(result.ledger, ratings, "resident", groups=result.people)
