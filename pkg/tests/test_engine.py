from fractions import Fraction

import pytest

from smarthome.engine import (
    EnergyLedger,
    LedgerEntry,
    apply_event,
    energy_totals,
    run_simulation,
)
from smarthome.errors import IllegalTransition, OpenInterval
from smarthome.house import DeviceRatings, WorldState
from smarthome.report import result_to_jsonl
from smarthome.rule_dsl import parse_rules
from smarthome.rules import RuleSet
from smarthome.scenario import EventKind, ScenarioEvent, Timeline, parse_scenario

from timelines import random_timeline


def test_apply_enter(house):
    w = apply_event(WorldState.initial(house), ScenarioEvent(0, EventKind.ENTER, "X", "bedroom1"))
    assert "X" in w.locations["bedroom1"].occupants
    assert w.residents["X"].position == "bedroom1"


def test_apply_move_between_rooms(house):
    w = WorldState.initial(house)
    apply_event(w, ScenarioEvent(0, EventKind.ENTER, "X", "bedroom1"))
    apply_event(w, ScenarioEvent(5, EventKind.ENTER, "X", "living_room"))
    assert not w.occupied("bedroom1")
    assert w.locations["living_room"].occupants == {"X"}
    assert w.check_invariants() == []


def test_apply_sleep_and_wake(house):
    w = WorldState.initial(house)
    apply_event(w, ScenarioEvent(0, EventKind.ENTER, "X", "bedroom1"))
    apply_event(w, ScenarioEvent(0, EventKind.SLEEP, "X"))
    assert w.residents["X"].asleep
    apply_event(w, ScenarioEvent(1, EventKind.WAKE, "X"))
    with pytest.raises(IllegalTransition):
        apply_event(w, ScenarioEvent(2, EventKind.WAKE, "X"))


def test_apply_manual_tv(house):
    w = WorldState.initial(house)
    apply_event(w, ScenarioEvent(0, EventKind.ENTER, "Y", "bedroom2"))
    apply_event(w, ScenarioEvent(0, EventKind.TV_ON, "Y", "bedroom2"))
    assert w.locations["bedroom2"].tv_on
    apply_event(w, ScenarioEvent(0, EventKind.TV_OFF, "Y", "bedroom2"))
    assert not w.locations["bedroom2"].tv_on


def test_illegal_transition_reports_event_index(house, rules):
    # skip validation by handing the engine an already-"validated" bogus timeline
    from smarthome.scenario import ValidatedTimeline

    t = ValidatedTimeline(
        (ScenarioEvent(0, EventKind.ENTER, "X", "bedroom1"), ScenarioEvent(1, EventKind.WAKE, "X"),
         ScenarioEvent(2, EventKind.END))
    )
    with pytest.raises(IllegalTransition) as exc:
        run_simulation(house, rules, t)
    assert exc.value.event_index == 1


def test_only_end(house, rules):
    result = run_simulation(house, rules, parse_scenario("00:00 end"))
    assert len(result.log) == 0
    assert result.ledger.entries == []
    assert result.alerts == []


def test_scenario1_tallies(house, rules, scenario1):
    result = run_simulation(house, rules, scenario1)
    assert result.ledger.hours("light") == 13
    assert result.ledger.hours("tv") == 7
    assert energy_totals(result.ledger, house.ratings) == {"house": 40}


def test_scenario2_tallies(house, rules, scenario2):
    result = run_simulation(house, rules, scenario2)
    assert result.ledger.hours("light") == 9
    assert result.ledger.hours("tv") == 4
    assert energy_totals(result.ledger, house.ratings)["house"] == 26


def test_scenario1_intervals(house, rules, scenario1):
    result = run_simulation(house, rules, scenario1)
    got = {(e.location, e.device, e.on_from // 60, e.on_to // 60) for e in result.ledger.entries}
    assert got == {
        ("bedroom1", "light", 0, 2),
        ("living_room", "light", 1, 2),
        ("bedroom2", "light", 2, 4),
        ("living_room", "light", 3, 6),
        ("living_room", "tv", 3, 6),
        ("bedroom2", "light", 6, 10),
        ("bedroom2", "tv", 6, 10),
        ("bedroom1", "light", 9, 10),
    }


def test_ledger_intervals_within_run(house, rules, scenario2):
    result = run_simulation(house, rules, scenario2)
    for e in result.ledger.entries:
        assert 0 <= e.on_from < e.on_to <= scenario2.end


def test_energy_groupings_are_additive(house, rules, scenario2):
    ledger = run_simulation(house, rules, scenario2).ledger
    total = energy_totals(ledger, house.ratings)["house"]
    for group in ("location", "device", "resident"):
        assert sum(energy_totals(ledger, house.ratings, group).values()) == total


def test_energy_totals_empty_ledger():
    ratings = DeviceRatings()
    assert energy_totals(EnergyLedger(), ratings) == {"house": 0}
    assert energy_totals(EnergyLedger(), ratings, "resident", groups=["X", "Y"]) == {"X": 0, "Y": 0}


def test_energy_totals_open_interval():
    ledger = EnergyLedger()
    ledger.open("bedroom1", "light", 0, ("X",))
    with pytest.raises(OpenInterval):
        energy_totals(ledger, DeviceRatings())


def test_equal_split_and_house_bucket():
    ledger = EnergyLedger(
        [
            LedgerEntry("living_room", "light", 0, 120, ("V", "X", "Y")),
            LedgerEntry("bedroom1", "light", 0, 30, ()),
        ]
    )
    totals = energy_totals(ledger, DeviceRatings(2, 2), "resident")
    assert totals == {"V": Fraction(4, 3), "X": Fraction(4, 3), "Y": Fraction(4, 3), "house": 1}


def test_occupancy_change_splits_interval(house, rules):
    t = parse_scenario(
        "00:00 darkness living_room dark\n"
        "00:00 enter X living_room\n"
        "01:00 enter Y living_room\n"
        "02:00 leave X\n"
        "03:00 end\n"
    )
    entries = run_simulation(house, rules, t).ledger.entries
    assert [(e.on_from, e.on_to, e.occupants) for e in entries] == [
        (0, 60, ("X",)),
        (60, 120, ("X", "Y")),
        (120, 180, ("Y",)),
    ]
    totals = energy_totals(EnergyLedger(entries), house.ratings, "resident")
    assert totals == {"X": 3, "Y": 3}


def test_user_rule_empty_room_goes_to_house_bucket(house):
    rules = parse_rules("rule always_on priority 1 when event.kind == darkness then turn_on light in bathroom1 end")
    t = parse_scenario("00:00 darkness bathroom1 dark\n01:00 end\n")
    result = run_simulation(house, rules, t)
    assert energy_totals(result.ledger, house.ratings, "resident") == {"house": 2}


def test_alert_and_record_actions(house):
    rules = parse_rules('rule note priority 1 when event.kind == toilet then alert "flush"; record toileting end')
    t = parse_scenario("00:00 enter X bathroom1\n00:05 toilet X bathroom1\n01:00 end\n")
    result = run_simulation(house, rules, t)
    assert result.alerts == [(5, "flush")]
    assert [r.tag for r in result.log.by("agent")] == ["alert", "record:toileting"]


def test_conflicting_actions_last_wins(house, caplog):
    rules = parse_rules(
        "rule on priority 9 when event.kind == enter then turn_on light in event.location end\n"
        "rule off priority 1 when event.kind == enter then turn_off light in event.location end\n"
    )
    t = parse_scenario("00:00 enter X bedroom1\n01:00 end\n")
    with caplog.at_level("WARNING"):
        result = run_simulation(house, rules, t)
    assert result.ledger.entries == []
    assert not result.final_world.locations["bedroom1"].light_on
    assert "conflicting" in caplog.text


def test_no_chaining(house):
    # turning a light on must not re-trigger rules that look at light_on
    rules = parse_rules(
        "rule on priority 9 when event.kind == enter then turn_on light in event.location end\n"
        "rule echo priority 1 when light_on(event.location) then record lit end\n"
    )
    t = parse_scenario("00:00 enter X bedroom1\n01:00 end\n")
    result = run_simulation(house, rules, t)
    assert [r.tag for r in result.log.by("agent")] == ["light_on"]


def test_determinism(house, rules):
    t = random_timeline(7, house)
    a = result_to_jsonl(run_simulation(house, rules, t))
    b = result_to_jsonl(run_simulation(house, rules, t))
    assert a == b


def test_world_invariants_on_random_runs(house, rules):
    def check(index, event, world):
        assert world.check_invariants() == []
        inside = sum(len(s.occupants) for s in world.locations.values())
        assert inside + len(world.outside()) == len(world.residents)

    for seed in range(20):
        run_simulation(house, rules, random_timeline(seed, house), observer=check)


def test_empty_ruleset_never_lights(house):
    result = run_simulation(house, RuleSet(), random_timeline(3, house))
    assert all(e.device == "tv" for e in result.ledger.entries)


def test_timeline_is_validated(house, rules):
    from smarthome.errors import TimelineError

    with pytest.raises(TimelineError):
        run_simulation(house, rules, Timeline((ScenarioEvent(0, EventKind.ENTER, "X", "bedroom2"),
                                               ScenarioEvent(1, EventKind.END))))
