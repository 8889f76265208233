"""Text report and JSON-lines serialization of simulation results."""

from __future__ import annotations

import hashlib
import json
from collections import defaultdict
from fractions import Fraction

from .activity import ActivityLog, LogRecord, occupancy_stays
from .engine import EnergyLedger, LedgerEntry, SimulationResult, energy_totals
from .errors import SmartHomeError
from .health import HealthConfig, SleepPattern, extract_sleep_sessions, summarize_health
from .house import LocationState, ResidentState, WorldState, format_house, parse_house
from .scenario import format_time

FORMAT = "smarthome-result"
VERSION = 1
REPORT_HEADER = "smarthome-report v1"
UNIT = "daW·h"


class ResultFormatError(SmartHomeError):
    prefix = "store"
    code = "BadResultFile"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


def fmt_number(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{float(x):.3f}".rstrip("0")


def fmt_hours(minutes: int) -> str:
    return f"{fmt_number(Fraction(minutes, 60))} h"


# -- structured file ----------------------------------------------------------


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def result_to_jsonl(result: SimulationResult, meta: dict | None = None) -> str:
    header = {
        "type": "header",
        "format": FORMAT,
        "version": VERSION,
        "end": result.log.end,
        "house": format_house(result.house),
    }
    header.update(meta or {})
    lines = [_dump(header)]
    for r in result.log:
        lines.append(_dump({"type": "log", "minute": r.minute, "actor": r.actor, "tag": r.tag,
                            "location": r.location, "rule": r.rule}))
    for e in result.ledger.entries:
        lines.append(_dump({"type": "ledger", "location": e.location, "device": e.device,
                            "on_from": e.on_from, "on_to": e.on_to, "occupants": list(e.occupants)}))
    for minute, message in result.alerts:
        lines.append(_dump({"type": "alert", "minute": minute, "message": message}))
    w = result.final_world
    lines.append(_dump({
        "type": "world",
        "clock": w.clock,
        "locations": {name: {"occupants": sorted(s.occupants), "dark": s.dark, "light_on": s.light_on,
                             "tv_on": s.tv_on} for name, s in w.locations.items()},
        # a list keeps residents ahead of visitors under sort_keys
        "residents": [{"name": name, "position": s.position, "asleep": s.asleep} for name, s in w.residents.items()],
    }))
    return "\n".join(lines) + "\n"


def result_from_jsonl(text: str) -> tuple[SimulationResult, dict]:
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ResultFormatError(f"line {lineno}: {exc.msg}") from None
    if not records or records[0].get("type") != "header" or records[0].get("format") != FORMAT:
        raise ResultFormatError("missing smarthome-result header")
    header = records[0]
    if header.get("version") != VERSION:
        raise ResultFormatError(f"unsupported version {header.get('version')!r}")
    house = parse_house(header["house"])
    log = ActivityLog(end=header["end"])
    entries, alerts, world = [], [], None
    for rec in records[1:]:
        kind = rec.get("type")
        if kind == "log":
            log.append(LogRecord(rec["minute"], rec["actor"], rec["tag"], rec["location"], rec["rule"]))
        elif kind == "ledger":
            entries.append(LedgerEntry(rec["location"], rec["device"], rec["on_from"], rec["on_to"],
                                       tuple(rec["occupants"])))
        elif kind == "alert":
            alerts.append((rec["minute"], rec["message"]))
        elif kind == "world":
            world = WorldState(
                house,
                rec["clock"],
                {n: LocationState(set(s["occupants"]), s["dark"], s["light_on"], s["tv_on"])
                 for n, s in rec["locations"].items()},
                {s["name"]: ResidentState(s["position"], s["asleep"]) for s in rec["residents"]},
            )
        else:
            raise ResultFormatError(f"unknown record type {kind!r}")
    if world is None:
        raise ResultFormatError("missing world record")
    return SimulationResult(log, EnergyLedger(entries), alerts, world), header


# -- text report --------------------------------------------------------------


def _span(start: int, stop: int) -> str:
    return f"{format_time(start)}-{format_time(stop)} ({fmt_hours(stop - start)})"


def format_report(result: SimulationResult, meta: dict | None = None, health: HealthConfig | None = None) -> str:
    meta = meta or {}
    house = result.house
    ratings = house.ratings
    ledger = result.ledger
    out = [REPORT_HEADER]
    for key in ("timestamp", "scenario"):
        if meta.get(key):
            out.append(f"{key}: {meta[key]}")
    for key, value in sorted(meta.get("digests", {}).items()):
        out.append(f"{key}-digest: {value}")
    out.append(f"duration: {format_time(result.log.end)}")

    out += ["", "[energy]"]
    total = energy_totals(ledger, ratings, "house")["house"]
    out.append(f"total: {fmt_number(total)} {UNIT}")
    for who, e in energy_totals(ledger, ratings, "resident", groups=result.people).items():
        out.append(f"resident {who}: {fmt_number(e)} {UNIT}")
    for device, e in energy_totals(ledger, ratings, "device", groups=("light", "tv")).items():
        out.append(f"device {device}: {fmt_number(e)} {UNIT} over {fmt_number(ledger.hours(device))} h")

    by_loc = energy_totals(ledger, ratings, "location", groups=house.location_names)
    stays = occupancy_stays(result.log)
    sessions = extract_sleep_sessions(result.log)
    toilets = defaultdict(lambda: defaultdict(int))
    for r in result.log:
        if r.tag == "toilet":
            toilets[r.location][r.actor] += 1

    out += ["", "[locations]"]
    for loc in house.locations:
        name = loc.name
        entries = [e for e in ledger.entries if e.location == name]
        parts = []
        for device in ("light", "tv"):
            e_dev = sum((Fraction(ratings.rating(device) * e.minutes, 60) for e in entries if e.device == device),
                        Fraction(0))
            if loc.has(device):
                parts.append(f"{device} {fmt_number(e_dev)}")
        out.append(f"location {name}")
        out.append(f"  energy: {fmt_number(by_loc[name])} {UNIT} ({', '.join(parts)})")
        occupied = defaultdict(int)
        for s in stays:
            if s.location == name:
                occupied[s.resident] += s.minutes
        occ = ", ".join(f"{who} {fmt_hours(m)}" for who, m in sorted(occupied.items())) or "none"
        out.append(f"  occupied: {occ}")
        for s in stays:
            if s.location == name:
                out.append(f"  activity: stay {s.resident} {_span(s.start, s.stop)}")
        for s in sessions:
            where = _location_at(stays, s.resident, s.start)
            if where == name:
                suffix = " open-ended" if s.open_ended else ""
                out.append(f"  activity: sleep {s.resident} {_span(s.start, s.stop)}{suffix}")
        for e in _merged(entries, "tv"):
            out.append(f"  activity: tv {_span(*e)}")
        for who, n in sorted(toilets[name].items()):
            out.append(f"  activity: toilet {who} {n} time(s)")

    health = health or HealthConfig(pattern=SleepPattern(*meta["sleep_pattern"]) if meta.get("sleep_pattern") else SleepPattern())
    out += ["", "[health]"]
    for s in summarize_health(result.log, house, health):
        state = "complete" if s.complete else "partial"
        line = (f"{s.resident} window {s.window} {format_time(s.start)}-{format_time(s.stop)} {state}: "
                f"sleep {fmt_hours(s.sleep_minutes)} {s.quality.value}; toileting {s.toileting}")
        if s.verdicts:
            line += "; " + ", ".join(f"{m}={'abnormal' if v else 'normal'}" for m, v in s.verdicts.items())
        out.append(line)

    out += ["", "[alerts]"]
    for minute, message in result.alerts:
        out.append(f"{format_time(minute)} {message}")
    if not result.alerts:
        out.append("none")
    return "\n".join(out) + "\n"


def _location_at(stays, resident: str, minute: int) -> str | None:
    for s in stays:
        if s.resident == resident and s.start <= minute < s.stop:
            return s.location
    return None


def _merged(entries: list[LedgerEntry], device: str) -> list[tuple[int, int]]:
    """Join adjacent pieces split by occupancy changes back into on-periods."""
    spans: list[list[int]] = []
    for e in sorted((e for e in entries if e.device == device), key=lambda e: e.on_from):
        if spans and spans[-1][1] == e.on_from:
            spans[-1][1] = e.on_to
        else:
            spans.append([e.on_from, e.on_to])
    return [tuple(s) for s in spans]
