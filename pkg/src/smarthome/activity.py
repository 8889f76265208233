"""Activity log records and occupancy replay."""

from __future__ import annotations

from dataclasses import dataclass, field

AGENT = "agent"
ENVIRONMENT = "environment"


@dataclass(frozen=True)
class LogRecord:
    minute: int
    actor: str  # a resident, "agent" or "environment"
    tag: str
    location: str | None = None
    rule: str | None = None


@dataclass
class ActivityLog:
    records: list[LogRecord] = field(default_factory=list)
    end: int = 0

    def append(self, record: LogRecord) -> None:
        if self.records and record.minute < self.records[-1].minute:
            raise ValueError("activity log must stay chronological")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def by(self, actor: str) -> list[LogRecord]:
        return [r for r in self.records if r.actor == actor]


@dataclass(frozen=True)
class Stay:
    resident: str
    location: str
    start: int
    stop: int

    @property
    def minutes(self) -> int:
        return self.stop - self.start


def occupancy_stays(log: ActivityLog) -> list[Stay]:
    """Rebuild who was where, and when, from enter/leave records."""
    current: dict[str, tuple[str, int]] = {}
    stays = []
    for rec in log:
        if rec.tag not in ("enter", "leave") or rec.actor in (AGENT, ENVIRONMENT):
            continue
        prev = current.pop(rec.actor, None)
        if prev is not None and rec.minute > prev[1]:
            stays.append(Stay(rec.actor, prev[0], prev[1], rec.minute))
        if rec.tag == "enter":
            current[rec.actor] = (rec.location, rec.minute)
    for who, (loc, start) in current.items():
        if log.end > start:
            stays.append(Stay(who, loc, start, log.end))
    return sorted(stays, key=lambda s: (s.start, s.resident, s.location))
