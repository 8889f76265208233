"""Exception hierarchy.

Every error carries a ``prefix`` naming the subsystem that raised it; the CLI
uses it to build single-line diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass


class SmartHomeError(Exception):
    prefix = "smarthome"
    code = "Error"


@dataclass(frozen=True)
class Issue:
    """One problem found while parsing or validating an input file."""

    code: str
    message: str
    line: int | None = None
    column: int | None = None

    def location(self) -> str:
        if self.line is None:
            return ""
        if self.column is None:
            return f"line {self.line}"
        return f"line {self.line}:{self.column}"

    def __str__(self) -> str:
        where = self.location()
        return f"{self.code} {where}: {self.message}" if where else f"{self.code}: {self.message}"


class IssuesError(SmartHomeError):
    """Raised with every issue collected, not just the first."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))

    @property
    def codes(self) -> list[str]:
        return [i.code for i in self.issues]

    @property
    def code(self) -> str:  # type: ignore[override]
        return self.issues[0].code if self.issues else "Error"


class HouseConfigError(IssuesError):
    prefix = "house"


class ScenarioParseError(IssuesError):
    prefix = "scenario"


class TimelineError(IssuesError):
    prefix = "timeline"


class RuleParseError(IssuesError):
    prefix = "rules"


class DatasetError(IssuesError):
    prefix = "dataset"


class UnknownLocation(SmartHomeError, KeyError):
    prefix = "house"
    code = "UnknownLocation"

    def __str__(self) -> str:
        return f"unknown location {self.args[0]!r}"


class IllegalTransition(SmartHomeError):
    prefix = "engine"
    code = "IllegalTransition"

    def __init__(self, message: str, event_index: int | None = None):
        self.event_index = event_index
        super().__init__(message)

    def __str__(self) -> str:
        msg = super().__str__()
        return msg if self.event_index is None else f"event {self.event_index}: {msg}"


class OpenInterval(SmartHomeError):
    prefix = "energy"
    code = "OpenInterval"


class ClassifierError(SmartHomeError, ValueError):
    prefix = "classify"

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class MissingDemographics(SmartHomeError):
    prefix = "health"
    code = "MissingDemographics"


class MissingStore(SmartHomeError):
    prefix = "store"
    code = "MissingStore"
