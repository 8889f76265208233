"""Sleep sessions, toileting counts and the per-window health verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .activity import ActivityLog
from .classify import Dataset, KmcModel, fit_kmc, kmc_label, knn_classify
from .errors import MissingDemographics
from .house import HouseConfig

DAY = 24 * 60


class SleepQuality(str, Enum):
    TOO_SHORT = "TooShort"
    NORMAL = "Normal"
    TOO_LONG = "TooLong"


@dataclass(frozen=True)
class SleepPattern:
    min_hours: float = 6
    max_hours: float = 9
    window_minutes: int = DAY

    def __post_init__(self):
        if not 0 < self.min_hours < self.max_hours:
            raise ValueError("sleep pattern needs 0 < min_hours < max_hours")
        if self.window_minutes <= 0:
            raise ValueError("window must be positive")


@dataclass(frozen=True)
class SleepSession:
    resident: str
    start: int
    stop: int
    open_ended: bool = False

    @property
    def hours(self) -> Fraction:
        return Fraction(self.stop - self.start, 60)


@dataclass(frozen=True)
class HealthProfile:
    age: int
    weight: int
    toileting: int

    def __post_init__(self):
        if min(self.age, self.weight, self.toileting) < 0:
            raise ValueError("health profile values must be non-negative")

    @property
    def point(self) -> tuple[int, int, int]:
        return (self.age, self.weight, self.toileting)


def extract_sleep_sessions(log: ActivityLog) -> list[SleepSession]:
    """Pair each sleep with the same resident's next wake; unmatched sleeps run to the end."""
    asleep_since: dict[str, int] = {}
    sessions = []
    for rec in log:
        if rec.tag == "sleep":
            asleep_since.setdefault(rec.actor, rec.minute)
        elif rec.tag == "wake" and rec.actor in asleep_since:
            start = asleep_since.pop(rec.actor)
            if rec.minute > start:
                sessions.append(SleepSession(rec.actor, start, rec.minute))
    for who, start in asleep_since.items():
        if log.end > start:
            sessions.append(SleepSession(who, start, log.end, open_ended=True))
    return sorted(sessions, key=lambda s: (s.start, s.resident))


def sleep_minutes_by_window(sessions, resident: str, window_minutes: int = DAY) -> dict[int, int]:
    """Minutes asleep per window index; sessions crossing a boundary are split."""
    totals: dict[int, int] = {}
    for s in sessions:
        if s.resident != resident:
            continue
        t = s.start
        while t < s.stop:
            w = t // window_minutes
            edge = min(s.stop, (w + 1) * window_minutes)
            totals[w] = totals.get(w, 0) + edge - t
            t = edge
    return totals


def classify_sleep(total_hours, pattern: SleepPattern = SleepPattern()) -> SleepQuality:
    if total_hours < 0:
        raise ValueError("sleep total cannot be negative")
    if total_hours < pattern.min_hours:
        return SleepQuality.TOO_SHORT
    if total_hours > pattern.max_hours:
        return SleepQuality.TOO_LONG
    return SleepQuality.NORMAL


def toileting_stats(log: ActivityLog, resident: str, window: int, window_minutes: int = DAY) -> int:
    lo, hi = window * window_minutes, (window + 1) * window_minutes
    return sum(1 for r in log if r.tag == "toilet" and r.actor == resident and lo <= r.minute < hi)


def build_profile(house: HouseConfig, resident: str, toileting_count: int) -> HealthProfile:
    r = house.resident(resident)
    if r is None or r.age is None or r.weight is None:
        raise MissingDemographics(f"no age/weight on record for {resident!r}")
    return HealthProfile(r.age, r.weight, toileting_count)


@dataclass(frozen=True)
class HealthConfig:
    """What the health agent checks.

    ``dataset`` switches on toileting classification; ``method`` picks the
    verdict that raises alerts (``"knn"`` with ``k`` neighbours, or ``"kmc"``).
    """

    pattern: SleepPattern = SleepPattern()
    dataset: Dataset | None = None
    method: str = "knn"
    k: int = 5
    report_ks: tuple[int, ...] = (3, 5)

    @property
    def primary(self) -> str:
        return f"knn-{self.k}" if self.method == "knn" else "kmc"


@dataclass(frozen=True)
class WindowSummary:
    resident: str
    window: int
    start: int
    stop: int
    complete: bool
    sleep_minutes: int
    quality: SleepQuality
    toileting: int
    verdicts: dict[str, bool] = field(default_factory=dict)

    @property
    def sleep_hours(self) -> Fraction:
        return Fraction(self.sleep_minutes, 60)


def _verdicts(config: HealthConfig, model: KmcModel | None, profile: HealthProfile) -> dict[str, bool]:
    ds = config.dataset
    out = {}
    for k in sorted(set(config.report_ks) | ({config.k} if config.method == "knn" else set())):
        if k <= len(ds):
            out[f"knn-{k}"] = knn_classify(ds, profile, k).abnormal
    if model is not None:
        out["kmc"] = kmc_label(model, ds, profile)
    return out


def summarize_health(log: ActivityLog, house: HouseConfig, config: HealthConfig = HealthConfig()) -> list[WindowSummary]:
    """One summary per house resident per window; the last window may be partial."""
    width = config.pattern.window_minutes
    windows = max(1, -(-log.end // width)) if log.end > 0 else 0
    sessions = extract_sleep_sessions(log)
    model = fit_kmc(config.dataset) if config.dataset is not None and len(config.dataset) >= 2 else None
    out = []
    for r in house.residents:
        asleep = sleep_minutes_by_window(sessions, r.name, width)
        for w in range(windows):
            start, stop = w * width, (w + 1) * width
            minutes = asleep.get(w, 0)
            count = toileting_stats(log, r.name, w, width)
            verdicts = {}
            if config.dataset is not None and len(config.dataset):
                try:
                    verdicts = _verdicts(config, model, build_profile(house, r.name, count))
                except MissingDemographics:
                    pass
            out.append(
                WindowSummary(
                    r.name, w, start, min(stop, log.end), stop <= log.end, minutes,
                    classify_sleep(Fraction(minutes, 60), config.pattern), count, verdicts,
                )
            )
    return out


def health_alerts(summaries: list[WindowSummary], config: HealthConfig = HealthConfig()) -> list[tuple[int, str]]:
    """Alerts for completed windows only, stamped at the window's closing minute."""
    alerts = []
    for s in summaries:
        if not s.complete:
            continue
        if s.quality is not SleepQuality.NORMAL:
            alerts.append((s.stop, f"sleep {s.quality.value}: {s.resident} slept {_hours(s.sleep_hours)} h in window {s.window}"))
        if s.verdicts.get(config.primary):
            alerts.append(
                (s.stop, f"toileting abnormal ({config.primary}): {s.resident} used the toilet {s.toileting} times in window {s.window}")
            )
    return alerts


def _hours(h: Fraction) -> str:
    return str(int(h)) if h.denominator == 1 else f"{float(h):.2f}"
