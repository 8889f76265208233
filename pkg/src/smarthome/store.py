"""On-disk run store: one JSON-lines file per simulation run."""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from filelock import FileLock

from .errors import MissingStore
from .report import result_from_jsonl

TIMESTAMP_RE = re.compile(r"^\d{8}T\d{6}Z$")
SUFFIX = ".jsonl"


def now_timestamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def check_timestamp(ts: str) -> str:
    if not TIMESTAMP_RE.match(ts):
        raise ValueError(f"timestamp must look like 20240101T000000Z, got {ts!r}")
    return ts


@dataclass(frozen=True)
class StoredRun:
    name: str
    timestamp: str
    path: Path


class RunStore:
    def __init__(self, root, create: bool = False):
        self.root = Path(root)
        if not self.root.is_dir():
            if not create:
                raise MissingStore(f"no run store at {self.root}")
            self.root.mkdir(parents=True)
        self._lock = FileLock(str(self.root / ".lock"))

    def runs(self) -> list[StoredRun]:
        out = []
        for path in sorted(self.root.glob(f"*{SUFFIX}")):
            name = path.name[: -len(SUFFIX)]
            ts = name.split("-", 1)[0]
            if TIMESTAMP_RE.match(ts):
                out.append(StoredRun(name, ts, path))
        return out

    def save(self, text: str, timestamp: str, scenario: str) -> StoredRun:
        check_timestamp(timestamp)
        slug = re.sub(r"[^A-Za-z0-9_.]+", "_", scenario) or "scenario"
        with self._lock:
            name = f"{timestamp}-{slug}"
            n = 2
            while (self.root / f"{name}{SUFFIX}").exists():
                name = f"{timestamp}-{slug}.{n}"
                n += 1
            path = self.root / f"{name}{SUFFIX}"
            path.write_text(text, encoding="utf-8")
        return StoredRun(name, timestamp, path)

    def load(self, run: StoredRun):
        return result_from_jsonl(run.path.read_text(encoding="utf-8"))

    def prune(self, before: str) -> int:
        """Delete runs stamped strictly earlier than ``before``; returns how many went."""
        check_timestamp(before)
        with self._lock:
            doomed = [r for r in self.runs() if r.timestamp < before]
            for r in doomed:
                r.path.unlink()
        return len(doomed)
