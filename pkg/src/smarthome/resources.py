"""Access to the files shipped in ``smarthome/data``."""

from __future__ import annotations

from importlib import resources
from pathlib import Path

REFERENCE_HOUSE = "reference_house.txt"
SCENARIO_1 = "scenario1.txt"
SCENARIO_2 = "scenario2.txt"
BUILTIN_RULES = "builtin.rules"
TRAINING_SET = "training.csv"
QUERIES = "queries.csv"


def data_path(name: str) -> Path:
    return Path(str(resources.files("smarthome") / "data" / name))


def read_data(name: str) -> str:
    return (resources.files("smarthome") / "data" / name).read_text(encoding="utf-8")
