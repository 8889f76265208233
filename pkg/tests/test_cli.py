"""CLI, report and run-store regression tests."""

import csv
from pathlib import Path

import pytest
from click.testing import CliRunner

from smarthome.cli import cli
from smarthome.engine import run_simulation
from smarthome.errors import MissingStore
from smarthome.report import format_report, result_from_jsonl, result_to_jsonl
from smarthome.resources import REFERENCE_HOUSE, SCENARIO_1, SCENARIO_2, QUERIES, data_path
from smarthome.store import RunStore

GOLDEN = Path(__file__).parent / "golden"
TS = "20260101T000000Z"


@pytest.fixture
def runner():
    return CliRunner()


def _simulate(runner, scenario, *extra):
    return runner.invoke(
        cli, ["simulate", str(data_path(REFERENCE_HOUSE)), str(data_path(scenario)), "--timestamp", TS, *extra]
    )


@pytest.mark.parametrize("scenario, golden, total", [(SCENARIO_1, "scenario1", 40), (SCENARIO_2, "scenario2", 26)])
def test_simulate_matches_golden(runner, scenario, golden, total):
    result = _simulate(runner, scenario)
    assert result.exit_code == 0, result.output
    assert f"total: {total} daW·h" in result.output
    assert result.output == (GOLDEN / f"{golden}.report.txt").read_text(encoding="utf-8")


def test_simulate_is_byte_stable(runner, tmp_path):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.txt"
        js = tmp_path / f"r{i}.jsonl"
        assert _simulate(runner, SCENARIO_1, "--out", str(out), "--json", str(js)).exit_code == 0
        outs.append((out.read_bytes(), js.read_bytes()))
    assert outs[0] == outs[1]


def test_timestamp_from_environment(runner):
    result = runner.invoke(
        cli,
        ["simulate", str(data_path(REFERENCE_HOUSE)), str(data_path(SCENARIO_1))],
        env={"SMARTHOME_TIMESTAMP": "20250505T050505Z"},
    )
    assert "timestamp: 20250505T050505Z" in result.output


def test_access_violation_exit_code(runner, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("00:00 enter X living_room\n00:30 enter X bedroom2\n01:00 end\n")
    result = runner.invoke(cli, ["simulate", str(data_path(REFERENCE_HOUSE)), str(bad)])
    assert result.exit_code == 1
    first = result.stderr.splitlines()[0]
    assert first.startswith("error: timeline: AccessViolation: ")
    assert first.endswith("line 2")


@pytest.mark.parametrize(
    "filename, content, prefix",
    [
        ("house.txt", "location a kind=garage\n", "error: house: BadValue:"),
        ("scen.txt", "xx:00 enter X bedroom1\n01:00 end\n", "error: scenario: BadTimestamp:"),
        ("rules.txt", "rule r priority 1 when zap(x) then record x end\n", "error: rules: UnknownPredicate:"),
    ],
)
def test_error_prefixes(runner, tmp_path, filename, content, prefix):
    path = tmp_path / filename
    path.write_text(content)
    house, scen, extra = str(data_path(REFERENCE_HOUSE)), str(data_path(SCENARIO_1)), []
    if filename == "house.txt":
        house = str(path)
    elif filename == "scen.txt":
        scen = str(path)
    else:
        extra = ["--rules", str(path)]
    result = runner.invoke(cli, ["simulate", house, scen, *extra])
    assert result.exit_code == 1
    assert result.stderr.splitlines()[0].startswith(prefix)


def test_user_rules_override(runner, tmp_path):
    rules = tmp_path / "r.rules"
    # lights stay off after waking
    rules.write_text("rule wake_light_on priority 10 when false_never(event.location) then record x end\n")
    result = runner.invoke(cli, ["simulate", str(data_path(REFERENCE_HOUSE)), str(data_path(SCENARIO_1)),
                                 "--rules", str(rules)])
    assert result.exit_code == 1
    rules.write_text("rule wake_light_on priority 10 when event.kind == end then record x end\n")
    result = _simulate(runner, SCENARIO_1, "--rules", str(rules))
    assert result.exit_code == 0
    # X loses 1 light-hour and Y 4 after waking in the dark
    assert "total: 30 daW·h" in result.output


def test_sleep_bounds_flags(runner, tmp_path):
    scen = tmp_path / "day.txt"
    scen.write_text("00:00 enter X bedroom1\n01:00 sleep X\n09:00 wake X\n24:00 end\n")
    default = runner.invoke(cli, ["simulate", str(data_path(REFERENCE_HOUSE)), str(scen)])
    assert "sleep TooLong: X" not in default.output
    strict = runner.invoke(cli, ["simulate", str(data_path(REFERENCE_HOUSE)), str(scen), "--sleep-min", "5",
                                 "--sleep-max", "7"])
    assert "sleep TooLong: X slept 8 h in window 0" in strict.output


def test_classify_reference_queries(runner, tmp_path):
    plot = tmp_path / "plot.csv"
    result = runner.invoke(cli, ["classify", str(data_path(QUERIES)), "--plot-data", str(plot)])
    assert result.exit_code == 0
    assert result.stdout == (GOLDEN / "queries.classify.tsv").read_text(encoding="utf-8")
    rows = list(csv.reader(result.stdout.splitlines(), delimiter="\t"))[1:]
    knn = [r for r in rows if r[4].startswith("knn")]
    assert len(knn) == 16
    with open(plot, newline="") as fh:
        points = list(csv.DictReader(fh))
    assert len(points) == 29
    assert sum(p["kind"] == "train" for p in points) == 21


def test_classify_rejects_even_k(runner):
    result = runner.invoke(cli, ["classify", str(data_path(QUERIES)), "-k", "2"])
    assert result.exit_code == 1
    assert "odd" in result.stderr.splitlines()[0]


def test_classify_empty_queries(runner, tmp_path):
    q = tmp_path / "q.csv"
    q.write_text("")
    result = runner.invoke(cli, ["classify", str(q)])
    assert result.exit_code == 0
    assert result.stdout.splitlines() == ["query\tage\tweight\ttoileting\tmethod\tabnormal"]


def test_store_report_and_prune(runner, tmp_path):
    store = tmp_path / "runs"
    for ts in ("20260101T000000Z", "20260102T000000Z"):
        assert _simulate(runner, SCENARIO_1, "--store", str(store), "--timestamp", ts).exit_code == 0
    names = [r.name for r in RunStore(store).runs()]
    assert names == ["20260101T000000Z-scenario1", "20260102T000000Z-scenario1"]

    report = runner.invoke(cli, ["report", str(store)])
    assert report.exit_code == 0
    assert report.output.startswith("runs: 2\n")
    assert "  occupied: X 6 h" in report.output.split("location bedroom1", 1)[1]

    pruned = runner.invoke(cli, ["prune", str(store), "--before", "20260103T000000Z"])
    assert pruned.output == "pruned 2 run(s)\n"
    assert RunStore(store).runs() == []
    empty = runner.invoke(cli, ["report", str(store)])
    assert (empty.exit_code, empty.output) == (0, "runs: 0\n")


def test_prune_keeps_newer_runs(tmp_path):
    store = RunStore(tmp_path / "s", create=True)
    store.save("x", "20260101T000000Z", "a")
    store.save("x", "20260105T000000Z", "a")
    assert store.prune("20260103T000000Z") == 1
    assert [r.timestamp for r in store.runs()] == ["20260105T000000Z"]


def test_store_names_stay_unique(tmp_path):
    store = RunStore(tmp_path / "s", create=True)
    a = store.save("x", TS, "scen")
    b = store.save("x", TS, "scen")
    assert a.name != b.name


def test_missing_store(runner, tmp_path):
    with pytest.raises(MissingStore):
        RunStore(tmp_path / "nope")
    result = runner.invoke(cli, ["report", str(tmp_path / "nope")])
    assert result.exit_code == 1
    assert result.stderr.startswith("error: store: MissingStore:")


def test_jsonl_round_trip(house, rules, scenario2):
    result = run_simulation(house, rules, scenario2)
    text = result_to_jsonl(result, {"scenario": "s2"})
    loaded, meta = result_from_jsonl(text)
    assert meta["scenario"] == "s2"
    assert loaded.ledger.entries == result.ledger.entries
    assert loaded.log.records == result.log.records
    assert loaded.final_world.locations == result.final_world.locations
    assert result_to_jsonl(loaded, {"scenario": "s2"}) == text
    assert format_report(loaded) == format_report(result)


def test_validate_and_rules_commands(runner, tmp_path):
    ok = runner.invoke(cli, ["validate", "--scenario", str(data_path(SCENARIO_2))])
    assert (ok.exit_code, ok.output) == (0, "ok\n")
    bad = tmp_path / "s.txt"
    bad.write_text("00:00 enter X living_room\n00:10 sleep X\n01:00 end\n")
    res = runner.invoke(cli, ["validate", "--scenario", str(bad)])
    assert res.exit_code == 1
    assert res.stderr.startswith("error: timeline: SleepOutsideBedroom:")
    dump = runner.invoke(cli, ["rules", "--dump"])
    assert dump.exit_code == 0
    assert "rule wake_light_on priority 10" in dump.output
    listing = runner.invoke(cli, ["rules"])
    assert listing.output.splitlines()[0].split() == ["30", "vacated_all_off"]
