"""``smarthome`` command line."""

from __future__ import annotations

import csv
import functools
import io
import os
import sys
from pathlib import Path

import click

from . import resources
from .classify import fit_kmc, kmc_label, knn_classify, load_dataset, load_queries, plot_rows
from .engine import run_simulation
from .errors import IssuesError, SmartHomeError
from .health import HealthConfig, SleepPattern
from .house import parse_house
from .power import builtin_power_rules
from .report import digest, format_report, result_to_jsonl
from .rule_dsl import format_rules, parse_rules
from .rules import merge_rulesets
from .scenario import parse_scenario, validate_timeline
from .store import RunStore, check_timestamp, now_timestamp

TIMESTAMP_ENV = "SMARTHOME_TIMESTAMP"


def _fail(prefix: str, code: str, message: str) -> None:
    click.echo(f"error: {prefix}: {code}: {message}", err=True)


def handle_errors(fn):
    """Turn library errors into one diagnostic line each and exit status 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except IssuesError as exc:
            for issue in exc.issues:
                where = f" {issue.location()}" if issue.line is not None else ""
                _fail(exc.prefix, issue.code, f"{issue.message}{where}".strip())
        except SmartHomeError as exc:
            _fail(exc.prefix, getattr(exc, "code", "Error"), str(exc))
        except (OSError, ValueError) as exc:
            _fail("io" if isinstance(exc, OSError) else "usage", type(exc).__name__, str(exc))
        sys.exit(1)

    return wrapper


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_rules(path: str | None):
    rules = builtin_power_rules()
    if path:
        rules = merge_rulesets(rules, parse_rules(_read(path)))
    return rules


@click.group()
def cli():
    """Smart-home simulator: power agent energy accounting and health classification."""


@cli.command()
@click.argument("house_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_file", type=click.Path(exists=True, dir_okay=False),
              help="Rule file merged over the builtin power rules.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the text report here instead of stdout.")
@click.option("--json", "json_out", type=click.Path(dir_okay=False), help="Also write the JSON-lines result.")
@click.option("--store", type=click.Path(file_okay=False), help="Persist the run in this store directory.")
@click.option("--timestamp", envvar=TIMESTAMP_ENV, help="Run timestamp (YYYYMMDDTHHMMSSZ); defaults to now.")
@click.option("--sleep-min", type=float, default=6.0, show_default=True)
@click.option("--sleep-max", type=float, default=9.0, show_default=True)
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False),
              help="Labeled CSV enabling toileting abnormality checks.")
@click.option("--method", type=click.Choice(["knn", "kmc"]), default="knn", show_default=True)
@click.option("-k", "k", type=int, default=5, show_default=True, help="Neighbours for the knn method.")
@handle_errors
def simulate(house_file, scenario_file, rules_file, out, json_out, store, timestamp, sleep_min, sleep_max,
             dataset, method, k):
    """Run SCENARIO_FILE in HOUSE_FILE and print the report."""
    house_text, scenario_text = _read(house_file), _read(scenario_file)
    house = parse_house(house_text)
    rules = _load_rules(rules_file)
    timeline = validate_timeline(parse_scenario(scenario_text), house)
    if method == "knn" and (k < 1 or k % 2 == 0):
        raise ValueError("k must be an odd positive integer")
    health = HealthConfig(
        pattern=SleepPattern(sleep_min, sleep_max),
        dataset=load_dataset(_read(dataset)) if dataset else None,
        method=method,
        k=k,
    )
    result = run_simulation(house, rules, timeline, health=health)

    if store or timestamp:
        timestamp = check_timestamp(timestamp or now_timestamp())
    meta = {
        "scenario": Path(scenario_file).stem,
        "digests": {"house": digest(house_text), "rules": digest(format_rules(rules)), "scenario": digest(scenario_text)},
        "sleep_pattern": [sleep_min, sleep_max],
    }
    if timestamp:
        meta["timestamp"] = timestamp
    report = format_report(result, meta, health)
    if out:
        Path(out).write_text(report, encoding="utf-8")
    else:
        click.echo(report, nl=False)
    structured = result_to_jsonl(result, meta)
    if json_out:
        Path(json_out).write_text(structured, encoding="utf-8")
    if store:
        run = RunStore(store, create=True).save(structured, timestamp, meta["scenario"])
        click.echo(f"stored {run.name}", err=True)


@cli.command()
@click.argument("queries_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--dataset", type=click.Path(exists=True, dir_okay=False),
              help="Labeled CSV; defaults to the shipped 21-row table.")
@click.option("-k", "ks", type=int, multiple=True, help="Neighbour count, repeatable (default 3 and 5).")
@click.option("--kmc/--no-kmc", default=True, show_default=True, help="Also classify with K-Means clusters.")
@click.option("--kmc-k", type=int, default=2, show_default=True)
@click.option("--kmc-init", type=click.Choice(["per-class-means", "first-k-distinct"]), default="per-class-means",
              show_default=True)
@click.option("--max-iter", type=int, default=10, show_default=True)
@click.option("--include-queries", is_flag=True, help="Cluster the query points together with the dataset.")
@click.option("--scale", is_flag=True, help="Min-max scale features before KNN.")
@click.option("--plot-data", type=click.Path(dir_okay=False), help="Write 3-D scatter point data as CSV.")
@handle_errors
def classify(queries_file, dataset, ks, kmc, kmc_k, kmc_init, max_iter, include_queries, scale, plot_data):
    """Print abnormality verdicts for every query under every method."""
    ks = ks or (3, 5)
    for k in ks:
        if k < 1 or k % 2 == 0:
            raise ValueError(f"k must be an odd positive integer, got {k}")
    ds = load_dataset(_read(dataset) if dataset else resources.read_data(resources.TRAINING_SET))
    queries = load_queries(_read(queries_file))
    model = None
    if kmc:
        extra = [q for _, q in queries] if include_queries else ()
        model = fit_kmc(ds, k=kmc_k, init=kmc_init, max_iter=max_iter, extra_points=extra)

    buf = io.StringIO()
    writer = csv.writer(buf, delimiter="\t", lineterminator="\n")
    writer.writerow(["query", "age", "weight", "toileting", "method", "abnormal"])
    for name, q in queries:
        for k in ks:
            writer.writerow([name, *q, f"knn-{k}", _bool(knn_classify(ds, q, k, scale=scale).abnormal)])
        if model is not None:
            writer.writerow([name, *q, "kmc", _bool(kmc_label(model, ds, q))])
    click.echo(buf.getvalue(), nl=False)
    if model is not None:
        state = "converged" if model.converged else "not converged"
        click.echo(f"# kmc: {state} after {model.iterations_run} iteration(s)", err=True)

    if plot_data:
        rows = plot_rows(ds, queries, ks, model)
        with open(plot_data, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]) if rows else ["kind"], lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({key: _bool(v) if isinstance(v, bool) else ("" if v is None else v)
                            for key, v in row.items()})


def _bool(v: bool) -> str:
    return "true" if v else "false"


@cli.command()
@click.argument("store", type=click.Path())
@click.option("--match", default="", help="Only runs whose name contains this text.")
@handle_errors
def report(store, match):
    """List stored runs and print each run's report."""
    rs = RunStore(store)
    runs = [r for r in rs.runs() if match in r.name]
    click.echo(f"runs: {len(runs)}")
    for run in runs:
        result, meta = rs.load(run)
        click.echo(f"\n=== {run.name}")
        click.echo(format_report(result, meta), nl=False)


@cli.command()
@click.argument("store", type=click.Path())
@click.option("--before", required=True, help="Delete runs stamped earlier than this timestamp.")
@handle_errors
def prune(store, before):
    """Delete old runs from STORE."""
    n = RunStore(store).prune(before)
    click.echo(f"pruned {n} run(s)")


@cli.command()
@click.option("--house", "house_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--scenario", "scenario_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--rules", "rules_file", type=click.Path(exists=True, dir_okay=False))
@handle_errors
def validate(house_file, scenario_file, rules_file):
    """Check input files without running anything."""
    house = parse_house(_read(house_file) if house_file else resources.read_data(resources.REFERENCE_HOUSE))
    if rules_file:
        parse_rules(_read(rules_file))
    if scenario_file:
        validate_timeline(parse_scenario(_read(scenario_file)), house)
    click.echo("ok")


@cli.command()
@click.option("--dump", is_flag=True, help="Print the rule set in rule-file syntax.")
@click.option("--rules", "rules_file", type=click.Path(exists=True, dir_okay=False),
              help="Merge this rule file over the builtin rules first.")
@handle_errors
def rules(dump, rules_file):
    """Show the power agent's rules."""
    rs = _load_rules(rules_file)
    if dump:
        click.echo(format_rules(rs), nl=False)
    else:
        for rule in rs:
            click.echo(f"{rule.priority:>4}  {rule.name}")


def main():
    cli(prog_name="smarthome")


if __name__ == "__main__":
    main()
