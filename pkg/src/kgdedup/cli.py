"""Command-line interface: the workflow steps as subcommands.

Exit codes: 1 config error, 2 data error, 3 runtime failure.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import sys
from pathlib import Path

import click
import yaml

from . import evaluate as ev
from .cleaners import ConfigError
from .config import load_config, read_results, write_results
from .fusion import fuse_class
from .ingest import Dataset, SchemaError, apply_mapping, parse_csv, parse_rdf, write_csv, write_ntriples
from .model import Verdict, equivalence_classes
from .pipeline import run_dedup, run_linkage
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger(__name__)

EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 1, 2, 3


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_cfg(path: str):
    try:
        return load_config(path)
    except (ConfigError, FileNotFoundError, OSError) as exc:
        _fail(EXIT_CONFIG, str(exc))


def _load_dataset(cfg, path: str | None = None, which: str = "dataset") -> Dataset:
    src = path or (cfg.dataset_path if which == "dataset" else cfg.dataset_b_path)
    if not src:
        _fail(EXIT_CONFIG, f"no {which} path given (flag or run config)")
    try:
        data = Path(src).read_bytes()
    except OSError as exc:
        _fail(EXIT_DATA, str(exc))
    try:
        if cfg.dataset_format == "csv":
            ds = parse_csv(data, cfg.schema, cfg.id_column, dataset_id=Path(src).stem,
                           source_label=Path(src).name)
        else:
            ds = parse_rdf(data, cfg.dataset_format, cfg.schema, dataset_id=Path(src).stem,
                           source_label=Path(src).name)
            ds = apply_mapping(ds, cfg.schema)
    except (SchemaError, ValueError) as exc:
        _fail(EXIT_DATA, str(exc))
    return ds


def _load_gold(path: str) -> ev.GoldStandard:
    try:
        return ev.gold_from_csv(Path(path).read_text())
    except (OSError, ValueError) as exc:
        _fail(EXIT_DATA, f"gold standard {path}: {exc}")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log stage progress.")
def main(verbose: bool):
    """Duplication detection and fusion for knowledge graphs."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", type=click.Path(exists=True), help="Override dataset path.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--format", "out_format", type=click.Choice(["csv", "ntriples"]), default="csv")
def ingest(config_path, input_path, out_path, out_format):
    """Parse a CSV/RDF source into the canonical schema and write it back."""
    cfg = _load_cfg(config_path)
    ds = _load_dataset(cfg, input_path)
    columns = sorted(c for c in ds.schema() if c != "geo") + ["latitude", "longitude"]
    try:
        if out_format == "csv":
            Path(out_path).write_text(write_csv(ds, columns))
        else:
            Path(out_path).write_text(write_ntriples(ds))
    except OSError as exc:
        _fail(EXIT_RUNTIME, str(exc))
    click.echo(f"ingested {len(ds.entities)} entities -> {out_path}")


@main.command()
@click.option("--entities", type=int, default=495, show_default=True)
@click.option("--duplicates", type=int, default=23, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--gold-out", "gold_path", required=True, type=click.Path())
def generate(entities, duplicates, seed, out_path, gold_path):
    """Generate the synthetic benchmark and its closed-world gold standard."""
    try:
        ds, gold = generate_synthetic(SyntheticSpec(entities, duplicates, random_seed=seed))
    except ValueError as exc:
        _fail(EXIT_CONFIG, str(exc))
    columns = ["name", "url", "streetAddress", "latitude", "longitude", "label"]
    Path(out_path).write_text(write_csv(ds, columns))
    Path(gold_path).write_text(ev.gold_to_csv(gold))
    click.echo(f"wrote {len(ds.entities)} entities -> {out_path}; {len(gold)} labels -> {gold_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", type=click.Path(exists=True))
@click.option("--input-b", "input_b_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--min-sim", type=float, default=None,
              help="Keep scored pairs down to this similarity (for sweeps).")
@click.option("--report-out", type=click.Path(), default=None)
def run(config_path, input_path, input_b_path, out_path, min_sim, report_out):
    """Run the dedup/linkage pipeline and write scored assertions."""
    cfg = _load_cfg(config_path)
    ds = _load_dataset(cfg, input_path)
    try:
        if cfg.match.mode == "linkage":
            ds_b = _load_dataset(cfg, input_b_path, which="dataset_b")
            assertions, report = run_linkage(ds, ds_b, cfg.match, min_sim=min_sim)
        else:
            assertions, report = run_dedup(ds, cfg.match, min_sim=min_sim)
    except ConfigError as exc:
        _fail(EXIT_CONFIG, str(exc))
    except Exception as exc:
        _fail(EXIT_RUNTIME, str(exc))
    write_results(assertions, out_path)
    if report_out:
        Path(report_out).write_text(json.dumps(report.as_dict(), indent=2, sort_keys=True) + "\n")
    click.echo(
        f"{report.candidate_count} candidates, {report.accepted_count} accepted "
        f"in {report.wall_time_seconds:.2f}s -> {out_path}"
    )


def _print_report(label: str, report: ev.EvalReport):
    click.echo(
        f"{label:>10}  tp={report.tp:<4} fp={report.fp:<4} fn={report.fn:<4} "
        f"P={report.precision:.4f} R={report.recall:.4f} F1={report.f1:.4f} "
        f"unjudged={report.unjudged}"
    )


@main.command()
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--closed-world", is_flag=True)
def evaluate(results_path, gold_path, closed_world):
    """Score accepted assertions against a gold standard (P/R/F table)."""
    gold = _load_gold(gold_path)
    try:
        accepted = read_results(results_path)
        report = ev.score(accepted, gold, closed_world)
    except ev.EmptyGoldError as exc:
        _fail(EXIT_DATA, str(exc))
    except (OSError, ValueError, KeyError) as exc:
        _fail(EXIT_DATA, f"results {results_path}: {exc}")
    _print_report("overall", report)


@main.command()
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--thresholds", default="0.8,0.9", show_default=True)
@click.option("--closed-world", is_flag=True)
def sweep(results_path, gold_path, thresholds, closed_world):
    """Evaluate one scored result set at several acceptance thresholds."""
    gold = _load_gold(gold_path)
    try:
        ts = [float(t) for t in thresholds.split(",") if t]
        scored = read_results(results_path)
        rows = ev.threshold_sweep(scored, gold, ts, closed_world)
    except (ValueError, ev.EmptyGoldError) as exc:
        _fail(EXIT_DATA, str(exc))
    for t, report in rows:
        _print_report(f"t={t:.2f}", report)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path(exists=True))
@click.option("--generations", type=int, default=20, show_default=True)
@click.option("--population", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Learned config written as YAML.")
def learn(config_path, input_path, gold_path, generations, population, seed, out_path):
    """Learn a matching configuration with the genetic algorithm."""
    from .config import blocking_to_dict, node_to_dict

    cfg = _load_cfg(config_path)
    ds = _load_dataset(cfg, input_path)
    gold = _load_gold(gold_path)
    try:
        params = ev.GAParams(population, generations, random_seed=seed)
        best, trace = ev.learn_config(ds, gold, params)
    except ev.EmptyGoldError as exc:
        _fail(EXIT_DATA, str(exc))
    doc = {
        "compare": node_to_dict(best.tree),
        "threshold": best.accept_threshold,
        "min_comparable_leaves": best.min_comparable_leaves,
        "blocking": blocking_to_dict(best.blocking),
        "mode": "dedup",
    }
    Path(out_path).write_text(yaml.safe_dump(doc, sort_keys=False))
    click.echo("fitness trace: " + ", ".join(f"{f:.4f}" for f in trace))
    click.echo(f"best f1 {trace[-1]:.4f} -> {out_path}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True))
@click.option("--input", "input_path", type=click.Path(exists=True))
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--decision-log", type=click.Path(), default=None)
@click.option("--format", "out_format", type=click.Choice(["csv", "ntriples"]), default="csv")
def fuse(config_path, input_path, results_path, gold_path, out_path, decision_log, out_format):
    """Fuse accepted duplicate classes into unique entity representations."""
    cfg = _load_cfg(config_path)
    ds = _load_dataset(cfg, input_path)
    entities = ds.by_id()
    try:
        accepted = read_results(results_path)
    except (OSError, ValueError) as exc:
        _fail(EXIT_DATA, str(exc))
    vetoed = set()
    confirmed = []
    if gold_path:
        gold = _load_gold(gold_path)
        vetoed = gold.pairs_with(Verdict.DIFFERENT) | gold.pairs_with(Verdict.RELATED)
        confirmed += [p for p in gold.pairs_with(Verdict.SAME)
                      if p[0] in entities and p[1] in entities]
    confirmed += [a.pair for a in accepted
                  if a.pair not in vetoed and a.a in entities and a.b in entities]
    classes = equivalence_classes(entities, confirmed)
    fused_entities = []
    decisions = []
    for cls in sorted((c for c in classes if len(c.members) > 1),
                      key=lambda c: sorted(c.members)):
        fused = fuse_class(cls, entities, cfg.fusion)
        fused_entities.append(fused)
        for d in fused.decisions:
            decisions.append({"fusedId": fused.id, **d.as_dict()})
    from .model import Entity

    survivors = [e for e in ds.entities
                 if not any(e.id in f.member_ids for f in fused_entities)]
    merged = survivors + [
        Entity(f.id, f.type, dict(f.properties)) for f in fused_entities
    ]
    out_ds = Dataset(ds.id + "-fused", tuple(sorted(merged, key=lambda e: e.id)), ds.source_label)
    if out_format == "csv":
        columns = sorted(c for c in out_ds.schema() if c != "geo") + ["latitude", "longitude"]
        Path(out_path).write_text(write_csv(out_ds, columns))
    else:
        Path(out_path).write_text(write_ntriples(out_ds))
    if decision_log:
        with open(decision_log, "w", encoding="utf-8") as fh:
            for d in decisions:
                fh.write(json.dumps(d, sort_keys=True) + "\n")
    click.echo(f"fused {len(fused_entities)} classes; {len(out_ds.entities)} entities -> {out_path}")


@main.command()
@click.option("--results", "results_path", required=True, type=click.Path(exists=True))
@click.option("--gold", "gold_path", required=True, type=click.Path())
@click.option("--labeler", default="cli", show_default=True)
@click.option("--limit", type=int, default=20, show_default=True)
def label(results_path, gold_path, labeler, limit):
    """Interactively label candidate pairs: y(es) / n(o) / r(elated) / q(uit)."""
    gold = (_load_gold(gold_path) if Path(gold_path).exists() else ev.GoldStandard())
    try:
        assertions = read_results(results_path)
    except (OSError, ValueError) as exc:
        _fail(EXIT_DATA, str(exc))
    queue = ev.next_candidates_for_labeling(assertions, gold, limit)
    if not queue:
        click.echo("nothing to label")
        return
    verdict_map = {"y": Verdict.SAME, "n": Verdict.DIFFERENT, "r": Verdict.RELATED}
    import time as _time

    for a in queue:
        click.echo(f"\n{a.a}  <->  {a.b}   sim={a.sim:.4f}")
        for prop, s in sorted(a.per_property.items()):
            click.echo(f"    {prop}: {s:.4f}")
        answer = click.prompt("same? [y/n/r/q]", default="q", show_default=False).strip().lower()
        if answer == "q":
            break
        verdict = verdict_map.get(answer)
        if verdict is None:
            click.echo("skipped")
            continue
        gold = ev.submit_label(gold, a.a, a.b, verdict, labeler, _time.time())
    Path(gold_path).write_text(ev.gold_to_csv(gold))
    click.echo(f"gold standard now has {len(gold)} labeled pairs -> {gold_path}")


@main.command()
@click.option("--data-dir", default="./kgdedup-data", show_default=True, type=click.Path())
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8472, show_default=True)
@click.option("--token", default=None, help="Bearer token (default: KGDEDUP_TOKEN env or built-in).")
def serve(data_dir, host, port, token):
    """Start the HTTP API (and web UI, when built) backed by on-disk stores."""
    import uvicorn

    from .api import create_app
    from .store import Store

    app = create_app(Store(data_dir), token)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
