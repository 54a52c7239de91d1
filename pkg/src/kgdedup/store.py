"""Append-only on-disk persistence: datasets, gold labels, runs, fusion
decisions. Each store is a JSONL file replayed into an in-memory index at
startup; writes are serialized and flushed before acknowledgment."""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Optional

from .evaluate import GoldStandard, LabelEntry
from .ingest import Dataset
from .model import Entity, Provenance, PropertyValue, SameAsAssertion, Verdict, canonical_pair

RUN_STATES = ("pending", "running", "done", "failed")
_STATE_ORDER = {s: i for i, s in enumerate(RUN_STATES)}


def entity_to_record(e: Entity) -> dict:
    return {
        "id": e.id,
        "type": e.type,
        "properties": {
            prop: [
                {
                    "kind": v.kind,
                    "raw": v.raw,
                    "source": v.provenance.source,
                    "ingestedAt": v.provenance.ingested_at,
                    **({"quality": v.quality} if v.quality is not None else {}),
                }
                for v in values
            ]
            for prop, values in e.properties.items()
        },
    }


def entity_from_record(rec: dict) -> Entity:
    props = {}
    for prop, values in rec["properties"].items():
        props[prop] = tuple(
            PropertyValue(
                v["kind"], v["raw"],
                Provenance(v.get("source", "unknown"), v.get("ingestedAt", 0.0)),
                v.get("quality"),
            )
            for v in values
        )
    return Entity(rec["id"], rec.get("type", "Entity"), props)


class _Journal:
    """One append-only JSONL file with a serialized writer."""

    def __init__(self, path: Path):
        self.path = path
        self.lock = threading.Lock()
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, record: dict) -> None:
        line = json.dumps(record, sort_keys=True)
        with self.lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")
                fh.flush()

    def replay(self) -> Iterator[dict]:
        if not self.path.exists():
            return
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)


@dataclass
class RunRecord:
    run_id: str
    dataset_ids: list[str]
    config: dict
    state: str = "pending"
    report: Optional[dict] = None
    error: Optional[str] = None
    created_at: float = 0.0

    def as_dict(self) -> dict:
        return {
            "runId": self.run_id,
            "datasetIds": self.dataset_ids,
            "config": self.config,
            "state": self.state,
            "report": self.report,
            "error": self.error,
            "createdAt": self.created_at,
        }


class Store:
    """Durable state for the service harness. Restart-safe: the constructor
    replays every journal."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._datasets = _Journal(self.root / "datasets.jsonl")
        self._gold = _Journal(self.root / "gold.jsonl")
        self._runs = _Journal(self.root / "runs.jsonl")
        self._decisions = _Journal(self.root / "decisions.jsonl")
        self._results_dir = self.root / "results"
        self._results_dir.mkdir(parents=True, exist_ok=True)

        self.datasets: dict[str, Dataset] = {}
        self.runs: dict[str, RunRecord] = {}
        self.gold = GoldStandard()
        self.fusions: dict[str, dict] = {}
        self._mutate = threading.Lock()
        self._load()

    def _load(self) -> None:
        for rec in self._datasets.replay():
            entities = tuple(entity_from_record(e) for e in rec["entities"])
            self.datasets[rec["id"]] = Dataset(rec["id"], entities, rec.get("sourceLabel", ""))
        entries = []
        for rec in self._gold.replay():
            entries.append(LabelEntry(
                (rec["idA"], rec["idB"]), Verdict(rec["verdict"]),
                rec.get("labeler", "anonymous"), rec.get("timestamp", 0.0),
            ))
        self.gold = GoldStandard(tuple(entries))
        for rec in self._runs.replay():
            run = RunRecord(
                rec["runId"], rec["datasetIds"], rec["config"],
                rec["state"], rec.get("report"), rec.get("error"),
                rec.get("createdAt", 0.0),
            )
            existing = self.runs.get(run.run_id)
            if existing is None or _STATE_ORDER[run.state] >= _STATE_ORDER[existing.state]:
                self.runs[run.run_id] = run
        for rec in self._decisions.replay():
            if rec.get("kind") == "fusion-run":
                self.fusions[rec["fusionId"]] = rec
            elif rec.get("kind") == "override":
                fusion = self.fusions.get(rec["fusionId"])
                if fusion is not None:
                    fusion.setdefault("overrides", []).append(rec)

    # -- datasets ----------------------------------------------------------

    def put_dataset(self, dataset: Dataset) -> None:
        with self._mutate:
            if dataset.id in self.datasets:
                raise KeyError(f"dataset {dataset.id!r} already exists")
            self._datasets.append({
                "id": dataset.id,
                "sourceLabel": dataset.source_label,
                "entities": [entity_to_record(e) for e in dataset.entities],
            })
            self.datasets[dataset.id] = dataset

    # -- gold --------------------------------------------------------------

    def add_label(
        self, a: str, b: str, verdict: Verdict | str,
        labeler: str = "anonymous", supersede: bool = False,
    ) -> LabelEntry:
        pair = canonical_pair(a, b)
        verdict = Verdict(verdict)
        with self._mutate:
            if pair in self.gold.current() and not supersede:
                raise LabelConflict(f"pair {pair} already labeled")
            entry = LabelEntry(pair, verdict, labeler, time.time())
            self._gold.append({
                "idA": pair[0], "idB": pair[1], "verdict": verdict.value,
                "labeler": labeler, "timestamp": entry.timestamp,
            })
            self.gold = GoldStandard(self.gold.history + (entry,))
            return entry

    # -- runs --------------------------------------------------------------

    def put_run(self, run: RunRecord) -> None:
        with self._mutate:
            self._runs.append(run.as_dict())
            self.runs[run.run_id] = run

    def update_run(self, run: RunRecord, state: str, **fields) -> None:
        if _STATE_ORDER[state] < _STATE_ORDER[run.state]:
            raise ValueError(f"run state may only advance: {run.state} -> {state}")
        with self._mutate:
            run.state = state
            for k, v in fields.items():
                setattr(run, k, v)
            self._runs.append(run.as_dict())

    def results_path(self, run_id: str) -> Path:
        return self._results_dir / f"{run_id}.jsonl"

    def run_results(self, run_id: str) -> list[SameAsAssertion]:
        from .config import read_results

        path = self.results_path(run_id)
        return read_results(path) if path.exists() else []

    # -- fusion ------------------------------------------------------------

    def put_fusion(self, record: dict) -> None:
        with self._mutate:
            self._decisions.append({**record, "kind": "fusion-run"})
            self.fusions[record["fusionId"]] = dict(record)

    def add_override(self, record: dict) -> None:
        with self._mutate:
            self._decisions.append({**record, "kind": "override"})
            self.fusions[record["fusionId"]].setdefault("overrides", []).append(record)


class LabelConflict(Exception):
    pass
