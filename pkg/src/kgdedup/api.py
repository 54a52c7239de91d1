"""HTTP+JSON API binding the engine modules, plus static hosting for the
companion web UI. Single-user bearer-token auth; long runs execute on a
background thread and are observed by polling."""

from __future__ import annotations

import io
import logging
import os
import threading
import time
import uuid
from pathlib import Path
from typing import Any, Optional

from fastapi import Depends, FastAPI, HTTPException, Request
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import evaluate as ev
from .cleaners import ConfigError
from .config import assertion_to_record, config_from_dict, write_results
from .fusion import FusedEntity, OverrideError, fuse_class, resolve_overrides
from .ingest import Dataset, SchemaError, SchemaMapping, apply_mapping, parse_csv, parse_rdf
from .model import Verdict, canonical_pair, equivalence_classes
from .pipeline import run_dedup, run_linkage
from .store import LabelConflict, RunRecord, Store

log = logging.getLogger(__name__)

DEFAULT_TOKEN = "local-dev-token"
FRONTEND_DIR = Path(__file__).resolve().parents[2] / "frontend" / "dist"


class DatasetPayload(BaseModel):
    id: str
    format: str = "csv"  # csv | ntriples | turtle
    content: str
    id_column: str = "id"
    aliases: dict[str, str] = Field(default_factory=dict)
    types: dict[str, str] = Field(default_factory=dict)
    source_label: str = ""


class RunPayload(BaseModel):
    dataset_id: str
    dataset_b_id: Optional[str] = None
    config: dict[str, Any]
    min_sim: Optional[float] = None


class LabelPayload(BaseModel):
    idA: str
    idB: str
    verdict: str
    labeler: str = "anonymous"
    supersede: bool = False


class FusionPayload(BaseModel):
    run_id: str
    config: dict[str, Any] = Field(default_factory=dict)


class OverridePayload(BaseModel):
    fused_id: str
    property: str
    value: str
    operator: str = "anonymous"


def _fused_to_dict(f: FusedEntity) -> dict:
    return {
        "fusedId": f.id,
        "memberIds": list(f.member_ids),
        "type": f.type,
        "properties": {p: [v.raw for v in vs] for p, vs in f.properties.items()},
        "decisions": [d.as_dict() for d in f.decisions],
        "unresolved": list(f.unresolved),
    }


def create_app(store: Store, token: Optional[str] = None) -> FastAPI:
    token = token or os.environ.get("KGDEDUP_TOKEN", DEFAULT_TOKEN)
    app = FastAPI(title="kgdedup", version="0.1.0")
    run_lock = threading.Lock()

    def auth(request: Request) -> None:
        header = request.headers.get("authorization", "")
        if header != f"Bearer {token}":
            raise HTTPException(401, "missing or invalid token")

    dep = [Depends(auth)]

    # -- datasets ---------------------------------------------------------

    @app.post("/api/datasets", status_code=201, dependencies=dep)
    def create_dataset(payload: DatasetPayload):
        if payload.id in store.datasets:
            raise HTTPException(409, f"dataset {payload.id!r} exists")
        mapping = SchemaMapping(payload.aliases, payload.types)
        try:
            if payload.format == "csv":
                ds = parse_csv(
                    io.StringIO(payload.content), mapping, payload.id_column,
                    dataset_id=payload.id, source_label=payload.source_label or payload.id,
                    ingested_at=time.time(),
                )
            elif payload.format in ("ntriples", "turtle", "turtle-subset"):
                ds = parse_rdf(
                    payload.content, payload.format, mapping,
                    dataset_id=payload.id, source_label=payload.source_label or payload.id,
                    ingested_at=time.time(),
                )
                ds = apply_mapping(ds, mapping)
            else:
                raise HTTPException(400, f"unknown format {payload.format!r}")
        except (SchemaError, ValueError) as exc:
            raise HTTPException(400, str(exc))
        store.put_dataset(ds)
        return {"id": ds.id, "entityCount": len(ds.entities)}

    @app.get("/api/datasets", dependencies=dep)
    def list_datasets():
        return [
            {"id": ds.id, "entityCount": len(ds.entities), "sourceLabel": ds.source_label}
            for ds in store.datasets.values()
        ]

    @app.get("/api/datasets/{dataset_id}", dependencies=dep)
    def get_dataset(dataset_id: str, offset: int = 0, limit: int = 50):
        ds = store.datasets.get(dataset_id)
        if ds is None:
            raise HTTPException(404, f"no dataset {dataset_id!r}")
        from .store import entity_to_record

        page = ds.entities[offset : offset + limit]
        return {
            "id": ds.id,
            "entityCount": len(ds.entities),
            "entities": [entity_to_record(e) for e in page],
        }

    # -- runs -------------------------------------------------------------

    def _execute_run(run: RunRecord, payload: RunPayload):
        try:
            store.update_run(run, "running")
            cfg = config_from_dict(payload.config)
            ds = store.datasets[payload.dataset_id]
            with run_lock:  # one pipeline run at a time
                if payload.dataset_b_id:
                    assertions, report = run_linkage(
                        ds, store.datasets[payload.dataset_b_id], cfg.match,
                        min_sim=payload.min_sim,
                    )
                else:
                    assertions, report = run_dedup(ds, cfg.match, min_sim=payload.min_sim)
            write_results(assertions, store.results_path(run.run_id))
            store.update_run(run, "done", report=report.as_dict())
        except Exception as exc:  # surface the failure through polling
            log.exception("run %s failed", run.run_id)
            store.update_run(run, "failed", error=str(exc))

    @app.post("/api/runs", status_code=202, dependencies=dep)
    def create_run(payload: RunPayload):
        if payload.dataset_id not in store.datasets:
            raise HTTPException(404, f"no dataset {payload.dataset_id!r}")
        if payload.dataset_b_id and payload.dataset_b_id not in store.datasets:
            raise HTTPException(404, f"no dataset {payload.dataset_b_id!r}")
        try:
            config_from_dict(payload.config)
        except ConfigError as exc:
            raise HTTPException(400, f"bad config: {exc}")
        run = RunRecord(
            run_id=uuid.uuid4().hex[:12],
            dataset_ids=[d for d in (payload.dataset_id, payload.dataset_b_id) if d],
            config=payload.config,
            created_at=time.time(),
        )
        store.put_run(run)
        threading.Thread(target=_execute_run, args=(run, payload), daemon=True).start()
        return {"runId": run.run_id, "state": run.state}

    @app.get("/api/runs", dependencies=dep)
    def list_runs():
        return [r.as_dict() for r in store.runs.values()]

    def _get_run(run_id: str) -> RunRecord:
        run = store.runs.get(run_id)
        if run is None:
            raise HTTPException(404, f"no run {run_id!r}")
        return run

    @app.get("/api/runs/{run_id}", dependencies=dep)
    def get_run(run_id: str):
        return _get_run(run_id).as_dict()

    @app.get("/api/runs/{run_id}/candidates", dependencies=dep)
    def list_candidates(
        run_id: str, offset: int = 0, limit: int = 20,
        min_sim: float = 0.0, unlabeled_only: bool = False,
    ):
        _get_run(run_id)
        assertions = [a for a in store.run_results(run_id) if a.sim >= min_sim]
        ordered = ev.next_candidates_for_labeling(
            assertions, store.gold if unlabeled_only else ev.GoldStandard(),
            limit=len(assertions),
        )
        verdicts = store.gold.current()
        page = ordered[offset : offset + limit]
        return {
            "total": len(ordered),
            "candidates": [
                {**assertion_to_record(a),
                 "verdict": verdicts.get(a.pair, Verdict.UNLABELED).value}
                for a in page
            ],
        }

    # -- gold / eval ------------------------------------------------------

    @app.post("/api/labels", dependencies=dep)
    def submit_label(payload: LabelPayload):
        try:
            entry = store.add_label(
                payload.idA, payload.idB, payload.verdict,
                payload.labeler, payload.supersede,
            )
        except LabelConflict as exc:
            raise HTTPException(409, str(exc))
        except ValueError as exc:
            raise HTTPException(400, str(exc))
        return {"idA": entry.pair[0], "idB": entry.pair[1], "verdict": entry.verdict.value}

    @app.get("/api/gold", dependencies=dep)
    def get_gold():
        return [
            {"idA": p[0], "idB": p[1], "verdict": v.value}
            for p, v in sorted(store.gold.current().items())
        ]

    @app.get("/api/eval", dependencies=dep)
    def get_eval(run_id: str, closed_world: bool = False):
        _get_run(run_id)
        try:
            report = ev.score(store.run_results(run_id), store.gold, closed_world)
        except ev.EmptyGoldError as exc:
            raise HTTPException(400, str(exc))
        return report.as_dict()

    @app.get("/api/eval/sweep", dependencies=dep)
    def get_sweep(run_id: str, thresholds: str = "0.8,0.9", closed_world: bool = False):
        _get_run(run_id)
        try:
            ts = [float(t) for t in thresholds.split(",") if t]
            sweep = ev.threshold_sweep(store.run_results(run_id), store.gold, ts, closed_world)
        except (ValueError, ev.EmptyGoldError) as exc:
            raise HTTPException(400, str(exc))
        return [{"threshold": t, **r.as_dict()} for t, r in sweep]

    @app.get("/api/feature-report", dependencies=dep)
    def get_feature_report(dataset_id: str):
        ds = store.datasets.get(dataset_id)
        if ds is None:
            raise HTTPException(404, f"no dataset {dataset_id!r}")
        try:
            rows = ev.feature_report(ds, store.gold)
        except ev.EmptyGoldError as exc:
            raise HTTPException(400, str(exc))
        return [r.as_dict() for r in rows]

    # -- equivalence classes / fusion -------------------------------------

    def _confirmed_classes(run_id: str):
        run = _get_run(run_id)
        assertions = store.run_results(run_id)
        entities = {}
        for ds_id in run.dataset_ids:
            ds = store.datasets.get(ds_id)
            if ds:
                entities.update(ds.by_id())
        verdicts = store.gold.current()
        confirmed = [
            a.pair for a in assertions
            if verdicts.get(a.pair) not in (Verdict.DIFFERENT, Verdict.RELATED)
            and a.pair[0] in entities and a.pair[1] in entities
        ]
        confirmed += [
            p for p, v in verdicts.items()
            if v == Verdict.SAME and p[0] in entities and p[1] in entities
        ]
        return equivalence_classes(entities, confirmed), entities

    @app.get("/api/runs/{run_id}/classes", dependencies=dep)
    def get_classes(run_id: str, include_singletons: bool = False):
        classes, _ = _confirmed_classes(run_id)
        out = [sorted(c.members) for c in classes if include_singletons or len(c.members) > 1]
        out.sort()
        return {"classes": out}

    @app.post("/api/fusion-runs", status_code=201, dependencies=dep)
    def create_fusion_run(payload: FusionPayload):
        from .config import fusion_from_dict

        try:
            policy = fusion_from_dict(payload.config)
        except (ConfigError, KeyError) as exc:
            raise HTTPException(400, f"bad fusion policy: {exc}")
        classes, entities = _confirmed_classes(payload.run_id)
        fused = [
            _fused_to_dict(fuse_class(c, entities, policy))
            for c in sorted(
                (c for c in classes if len(c.members) > 1),
                key=lambda c: sorted(c.members),
            )
        ]
        record = {
            "fusionId": uuid.uuid4().hex[:12],
            "runId": payload.run_id,
            "config": payload.config,
            "classes": fused,
            "createdAt": time.time(),
        }
        store.put_fusion(record)
        return {"fusionId": record["fusionId"], "classCount": len(fused)}

    def _apply_overrides(record: dict) -> dict:
        out = {k: v for k, v in record.items() if k != "overrides"}
        classes = [dict(c) for c in out["classes"]]
        by_id = {c["fusedId"]: c for c in classes}
        for ov in record.get("overrides", []):
            c = by_id.get(ov["fusedId"])
            if c is None:
                continue
            props = dict(c["properties"])
            props[ov["property"]] = [ov["value"]]
            c["properties"] = props
            c["decisions"] = list(c["decisions"]) + [{
                "property": ov["property"],
                "inputs": ov.get("inputs", []),
                "function": "human-override",
                "outputs": [ov["value"]],
                "rationale": f"human decision by {ov.get('operator', 'anonymous')!r}",
            }]
            c["unresolved"] = [p for p in c["unresolved"] if p != ov["property"]]
        out["classes"] = classes
        out["overrideCount"] = len(record.get("overrides", []))
        return out

    @app.get("/api/fusion-runs/{fusion_id}", dependencies=dep)
    def get_fusion_run(fusion_id: str):
        record = store.fusions.get(fusion_id)
        if record is None:
            raise HTTPException(404, f"no fusion run {fusion_id!r}")
        return _apply_overrides(record)

    @app.post("/api/fusion-runs/{fusion_id}/overrides", dependencies=dep)
    def submit_override(fusion_id: str, payload: OverridePayload):
        record = store.fusions.get(fusion_id)
        if record is None:
            raise HTTPException(404, f"no fusion run {fusion_id!r}")
        target = next(
            (c for c in record["classes"] if c["fusedId"] == payload.fused_id), None
        )
        if target is None:
            raise HTTPException(404, f"no fused entity {payload.fused_id!r}")
        decision = next(
            (d for d in target["decisions"] if d["property"] == payload.property), None
        )
        if decision is None:
            raise HTTPException(400, f"no fused property {payload.property!r}")
        if payload.value not in decision["inputs"]:
            raise HTTPException(400, "override value must be one of the original inputs")
        store.add_override({
            "fusionId": fusion_id,
            "fusedId": payload.fused_id,
            "property": payload.property,
            "value": payload.value,
            "inputs": decision["inputs"],
            "operator": payload.operator,
            "timestamp": time.time(),
        })
        return {"ok": True}

    # -- frontend ---------------------------------------------------------

    if FRONTEND_DIR.is_dir():
        app.mount("/ui", StaticFiles(directory=FRONTEND_DIR, html=True), name="ui")

        @app.get("/", include_in_schema=False)
        def index():
            return FileResponse(FRONTEND_DIR / "index.html")

    return app
