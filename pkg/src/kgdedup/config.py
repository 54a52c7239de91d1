"""Run-config file: one human-editable YAML document carrying the schema
mapping, cleaner chains, comparator tree, blocking, thresholds, and fusion
policy. The same document drives the CLI and the HTTP API."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml

from .blocking import BlockingSpec
from .cleaners import CleanerChain, ConfigError
from .fusion import FusionPolicy, FusionRule
from .ingest import SchemaMapping
from .metrics import Combinator, Leaf, Node, comparator
from .model import SameAsAssertion, Verdict
from .pipeline import MatchConfig


def _chain_from(spec: Any) -> CleanerChain:
    if not spec:
        return CleanerChain.of()
    steps = []
    for step in spec:
        if isinstance(step, str):
            steps.append(step)
        elif isinstance(step, Mapping):
            params = dict(step)
            name = params.pop("name", None)
            if name is None:
                raise ConfigError(f"cleaner step missing 'name': {step}")
            steps.append((name, params))
        else:
            raise ConfigError(f"bad cleaner step: {step!r}")
    return CleanerChain.of(*steps)


def node_from_dict(spec: Mapping[str, Any]) -> Node:
    """Build a comparator tree node from its YAML form. Leaves carry a
    'property' key; combinators carry 'op' and 'children'."""
    if "property" in spec:
        comp = comparator(spec.get("metric", "levenshtein"), **dict(spec.get("params", {})))
        return Leaf(
            prop=spec["property"],
            comparator=comp,
            chain=_chain_from(spec.get("cleaners")),
            weight=float(spec.get("weight", 1.0)),
            threshold=float(spec.get("threshold", 0.0)),
            missing=spec.get("missing", "ignore"),
        )
    if "op" in spec:
        children = tuple(node_from_dict(c) for c in spec.get("children", []))
        return Combinator(
            op=str(spec["op"]).lower(),
            children=children,
            weight=float(spec.get("weight", 1.0)),
            threshold=float(spec.get("threshold", 0.0)),
        )
    raise ConfigError(f"tree node needs 'property' or 'op': {spec}")


def node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        out: dict[str, Any] = {"property": node.prop, "metric": node.comparator.name}
        if node.comparator.params:
            out["params"] = dict(node.comparator.params)
        if node.chain.steps:
            out["cleaners"] = [
                name if not params else {"name": name, **params}
                for name, params in node.chain.steps
            ]
        if node.weight != 1.0:
            out["weight"] = node.weight
        if node.threshold:
            out["threshold"] = node.threshold
        if node.missing != "ignore":
            out["missing"] = node.missing
        return out
    return {
        "op": node.op,
        "children": [node_to_dict(c) for c in node.children],
        **({"weight": node.weight} if node.weight != 1.0 else {}),
        **({"threshold": node.threshold} if node.threshold else {}),
    }


def blocking_from_dict(spec: Mapping[str, Any]) -> BlockingSpec:
    return BlockingSpec(
        strategy=spec.get("strategy", "naive"),
        key=spec.get("key", "name-prefix"),
        key_params=tuple(sorted(dict(spec.get("params", {})).items())),
        window=int(spec.get("window", 10)),
        include_unkeyed=bool(spec.get("include_unkeyed", False)),
        also=tuple(blocking_from_dict(s) for s in spec.get("also", ())),
    )


def blocking_to_dict(spec: BlockingSpec) -> dict:
    out: dict[str, Any] = {"strategy": spec.strategy}
    if spec.strategy != "naive":
        out["key"] = spec.key
        out["params"] = dict(spec.key_params)
    if spec.strategy == "sorted-neighborhood":
        out["window"] = spec.window
    if spec.also:
        out["also"] = [blocking_to_dict(s) for s in spec.also]
    return out


def fusion_from_dict(spec: Mapping[str, Any]) -> FusionPolicy:
    rules = {}
    for prop, rule in dict(spec.get("properties", {})).items():
        if isinstance(rule, str):
            rules[prop] = FusionRule(rule)
        else:
            params = dict(rule)
            rules[prop] = FusionRule(params.pop("function"), params)
    return FusionPolicy(
        per_property=rules,
        unique_props=frozenset(spec.get("unique", ())),
        quality_threshold=float(spec.get("quality_threshold", 0.5)),
        default_function=spec.get("default", "union"),
        numeric_props=frozenset(spec.get("numeric", ())),
    )


@dataclass(frozen=True)
class RunConfig:
    """Everything one declarative document configures."""

    match: MatchConfig
    schema: SchemaMapping = field(default_factory=SchemaMapping)
    fusion: FusionPolicy = field(default_factory=FusionPolicy)
    dataset_path: Optional[str] = None
    dataset_b_path: Optional[str] = None
    dataset_format: str = "csv"
    id_column: str = "id"
    raw: Mapping[str, Any] = field(default_factory=dict)


def config_from_dict(doc: Mapping[str, Any]) -> RunConfig:
    if "compare" not in doc:
        raise ConfigError("run config needs a 'compare' tree")
    match = MatchConfig(
        tree=node_from_dict(doc["compare"]),
        blocking=blocking_from_dict(doc.get("blocking", {})),
        accept_threshold=float(doc.get("threshold", 0.9)),
        min_comparable_leaves=int(doc.get("min_comparable_leaves", 2)),
        mode=doc.get("mode", "dedup"),
    )
    schema_doc = doc.get("schema", {})
    schema = SchemaMapping(
        aliases=dict(schema_doc.get("aliases", {})),
        type_hints=dict(schema_doc.get("types", {})),
    )
    dataset_doc = doc.get("dataset", {})
    return RunConfig(
        match=match,
        schema=schema,
        fusion=fusion_from_dict(doc.get("fusion", {})),
        dataset_path=dataset_doc.get("path"),
        dataset_b_path=dataset_doc.get("path_b"),
        dataset_format=dataset_doc.get("format", "csv"),
        id_column=dataset_doc.get("id_column", "id"),
        raw=dict(doc),
    )


def load_config(path: str | Path) -> RunConfig:
    try:
        doc = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed run config {path}: {exc}")
    if not isinstance(doc, dict):
        raise ConfigError(f"run config {path} must be a mapping")
    return config_from_dict(doc)


# ---------------------------------------------------------------------------
# Result format: one JSON record per assertion


def assertion_to_record(a: SameAsAssertion) -> dict:
    return {
        "idA": a.a,
        "idB": a.b,
        "sim": a.sim,
        "perProperty": dict(a.per_property),
        "verdict": a.verdict.value,
    }


def write_results(assertions, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for a in assertions:
            fh.write(json.dumps(assertion_to_record(a), sort_keys=True) + "\n")


def read_results(path: str | Path) -> list[SameAsAssertion]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(SameAsAssertion(
                rec["idA"], rec["idB"], rec["sim"],
                rec.get("perProperty", {}),
                verdict=Verdict(rec.get("verdict", "unlabeled")),
            ))
    return out
