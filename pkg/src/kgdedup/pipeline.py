"""Orchestration: clean -> block -> compare -> threshold into scored
same-as assertions, with status logging and run statistics."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterator, Optional

from .blocking import BlockingSpec, candidate_pairs, cross_pairs
from .cleaners import ConfigError
from .ingest import Dataset
from .metrics import Node, evaluate_tree, tree_properties
from .model import SameAsAssertion

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchConfig:
    tree: Node
    blocking: BlockingSpec = field(default_factory=BlockingSpec)
    accept_threshold: float = 0.9
    min_comparable_leaves: int = 2
    mode: str = "dedup"  # dedup | linkage

    def __post_init__(self):
        if not 0.0 <= self.accept_threshold <= 1.0:
            raise ConfigError(f"acceptThreshold out of [0,1]: {self.accept_threshold}")
        if self.min_comparable_leaves < 1:
            raise ConfigError("minComparableLeaves must be >= 1")
        if self.mode not in ("dedup", "linkage"):
            raise ConfigError(f"unknown mode: {self.mode!r}")


@dataclass
class RunReport:
    candidate_count: int = 0
    scored_count: int = 0
    accepted_count: int = 0
    wall_time_seconds: float = 0.0
    stage_timings: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "candidateCount": self.candidate_count,
            "scoredCount": self.scored_count,
            "acceptedCount": self.accepted_count,
            "wallTimeSeconds": self.wall_time_seconds,
            "perStageTimings": dict(self.stage_timings),
            "warnings": list(self.warnings),
        }


def _validate_config(config: MatchConfig, datasets: list[Dataset]) -> None:
    schema = set()
    for ds in datasets:
        schema |= ds.schema()
    unknown = tree_properties(config.tree) - schema
    if unknown:
        raise ConfigError(f"config references unknown properties: {sorted(unknown)}")


def score_pairs(
    pairs, entities_by_id, config: MatchConfig, report: RunReport
) -> Iterator[SameAsAssertion]:
    """Score every candidate pair; yields all scored assertions (unfiltered),
    in stream order."""
    for a, b in pairs:
        report.candidate_count += 1
        result = evaluate_tree(config.tree, entities_by_id[a], entities_by_id[b])
        report.scored_count += 1
        if result.comparable_leaves < config.min_comparable_leaves:
            continue
        yield SameAsAssertion(a, b, result.sim, dict(result.per_property))


def _run(
    pairs, datasets: list[Dataset], config: MatchConfig, min_sim: Optional[float]
) -> tuple[list[SameAsAssertion], RunReport]:
    report = RunReport()
    t0 = time.perf_counter()
    _validate_config(config, datasets)
    entities = {}
    for ds in datasets:
        entities.update(ds.by_id())
    report.stage_timings["prepare"] = time.perf_counter() - t0

    log.info("scoring: blocking=%s threshold=%.3f", config.blocking.strategy, config.accept_threshold)
    t1 = time.perf_counter()
    floor = config.accept_threshold if min_sim is None else min_sim
    kept = [a for a in score_pairs(pairs, entities, config, report) if a.sim >= floor]
    report.stage_timings["score"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    kept.sort(key=lambda a: (a.a, a.b))
    report.accepted_count = sum(1 for a in kept if a.sim >= config.accept_threshold)
    report.stage_timings["collect"] = time.perf_counter() - t2
    report.wall_time_seconds = time.perf_counter() - t0
    log.info(
        "done: %d candidates, %d scored, %d accepted in %.2fs",
        report.candidate_count, report.scored_count, report.accepted_count,
        report.wall_time_seconds,
    )
    return kept, report


def run_dedup(
    dataset: Dataset, config: MatchConfig, min_sim: Optional[float] = None
) -> tuple[list[SameAsAssertion], RunReport]:
    """Deduplicate one dataset. Returns assertions with sim >= accept
    threshold (or >= min_sim when given, for threshold sweeps) sorted by
    canonical pair, plus a run report."""
    if not dataset.entities:
        report = RunReport(warnings=["empty dataset"])
        log.warning("run_dedup on empty dataset")
        return [], report
    pairs = candidate_pairs(dataset.entities, config.blocking)
    return _run(pairs, [dataset], config, min_sim)


def run_linkage(
    dataset_a: Dataset, dataset_b: Dataset, config: MatchConfig,
    min_sim: Optional[float] = None,
) -> tuple[list[SameAsAssertion], RunReport]:
    """Link two datasets: only cross-dataset pairs are scored."""
    if not dataset_a.entities or not dataset_b.entities:
        report = RunReport(warnings=["empty dataset"])
        return [], report
    pairs = cross_pairs(dataset_a.entities, dataset_b.entities, config.blocking)
    return _run(pairs, [dataset_a, dataset_b], config, min_sim)
