"""Resolve conflicting property values within an equivalence class into a
single fused entity, with a complete per-decision log and human overrides."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from .cleaners import ConfigError
from .model import Entity, EntityId, EquivalenceSet, PropertyValue

log = logging.getLogger(__name__)

FUSION_FUNCTIONS = (
    "filter", "average", "voting", "latest", "prefer-source", "longest", "union",
)
SINGLE_VALUED = ("average", "voting", "latest", "longest")


class PolicyError(ConfigError):
    pass


@dataclass(frozen=True)
class FusionRule:
    function: str
    params: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.function not in FUSION_FUNCTIONS:
            raise PolicyError(f"unknown fusion function: {self.function!r}")
        if self.function == "prefer-source" and "source" not in self.params:
            raise PolicyError("prefer-source requires a 'source' parameter")


@dataclass(frozen=True)
class FusionPolicy:
    per_property: Mapping[str, FusionRule] = field(default_factory=dict)
    unique_props: frozenset[str] = frozenset()
    quality_threshold: float = 0.5
    default_function: str = "union"
    numeric_props: frozenset[str] = frozenset()

    def __post_init__(self):
        if not 0.0 <= self.quality_threshold <= 1.0:
            raise PolicyError("qualityThreshold out of [0,1]")
        for prop, rule in self.per_property.items():
            if rule.function == "average" and prop not in self.numeric_props:
                raise PolicyError(
                    f"average on {prop!r} requires it declared numeric "
                    "(number or geopoint kind)"
                )

    def rule_for(self, prop: str) -> FusionRule:
        rule = self.per_property.get(prop)
        if rule is not None:
            return rule
        if prop in self.unique_props:
            return FusionRule("voting")
        return FusionRule(self.default_function)


@dataclass(frozen=True)
class FusionDecision:
    prop: str
    inputs: tuple[PropertyValue, ...]
    function: str
    outputs: tuple[PropertyValue, ...]
    rationale: str

    def as_dict(self) -> dict:
        return {
            "property": self.prop,
            "inputs": [v.raw for v in self.inputs],
            "function": self.function,
            "outputs": [v.raw for v in self.outputs],
            "rationale": self.rationale,
        }


@dataclass(frozen=True)
class FusedEntity:
    id: EntityId
    member_ids: tuple[EntityId, ...]
    type: str
    properties: Mapping[str, tuple[PropertyValue, ...]]
    decisions: tuple[FusionDecision, ...]
    unresolved: tuple[str, ...] = ()  # unique props left with >1 value

    def values(self, prop: str) -> tuple[PropertyValue, ...]:
        return tuple(self.properties.get(prop, ()))


def _quality(v: PropertyValue) -> float:
    return 1.0 if v.quality is None else v.quality


def _vote_key(v: PropertyValue, counts: Mapping[str, int]):
    # most frequent wins; ties: higher quality, newer provenance, lexicographic
    return (-counts[v.raw], -_quality(v), -v.provenance.ingested_at, v.raw)


def apply_function(
    rule: FusionRule, values: Sequence[PropertyValue], quality_threshold: float
) -> tuple[tuple[PropertyValue, ...], str]:
    """Run one fusion function over a value multiset; returns the surviving
    values and a human-readable rationale."""
    values = tuple(values)
    fn = rule.function
    if fn == "union":
        seen: dict[str, PropertyValue] = {}
        for v in sorted(values, key=lambda v: v.raw):
            seen.setdefault(v.raw, v)
        return tuple(seen.values()), f"kept {len(seen)} distinct of {len(values)} values"
    if fn == "filter":
        threshold = float(rule.params.get("threshold", quality_threshold))
        kept = tuple(v for v in values if _quality(v) >= threshold)
        return kept, f"kept {len(kept)}/{len(values)} values with quality >= {threshold}"
    if fn == "voting":
        counts: dict[str, int] = {}
        for v in values:
            counts[v.raw] = counts.get(v.raw, 0) + 1
        winner = min(values, key=lambda v: _vote_key(v, counts))
        return (winner,), f"most frequent value ({counts[winner.raw]}/{len(values)} votes)"
    if fn == "latest":
        winner = min(values, key=lambda v: (-v.provenance.ingested_at, v.raw))
        return (winner,), f"newest ingestion timestamp {winner.provenance.ingested_at}"
    if fn == "prefer-source":
        source = str(rule.params["source"])
        preferred = [v for v in values if v.provenance.source == source]
        pool = preferred or list(values)
        winner = min(pool, key=lambda v: v.raw)
        why = "from preferred source" if preferred else "preferred source absent, fallback"
        return (winner,), f"{why} {source!r}"
    if fn == "longest":
        winner = min(values, key=lambda v: (-len(v.raw), v.raw))
        return (winner,), f"longest lexical form ({len(winner.raw)} chars)"
    if fn == "average":
        kinds = {v.kind for v in values}
        if kinds == {"geopoint"}:
            points = [v.geopoint for v in values]
            lat = sum(p[0] for p in points) / len(points)
            lon = sum(p[1] for p in points) / len(points)
            out = replace(values[0], raw=f"{lat},{lon}")
            return (out,), f"component-wise mean of {len(points)} geopoints"
        try:
            nums = [float(v.raw) for v in values]
        except ValueError:
            raise PolicyError(f"average over non-numeric values: {[v.raw for v in values]}")
        mean = sum(nums) / len(nums)
        out = replace(values[0], raw=repr(mean), kind="number")
        return (out,), f"arithmetic mean of {len(nums)} values"
    raise PolicyError(f"unknown fusion function: {fn!r}")


def fuse_class(
    cls: EquivalenceSet,
    entities: Mapping[EntityId, Entity],
    policy: FusionPolicy,
) -> FusedEntity:
    """Fuse all members of an equivalence class. Deterministic in member
    order; unique-value constraints that stay violated are flagged as
    unresolved for human review rather than silently dropped."""
    members = sorted(cls.members)
    for m in members:
        if m not in entities:
            raise KeyError(f"class member {m!r} not resolvable")
    ent_type = entities[members[0]].type
    merged: dict[str, list[PropertyValue]] = {}
    for m in members:
        for prop, vals in entities[m].properties.items():
            merged.setdefault(prop, []).extend(vals)

    fused_props: dict[str, tuple[PropertyValue, ...]] = {}
    decisions: list[FusionDecision] = []
    unresolved: list[str] = []
    for prop in sorted(merged):
        inputs = tuple(sorted(merged[prop], key=lambda v: (v.raw, -_quality(v))))
        rule = policy.rule_for(prop)
        outputs, rationale = apply_function(rule, inputs, policy.quality_threshold)
        distinct_out = {v.raw for v in outputs}
        if prop in policy.unique_props and len(distinct_out) > 1:
            unresolved.append(prop)
            rationale += "; unique-value constraint still violated"
            log.warning("fusion: unresolved unique property %r in class %s", prop, members)
        decisions.append(FusionDecision(prop, inputs, rule.function, outputs, rationale))
        if outputs:
            fused_props[prop] = outputs
    return FusedEntity(
        id="fused:" + "+".join(members),
        member_ids=tuple(members),
        type=ent_type,
        properties=fused_props,
        decisions=tuple(decisions),
        unresolved=tuple(unresolved),
    )


class OverrideError(ValueError):
    pass


def resolve_overrides(
    fused: FusedEntity,
    overrides: Sequence[tuple[str, str, str]],  # (property, chosen raw, operator)
) -> FusedEntity:
    """Replace a fused property's output with one of the original inputs.
    Free-text injection is rejected: the chosen value must be among the
    inputs recorded in the decision log."""
    props = dict(fused.properties)
    decisions = list(fused.decisions)
    unresolved = set(fused.unresolved)
    for prop, chosen, operator in overrides:
        original = next((d for d in fused.decisions if d.prop == prop), None)
        if original is None:
            raise OverrideError(f"no fused property {prop!r} to override")
        match = next((v for v in original.inputs if v.raw == chosen), None)
        if match is None:
            raise OverrideError(
                f"override value {chosen!r} is not among the inputs for {prop!r}"
            )
        props[prop] = (match,)
        unresolved.discard(prop)
        decisions.append(
            FusionDecision(prop, original.inputs, "human-override", (match,),
                           f"human decision by {operator!r}")
        )
    return replace(
        fused,
        properties=props,
        decisions=tuple(decisions),
        unresolved=tuple(sorted(unresolved)),
    )
