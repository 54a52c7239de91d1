"""Core domain types: entities, same-as assertions, equivalence closure and
unique-value constraint checks."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping, Optional, Sequence

EntityId = str

VALUE_KINDS = ("text", "number", "url", "geopoint", "timestamp")


class Verdict(str, Enum):
    UNLABELED = "unlabeled"
    SAME = "same"
    DIFFERENT = "different"
    RELATED = "related"


class DecidedBy(str, Enum):
    THRESHOLD = "threshold"
    HUMAN = "human"


class SelfPairError(ValueError):
    """Raised when a pair of identical ids is constructed; reflexive pairs
    are implicit and never stored."""


class ReferentialError(ValueError):
    """An assertion references an id outside the entity universe."""


@dataclass(frozen=True)
class Provenance:
    source: str = "unknown"
    ingested_at: float = 0.0  # seconds since epoch


@dataclass(frozen=True)
class PropertyValue:
    """One value of an entity property, keeping the original lexical form.

    ``raw`` is never empty: absent values are represented by absence of the
    value, not by an empty string. Geopoints carry ``raw`` as "lat,lon".
    """

    kind: str
    raw: str
    provenance: Provenance = field(default_factory=Provenance)
    quality: Optional[float] = None

    def __post_init__(self):
        if self.kind not in VALUE_KINDS:
            raise ValueError(f"unknown value kind: {self.kind!r}")
        if not self.raw:
            raise ValueError("raw lexical form must be non-empty")
        if self.quality is not None and not 0.0 <= self.quality <= 1.0:
            raise ValueError(f"quality out of [0,1]: {self.quality}")
        if self.kind == "geopoint":
            lat, lon = self.geopoint
            if not -90.0 <= lat <= 90.0:
                raise ValueError(f"latitude out of range: {lat}")
            if not -180.0 <= lon <= 180.0:
                raise ValueError(f"longitude out of range: {lon}")

    @property
    def geopoint(self) -> tuple[float, float]:
        lat_s, lon_s = self.raw.split(",", 1)
        return float(lat_s), float(lon_s)

    @property
    def number(self) -> float:
        return float(self.raw)

    def with_raw(self, raw: str, kind: str | None = None) -> "PropertyValue":
        return replace(self, raw=raw, kind=kind or self.kind)


def text_value(raw: str, **kw) -> PropertyValue:
    return PropertyValue("text", raw, **kw)


def geo_value(lat: float, lon: float, **kw) -> PropertyValue:
    return PropertyValue("geopoint", f"{lat},{lon}", **kw)


@dataclass(frozen=True)
class Entity:
    id: EntityId
    type: str
    properties: Mapping[str, tuple[PropertyValue, ...]]

    def __post_init__(self):
        if not self.id:
            raise ValueError("entity id must be non-empty")
        if not self.properties:
            raise ValueError(f"entity {self.id!r} has no properties")
        for name, values in self.properties.items():
            if not values:
                raise ValueError(
                    f"entity {self.id!r}: property {name!r} present but empty; "
                    "absent properties must omit the key"
                )

    def values(self, prop: str) -> tuple[PropertyValue, ...]:
        return tuple(self.properties.get(prop, ()))


@dataclass(frozen=True)
class SameAsAssertion:
    a: EntityId
    b: EntityId
    sim: float
    per_property: Mapping[str, float] = field(default_factory=dict)
    verdict: Verdict = Verdict.UNLABELED
    decided_by: DecidedBy = DecidedBy.THRESHOLD

    def __post_init__(self):
        if (self.a, self.b) != canonical_pair(self.a, self.b):
            raise ValueError(f"pair ({self.a}, {self.b}) is not canonical")
        if not 0.0 <= self.sim <= 1.0:
            raise ValueError(f"sim out of [0,1]: {self.sim}")

    @property
    def pair(self) -> tuple[EntityId, EntityId]:
        return (self.a, self.b)


@dataclass(frozen=True)
class EquivalenceSet:
    members: frozenset[EntityId]

    def __post_init__(self):
        if not self.members:
            raise ValueError("equivalence set must be non-empty")


@dataclass(frozen=True)
class ConstraintViolation:
    members: frozenset[EntityId]
    prop: str
    values: tuple[str, ...]  # the >=2 distinct conflicting (normalized) forms


def canonical_pair(a: EntityId, b: EntityId) -> tuple[EntityId, EntityId]:
    """Order a pair lexicographically so symmetry is structural."""
    if a == b:
        raise SelfPairError(f"self-pair: {a!r}")
    return (a, b) if a < b else (b, a)


class _UnionFind:
    """Union by size with path compression."""

    def __init__(self, ids: Iterable[EntityId]):
        self.parent = {i: i for i in ids}
        self.size = {i: 1 for i in self.parent}

    def find(self, x: EntityId) -> EntityId:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: EntityId, b: EntityId) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]


def equivalence_classes(
    ids: Iterable[EntityId],
    confirmed: Iterable[SameAsAssertion | tuple[EntityId, EntityId]],
) -> set[EquivalenceSet]:
    """Transitive closure of confirmed same-as pairs over the id universe.

    The result is a partition: disjoint sets covering every id, singletons
    included (reflexivity is implicit).
    """
    universe = set(ids)
    uf = _UnionFind(universe)
    for item in confirmed:
        a, b = item.pair if isinstance(item, SameAsAssertion) else item
        if a not in universe or b not in universe:
            raise ReferentialError(f"assertion ({a}, {b}) references unknown id")
        uf.union(a, b)
    groups: dict[EntityId, set[EntityId]] = {}
    for i in universe:
        groups.setdefault(uf.find(i), set()).add(i)
    return {EquivalenceSet(frozenset(g)) for g in groups.values()}


def detect_violations(
    cls: EquivalenceSet,
    entities: Mapping[EntityId, Entity],
    unique_props: Iterable[str],
    normalizer=None,
) -> list[ConstraintViolation]:
    """Report unique-valued properties that carry >=2 distinct values across
    an equivalence class.

    ``normalizer(prop, value) -> PropertyValue | None`` is applied before
    comparing distinctness, so lexical variants of one value do not count as
    a conflict.
    """
    for m in cls.members:
        if m not in entities:
            raise ReferentialError(f"class member {m!r} not resolvable")
    violations = []
    for prop in sorted(set(unique_props)):
        distinct: dict[str, None] = {}
        for member in sorted(cls.members):
            for value in entities[member].values(prop):
                if normalizer is not None:
                    value = normalizer(prop, value)
                    if value is None:
                        continue
                distinct.setdefault(value.raw)
        if len(distinct) >= 2:
            violations.append(
                ConstraintViolation(cls.members, prop, tuple(distinct))
            )
    return violations
