"""Candidate-pair generation: naive, standard blocking, sorted neighborhood.

Pairs are streamed in canonical order, each emitted exactly once, so memory
stays bounded by block sizes rather than the n(n-1)/2 pair count.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .cleaners import CleanerChain, ConfigError
from .model import Entity, EntityId, canonical_pair

log = logging.getLogger(__name__)

Pair = tuple[EntityId, EntityId]
KeyFunction = Callable[[Entity], list[str]]

_NAME_CLEAN = CleanerChain.of("lowercase", "collapse-whitespace", "strip-punctuation")

_GEOHASH_BASE32 = "0123456789bcdefghjkmnpqrstuvwxyz"


def geohash(lat: float, lon: float, precision: int = 6) -> str:
    """Standard geohash base-32 encoding."""
    lat_rng, lon_rng = [-90.0, 90.0], [-180.0, 180.0]
    bits = []
    even = True
    while len(bits) < precision * 5:
        if even:
            mid = (lon_rng[0] + lon_rng[1]) / 2
            if lon >= mid:
                bits.append(1)
                lon_rng[0] = mid
            else:
                bits.append(0)
                lon_rng[1] = mid
        else:
            mid = (lat_rng[0] + lat_rng[1]) / 2
            if lat >= mid:
                bits.append(1)
                lat_rng[0] = mid
            else:
                bits.append(0)
                lat_rng[1] = mid
        even = not even
    out = []
    for i in range(0, len(bits), 5):
        idx = 0
        for b in bits[i : i + 5]:
            idx = (idx << 1) | b
        out.append(_GEOHASH_BASE32[idx])
    return "".join(out)


def _name_prefix_key(prop: str, k: int) -> KeyFunction:
    def fn(entity: Entity) -> list[str]:
        cleaned = _NAME_CLEAN.apply(entity.values(prop))
        return sorted({v.raw[:k] for v in cleaned if v.raw})

    return fn


def _geohash_key(prop: str, precision: int) -> KeyFunction:
    def fn(entity: Entity) -> list[str]:
        keys = set()
        for v in entity.values(prop):
            if v.kind != "geopoint":
                continue
            lat, lon = v.geopoint
            keys.add(geohash(lat, lon, precision))
        return sorted(keys)

    return fn


def _url_host_key(prop: str) -> KeyFunction:
    from urllib.parse import urlparse

    def fn(entity: Entity) -> list[str]:
        hosts = set()
        for v in entity.values(prop):
            host = urlparse(v.raw.strip()).netloc.lower()
            if host:
                hosts.add(host)
        return sorted(hosts)

    return fn


KEY_FUNCTIONS: dict[str, Callable[..., KeyFunction]] = {
    "name-prefix": lambda prop="name", k=4: _name_prefix_key(prop, int(k)),
    "geohash": lambda prop="geo", precision=6: _geohash_key(prop, int(precision)),
    "url-host": lambda prop="url", **_: _url_host_key(prop),
}


def key_function(name: str, **params) -> KeyFunction:
    factory = KEY_FUNCTIONS.get(name)
    if factory is None:
        raise ConfigError(f"unknown blocking key function: {name!r}")
    return factory(**params)


@dataclass(frozen=True)
class BlockingSpec:
    strategy: str = "naive"  # naive | standard-blocking | sorted-neighborhood
    key: str = "name-prefix"
    key_params: tuple[tuple[str, object], ...] = ()
    window: int = 10
    include_unkeyed: bool = False
    # multi-pass blocking: the union of this spec's pairs and each extra
    # pass's pairs, deduplicated; lifts the recall ceiling of any single key
    also: tuple["BlockingSpec", ...] = ()

    def __post_init__(self):
        if self.strategy not in ("naive", "standard-blocking", "sorted-neighborhood"):
            raise ConfigError(f"unknown blocking strategy: {self.strategy!r}")
        if self.window < 2:
            raise ConfigError(f"window must be >= 2: {self.window}")
        for extra in self.also:
            if extra.also:
                raise ConfigError("blocking passes do not nest")

    def key_fn(self) -> KeyFunction:
        return key_function(self.key, **dict(self.key_params))


def naive_pairs(entities: Sequence[Entity]) -> Iterator[Pair]:
    """All n(n-1)/2 canonical pairs, each exactly once."""
    ids = sorted(e.id for e in entities)
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            yield (a, b)


def _keys_of(entities: Sequence[Entity], fn: KeyFunction, include_unkeyed: bool):
    keyed: list[tuple[str, EntityId]] = []
    unkeyed = 0
    for e in entities:
        keys = fn(e)
        if not keys:
            if include_unkeyed:
                keyed.append(("", e.id))
            else:
                unkeyed += 1
            continue
        for k in keys:
            keyed.append((k, e.id))
    if unkeyed:
        log.info("blocking: %d entities produced no key and were excluded", unkeyed)
    return keyed


def standard_blocking(
    entities: Sequence[Entity], fn: KeyFunction, include_unkeyed: bool = False
) -> Iterator[Pair]:
    """Pairs of entities sharing at least one block key, deduplicated."""
    blocks: dict[str, list[EntityId]] = {}
    for k, eid in _keys_of(entities, fn, include_unkeyed):
        blocks.setdefault(k, []).append(eid)
    seen: set[Pair] = set()
    for key in sorted(blocks):
        members = sorted(set(blocks[key]))
        for i, a in enumerate(members):
            for b in members[i + 1 :]:
                pair = (a, b)
                if pair not in seen:
                    seen.add(pair)
                    yield pair


def sorted_neighborhood(
    entities: Sequence[Entity], fn: KeyFunction, window: int, include_unkeyed: bool = True
) -> Iterator[Pair]:
    """Sort by key (EntityId tiebreak) and pair each record with the next
    window-1 records."""
    if window < 2:
        raise ConfigError(f"window must be >= 2: {window}")
    return _sorted_neighborhood_iter(entities, fn, window, include_unkeyed)


def _sorted_neighborhood_iter(entities, fn, window, include_unkeyed):
    keyed = []
    for e in entities:
        keys = fn(e)
        key = keys[0] if keys else ""
        if not keys and not include_unkeyed:
            continue
        keyed.append((key, e.id))
    keyed.sort()
    seen: set[Pair] = set()
    for i in range(len(keyed)):
        for j in range(i + 1, min(i + window, len(keyed))):
            pair = canonical_pair(keyed[i][1], keyed[j][1])
            if pair not in seen:
                seen.add(pair)
                yield pair


def _single_pass(entities: Sequence[Entity], spec: BlockingSpec) -> Iterator[Pair]:
    if spec.strategy == "naive":
        return naive_pairs(entities)
    fn = spec.key_fn()
    if spec.strategy == "standard-blocking":
        return standard_blocking(entities, fn, spec.include_unkeyed)
    return sorted_neighborhood(entities, fn, spec.window)


def candidate_pairs(entities: Sequence[Entity], spec: BlockingSpec) -> Iterator[Pair]:
    if not spec.also:
        return _single_pass(entities, spec)

    def union() -> Iterator[Pair]:
        seen: set[Pair] = set()
        from dataclasses import replace

        for s in (replace(spec, also=()),) + spec.also:
            for pair in _single_pass(entities, s):
                if pair not in seen:
                    seen.add(pair)
                    yield pair

    return union()


def cross_pairs(
    a: Sequence[Entity], b: Sequence[Entity], spec: BlockingSpec
) -> Iterator[Pair]:
    """Candidate pairs restricted to one entity from each dataset (linkage)."""
    ids_a = {e.id for e in a}
    ids_b = {e.id for e in b}
    overlap = ids_a & ids_b
    if overlap:
        raise ConfigError(f"linkage datasets share ids: {sorted(overlap)[:3]}...")
    merged = list(a) + list(b)
    for x, y in candidate_pairs(merged, spec):
        if (x in ids_a) != (y in ids_a):
            yield (x, y)
