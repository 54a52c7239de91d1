"""Synthetic restaurant benchmark generator with planted, corrupted
duplicates and a fully-labeled closed-world gold standard."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from .blocking import BlockingSpec
from .evaluate import GoldStandard, submit_label
from .ingest import Dataset
from .metrics import Combinator, Leaf, comparator
from .model import Entity, Provenance, PropertyValue, Verdict
from .pipeline import MatchConfig

ERROR_KINDS = (
    "typo", "address-permutation", "country-suffix",
    "missing-geo", "property-alias", "value-conflict",
)

DEFAULT_ERROR_MIX = {
    "typo": 3.0,
    "address-permutation": 2.0,
    "country-suffix": 1.0,
    "missing-geo": 1.0,
    "property-alias": 1.0,
    "value-conflict": 1.0,
}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class SyntheticSpec:
    entity_count: int
    duplicate_count: int
    error_mix: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_ERROR_MIX))
    random_seed: int = 0
    different_pair_factor: int = 3  # sampled non-duplicate labels per duplicate

    def __post_init__(self):
        if self.entity_count < 1:
            raise SpecError("entityCount must be >= 1")
        if self.duplicate_count > self.entity_count:
            raise SpecError("duplicateCount exceeds entityCount")
        unknown = set(self.error_mix) - set(ERROR_KINDS)
        if unknown:
            raise SpecError(f"unknown error kinds: {sorted(unknown)}")
        if any(w < 0 for w in self.error_mix.values()):
            raise SpecError("error-mix weights must be >= 0")


_TOWNS = [
    ("Seefeld", 47.33, 11.19),
    ("Serfaus", 47.04, 10.60),
    ("Mayrhofen", 47.16, 11.86),
    ("Innsbruck", 47.26, 11.39),
    ("Kitzbuehel", 47.45, 12.39),
    ("Soelden", 46.97, 11.01),
    ("Ischgl", 47.01, 10.29),
    ("Lech", 47.21, 10.14),
]

_BRAND_SYLLABLES = [
    "Hu", "Al", "Ber", "Tan", "Gol", "Sil", "Ros", "Wei", "Stein", "Moos",
    "Brun", "Edel", "Gam", "Hirsch", "Kro", "Lam", "Murm", "Nord", "Ost", "Pan",
    "Quell", "Rau", "See", "Tal", "Urs", "Vog", "Wild", "Zill", "Arl", "Bach",
]
_BRAND_TAILS = ["er", "en", "hof", "eck", "berg", "au", "wirt", "ler", "ner", "egg"]
_VENUE_TYPES = [
    "Restaurant", "Bar", "Cafe", "Pizzeria", "Trattoria", "Stube",
    "Alm", "Keller", "Grill", "Bistro",
]
_STREETS = [
    "Herrenanger", "Dorfbahnweg", "Hauptplatz", "Kirchgasse", "Muehlweg",
    "Seestrasse", "Bergweg", "Sonnenplateau", "Talstation", "Marktgraben",
    "Innrain", "Alpenweg",
]

_INGESTED_AT = 1_600_000_000.0  # fixed so serialization is reproducible


def _make_base_entities(rng: random.Random, n: int) -> list[Entity]:
    prov = Provenance("synthetic", _INGESTED_AT)
    brand_pool_size = max(8, n // 8)
    brands = []
    while len(brands) < brand_pool_size:
        brand = rng.choice(_BRAND_SYLLABLES) + rng.choice(_BRAND_TAILS)
        if rng.random() < 0.3:
            brand += "'s"
        brands.append(brand)
    used_names = set()
    entities = []
    for i in range(n):
        brand = rng.choice(brands)
        venue = rng.choice(_VENUE_TYPES)
        name = f"{brand} {venue}"
        if name in used_names:
            name = f"{name} {len(used_names) % 97 + 1}"
        while name in used_names:
            name += "x"
        used_names.add(name)
        town, base_lat, base_lon = rng.choice(_TOWNS)
        lat = round(base_lat + rng.uniform(-0.03, 0.03), 6)
        lon = round(base_lon + rng.uniform(-0.03, 0.03), 6)
        street = f"Str. {rng.choice(_STREETS)} {rng.randrange(1, 60)}"
        slug = "".join(c for c in name.lower() if c.isalnum())
        props = {
            "name": (PropertyValue("text", name, prov),),
            "url": (PropertyValue("url", f"http://www.{slug}.at", prov),),
            "streetAddress": (PropertyValue("text", f"{street}, {town}", prov),),
            "geo": (PropertyValue("geopoint", f"{lat},{lon}", prov),),
        }
        entities.append(Entity(f"e{i:06d}", "Restaurant", props))
    return entities


_NUMBER_WORDS = {
    "1": "One", "2": "Two", "3": "Three", "4": "Four", "5": "Five",
    "6": "Six", "7": "Seven", "8": "Eight", "9": "Nine", "10": "Ten",
    "11": "Eleven", "12": "Twelve",
}


def _typo(rng: random.Random, s: str) -> str:
    if len(s) < 2:
        return s + "x"
    i = rng.randrange(len(s) - 1)
    op = rng.randrange(3)
    if op == 0:  # drop
        return s[:i] + s[i + 1 :]
    if op == 1:  # swap
        return s[:i] + s[i + 1] + s[i] + s[i + 2 :]
    return s[:i] + rng.choice("abcdefghijklmnopqrstuvwxyz") + s[i + 1 :]


def _permute_address(rng: random.Random, s: str) -> str:
    addr, _, town = s.partition(",")
    tokens = addr.split()
    if tokens and tokens[-1].isdigit():
        number = tokens[-1]
        if rng.random() < 0.5 and number in _NUMBER_WORDS:
            tokens[-1] = _NUMBER_WORDS[number]
        else:
            tokens = [number] + tokens[:-1]
    out = " ".join(tokens)
    return out + ("," + town if town else "")


def _corrupt(rng: random.Random, entity: Entity, kind: str) -> Entity:
    props = {k: list(v) for k, v in entity.properties.items()}

    def set_raw(prop: str, raw: str):
        props[prop] = [props[prop][0].with_raw(raw)]

    if kind == "typo":
        set_raw("name", _typo(rng, props["name"][0].raw))
    elif kind == "address-permutation":
        set_raw("streetAddress", _permute_address(rng, props["streetAddress"][0].raw))
    elif kind == "country-suffix":
        addr = props["streetAddress"][0].raw
        set_raw("streetAddress", addr + ", AT" if not addr.endswith(", AT") else addr)
    elif kind == "missing-geo":
        props.pop("geo", None)
    elif kind == "property-alias":
        props["label"] = props.pop("name")
    elif kind == "value-conflict":
        set_raw("name", props["name"][0].raw + "****Superior")
    else:
        raise SpecError(f"unknown error kind: {kind!r}")
    return Entity(entity.id + "-d", entity.type, {k: tuple(v) for k, v in props.items()})


def generate_synthetic(spec: SyntheticSpec) -> tuple[Dataset, GoldStandard]:
    """Generate base entities plus planted corrupted duplicates.

    The gold standard is closed-world complete: every planted pair is labeled
    same and a sample of non-duplicate pairs is labeled different.
    Byte-identical output for a fixed seed.
    """
    rng = random.Random(spec.random_seed)
    base = _make_base_entities(rng, spec.entity_count)

    weights = {k: spec.error_mix.get(k, 0.0) for k in ERROR_KINDS}
    if sum(weights.values()) <= 0:
        weights = {"typo": 1.0}
    kinds, kind_weights = zip(*[(k, w) for k, w in weights.items() if w > 0])

    originals = rng.sample(base, spec.duplicate_count)
    gold = GoldStandard()
    duplicates = []
    for orig in originals:
        kind = rng.choices(kinds, kind_weights)[0]
        dup = _corrupt(rng, orig, kind)
        duplicates.append(dup)
        gold = submit_label(gold, orig.id, dup.id, Verdict.SAME,
                            labeler="generator", timestamp=_INGESTED_AT)

    planted = {tuple(sorted((o.id, d.id))) for o, d in zip(originals, duplicates)}
    target_diff = spec.duplicate_count * spec.different_pair_factor
    attempts = 0
    while len(gold) < spec.duplicate_count + target_diff and attempts < target_diff * 20:
        attempts += 1
        a, b = rng.sample(base, 2) if len(base) >= 2 else (None, None)
        if a is None:
            break
        pair = tuple(sorted((a.id, b.id)))
        if pair in planted or pair in gold.current():
            continue
        gold = submit_label(gold, a.id, b.id, Verdict.DIFFERENT,
                            labeler="generator", timestamp=_INGESTED_AT)

    entities = sorted(base + duplicates, key=lambda e: e.id)
    dataset = Dataset(f"synthetic-{spec.entity_count}-{spec.duplicate_count}-{spec.random_seed}",
                      tuple(entities), "synthetic")
    return dataset, gold


def oracle_config() -> MatchConfig:
    """Exact-match OR over all generated properties: every planted pair
    agrees exactly on at least one uncorrupted property, so recall is 1."""
    tree = Combinator("or", (
        Leaf("name", comparator("exact")),
        Leaf("url", comparator("exact")),
        Leaf("streetAddress", comparator("exact")),
        Leaf("geo", comparator("geo", scale_meters=1.0)),
    ))
    return MatchConfig(tree, BlockingSpec("naive"), accept_threshold=1.0,
                       min_comparable_leaves=1)


def benchmark_config() -> MatchConfig:
    """Hand-written combined config: gated AND over a name metric and geo
    distance, the shape suggested for precise duplicate detection."""
    tree = Combinator("and", (
        Leaf("name", comparator("jaro-winkler"),
             chain=_name_chain(), weight=1.0, threshold=0.6),
        Leaf("geo", comparator("geo", scale_meters=500.0), weight=1.0, threshold=0.5),
    ))
    return MatchConfig(tree, BlockingSpec("naive"), accept_threshold=0.85,
                       min_comparable_leaves=2)


def name_only_config(threshold: float = 0.9) -> MatchConfig:
    tree = Leaf("name", comparator("jaro-winkler"), chain=_name_chain())
    return MatchConfig(tree, BlockingSpec("naive"), accept_threshold=threshold,
                       min_comparable_leaves=1)


def _name_chain():
    from .cleaners import CleanerChain

    return CleanerChain.of("lowercase", "collapse-whitespace")
