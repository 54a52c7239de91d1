"""Similarity metrics and combinator trees producing scores in [0, 1].

Five metric families are covered: string (edit and set based), vector space
(cosine over token counts), point-set distance (haversine), temporal, and
topological (bounding-box overlap).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Optional, Sequence

from .cleaners import CleanerChain, ConfigError, EMPTY_CHAIN
from .model import Entity, PropertyValue

EARTH_RADIUS_M = 6_371_000.0


# ---------------------------------------------------------------------------
# String metrics


def levenshtein_distance(a: str, b: str) -> int:
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


# the O(len*len) metrics are memoized: candidate generation revisits the
# same value pairs many times (multi-pass blocking, repeated GA fitness runs)
@lru_cache(maxsize=1 << 18)
def levenshtein_sim(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - levenshtein_distance(a, b) / max(len(a), len(b))


def jaro_sim(a: str, b: str) -> float:
    if a == b:
        return 1.0
    if not a or not b:
        return 0.0
    window = max(len(a), len(b)) // 2 - 1
    window = max(window, 0)
    a_match = [False] * len(a)
    b_match = [False] * len(b)
    matches = 0
    for i, ca in enumerate(a):
        lo, hi = max(0, i - window), min(len(b), i + window + 1)
        for j in range(lo, hi):
            if not b_match[j] and b[j] == ca:
                a_match[i] = b_match[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    transpositions = 0
    j = 0
    for i in range(len(a)):
        if a_match[i]:
            while not b_match[j]:
                j += 1
            if a[i] != b[j]:
                transpositions += 1
            j += 1
    t = transpositions // 2
    m = matches
    return (m / len(a) + m / len(b) + (m - t) / m) / 3.0


@lru_cache(maxsize=1 << 18)
def jaro_winkler_sim(a: str, b: str, prefix_weight: float = 0.1) -> float:
    jaro = jaro_sim(a, b)
    prefix = 0
    for ca, cb in zip(a, b):
        if ca != cb or prefix == 4:
            break
        prefix += 1
    return jaro + prefix * prefix_weight * (1.0 - jaro)


def _tokens(s: str) -> list[str]:
    return s.split()


def jaccard_sim(a: str, b: str) -> float:
    sa, sb = set(_tokens(a)), set(_tokens(b))
    if not sa and not sb:
        return 1.0
    union = sa | sb
    return len(sa & sb) / len(union) if union else 0.0


def dice_sim(a: str, b: str) -> float:
    sa, sb = set(_tokens(a)), set(_tokens(b))
    if not sa and not sb:
        return 1.0
    if not sa or not sb:
        return 0.0
    return 2.0 * len(sa & sb) / (len(sa) + len(sb))


@lru_cache(maxsize=1 << 18)
def cosine_sim(a: str, b: str) -> float:
    ca, cb = Counter(_tokens(a)), Counter(_tokens(b))
    if ca == cb:
        return 1.0
    dot = sum(ca[t] * cb[t] for t in ca)
    na = math.sqrt(sum(v * v for v in ca.values()))
    nb = math.sqrt(sum(v * v for v in cb.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, dot / (na * nb))


def _qgrams(s: str, q: int) -> set[str]:
    if len(s) <= q:
        return {s} if s else set()
    return {s[i : i + q] for i in range(len(s) - q + 1)}


@lru_cache(maxsize=1 << 18)
def qgram_sim(a: str, b: str, q: int = 2) -> float:
    ga, gb = _qgrams(a, q), _qgrams(b, q)
    if not ga and not gb:
        return 1.0
    union = ga | gb
    return len(ga & gb) / len(union) if union else 0.0


def _lcs_substring_len(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    best = 0
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b, 1):
            if ca == cb:
                cur[j] = prev[j - 1] + 1
                best = max(best, cur[j])
        prev = cur
    return best


@lru_cache(maxsize=1 << 18)
def lcs_sim(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return _lcs_substring_len(a, b) / max(len(a), len(b))


def numeric_relative_sim(a: str, b: str) -> float:
    try:
        na, nb = float(a.replace(",", ".")), float(b.replace(",", "."))
    except ValueError:
        return 1.0 if a == b else 0.0
    if na == nb:
        return 1.0
    denom = max(abs(na), abs(nb))
    return max(0.0, 1.0 - abs(na - nb) / denom)


def prefix_sim(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    n = 0
    for ca, cb in zip(a, b):
        if ca != cb:
            break
        n += 1
    return n / max(len(a), len(b))


def suffix_sim(a: str, b: str) -> float:
    return prefix_sim(a[::-1], b[::-1])


def exact_sim(a: str, b: str) -> float:
    return 1.0 if a == b else 0.0


# ---------------------------------------------------------------------------
# Point-set, temporal, topological


def haversine_m(a: tuple[float, float], b: tuple[float, float]) -> float:
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    dlat, dlon = lat2 - lat1, lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def geo_sim(a: tuple[float, float], b: tuple[float, float], scale_m: float = 1000.0) -> float:
    if scale_m <= 0:
        raise ConfigError("geo scale must be positive")
    return max(0.0, 1.0 - haversine_m(a, b) / scale_m)


def temporal_sim(a: float, b: float, scale_s: float = 86_400.0) -> float:
    if scale_s <= 0:
        raise ConfigError("temporal scale must be positive")
    return max(0.0, 1.0 - abs(a - b) / scale_s)


def bbox_overlap_sim(
    a: tuple[float, float, float, float], b: tuple[float, float, float, float]
) -> float:
    """Jaccard of two axis-aligned boxes (min_lat, min_lon, max_lat, max_lon)."""

    def area(box):
        return max(0.0, box[2] - box[0]) * max(0.0, box[3] - box[1])

    inter_box = (
        max(a[0], b[0]),
        max(a[1], b[1]),
        min(a[2], b[2]),
        min(a[3], b[3]),
    )
    inter = area(inter_box)
    union = area(a) + area(b) - inter
    if union == 0.0:
        return 1.0  # two degenerate equal boxes
    return inter / union


# ---------------------------------------------------------------------------
# Comparator registry


@dataclass(frozen=True)
class Comparator:
    name: str
    family: str  # string | vector | pointset | temporal | topological
    fn: Callable[[PropertyValue, PropertyValue], float] = field(compare=False)
    params: tuple[tuple[str, object], ...] = ()

    def __call__(self, a: PropertyValue, b: PropertyValue) -> float:
        return self.fn(a, b)


def _on_raw(fn: Callable[[str, str], float]):
    return lambda a, b: fn(a.raw, b.raw)


def _geo_comparator(scale_m: float):
    def fn(a: PropertyValue, b: PropertyValue) -> float:
        return geo_sim(a.geopoint, b.geopoint, scale_m)

    return fn


def _temporal_comparator(scale_s: float):
    def fn(a: PropertyValue, b: PropertyValue) -> float:
        return temporal_sim(float(a.raw), float(b.raw), scale_s)

    return fn


def _bbox_comparator():
    def fn(a: PropertyValue, b: PropertyValue) -> float:
        box_a = tuple(float(x) for x in a.raw.split(","))
        box_b = tuple(float(x) for x in b.raw.split(","))
        return bbox_overlap_sim(box_a, box_b)

    return fn


_STRING_METRICS: dict[str, Callable[[str, str], float]] = {
    "exact": exact_sim,
    "levenshtein": levenshtein_sim,
    "jaro-winkler": jaro_winkler_sim,
    "jaccard": jaccard_sim,
    "dice": dice_sim,
    "lcs": lcs_sim,
    "numeric": numeric_relative_sim,
    "prefix": prefix_sim,
    "suffix": suffix_sim,
}

_FAMILY = {
    "exact": "string",
    "levenshtein": "string",
    "jaro-winkler": "string",
    "jaccard": "string",
    "dice": "string",
    "qgram": "string",
    "lcs": "string",
    "numeric": "string",
    "prefix": "string",
    "suffix": "string",
    "cosine": "vector",
    "geo": "pointset",
    "temporal": "temporal",
    "bbox-overlap": "topological",
}

COMPARATOR_NAMES = tuple(_FAMILY)


def comparator(name: str, **params) -> Comparator:
    """Build a comparator by registry name; unknown names fail immediately."""
    if name in _STRING_METRICS:
        if params:
            raise ConfigError(f"comparator {name!r} takes no parameters")
        return Comparator(name, _FAMILY[name], _on_raw(_STRING_METRICS[name]))
    if name == "qgram":
        q = int(params.pop("q", 2))
        if params or q < 1:
            raise ConfigError(f"bad qgram params: q={q}, extra={params}")
        return Comparator(name, "string", _on_raw(lambda a, b: qgram_sim(a, b, q)), (("q", q),))
    if name == "cosine":
        if params:
            raise ConfigError("cosine takes no parameters")
        return Comparator(name, "vector", _on_raw(cosine_sim))
    if name == "geo":
        scale = float(params.pop("scale_meters", 1000.0))
        if params:
            raise ConfigError(f"unknown geo params: {params}")
        return Comparator(name, "pointset", _geo_comparator(scale), (("scale_meters", scale),))
    if name == "temporal":
        scale = float(params.pop("scale_seconds", 86_400.0))
        if params:
            raise ConfigError(f"unknown temporal params: {params}")
        return Comparator(name, "temporal", _temporal_comparator(scale), (("scale_seconds", scale),))
    if name == "bbox-overlap":
        if params:
            raise ConfigError("bbox-overlap takes no parameters")
        return Comparator(name, "topological", _bbox_comparator())
    raise ConfigError(f"unknown comparator: {name!r}")


# ---------------------------------------------------------------------------
# Comparator trees

MISSING_POLICIES = ("ignore", "pessimistic")
COMBINATORS = ("and", "or", "min", "max", "wavg")


@dataclass(frozen=True)
class Leaf:
    prop: str
    comparator: Comparator
    chain: CleanerChain = EMPTY_CHAIN
    weight: float = 1.0
    threshold: float = 0.0
    missing: str = "ignore"

    def __post_init__(self):
        if self.weight <= 0:
            raise ConfigError(f"leaf weight must be > 0: {self.weight}")
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"leaf threshold out of [0,1]: {self.threshold}")
        if self.missing not in MISSING_POLICIES:
            raise ConfigError(f"unknown missing-value policy: {self.missing!r}")


@dataclass(frozen=True)
class Combinator:
    op: str
    children: tuple["Node", ...]
    weight: float = 1.0
    threshold: float = 0.0

    def __post_init__(self):
        if self.op not in COMBINATORS:
            raise ConfigError(f"unknown combinator: {self.op!r}")
        if not self.children:
            raise ConfigError(f"combinator {self.op!r} has no children")
        if self.weight <= 0:
            raise ConfigError(f"combinator weight must be > 0: {self.weight}")


Node = Leaf | Combinator


@dataclass(frozen=True)
class TreeScore:
    sim: float
    per_property: Mapping[str, float]
    comparable_leaves: int


def tree_properties(node: Node) -> set[str]:
    if isinstance(node, Leaf):
        return {node.prop}
    out: set[str] = set()
    for child in node.children:
        out |= tree_properties(child)
    return out


def _leaf_score(leaf: Leaf, ea: Entity, eb: Entity) -> tuple[Optional[float], bool]:
    """Best score over the cross product of cleaned multi-values. The flag
    reports whether both sides actually had a comparable value."""
    va = leaf.chain.apply(ea.values(leaf.prop))
    vb = leaf.chain.apply(eb.values(leaf.prop))
    if not va or not vb:
        return (None, False) if leaf.missing == "ignore" else (0.0, False)
    return max(leaf.comparator(x, y) for x in va for y in vb), True


def _evaluate(node: Node, ea: Entity, eb: Entity, per_prop: dict, count: list[int]) -> Optional[float]:
    if isinstance(node, Leaf):
        score, comparable = _leaf_score(node, ea, eb)
        if comparable:
            count[0] += 1
        if score is not None and comparable:
            prev = per_prop.get(node.prop)
            per_prop[node.prop] = score if prev is None else max(prev, score)
        return score

    scored: list[tuple[Node, float]] = []
    for child in node.children:
        s = _evaluate(child, ea, eb, per_prop, count)
        if s is not None:
            scored.append((child, s))
    if not scored:
        return None
    values = [s for _, s in scored]
    if node.op == "min":
        return min(values)
    if node.op in ("max", "or"):
        return max(values)
    # AND gates on every child's own threshold, then averages; WAVG averages.
    if node.op == "and":
        for child, s in scored:
            if s < child.threshold:
                return 0.0
    total_w = sum(child.weight for child, _ in scored)
    return sum(child.weight * s for child, s in scored) / total_w


def evaluate_tree(tree: Node, ea: Entity, eb: Entity) -> TreeScore:
    """Score an entity pair against a comparator tree.

    Leaves whose property is absent on either side are excluded (policy
    "ignore") or scored 0 (policy "pessimistic"); a fully-absent tree scores 0
    with zero comparable leaves.
    """
    per_prop: dict[str, float] = {}
    count = [0]
    sim = _evaluate(tree, ea, eb, per_prop, count)
    if sim is None:
        sim = 0.0
    sim = min(1.0, max(0.0, sim))
    return TreeScore(sim, per_prop, count[0])
