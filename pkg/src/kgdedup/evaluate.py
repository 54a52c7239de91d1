"""Gold-standard lifecycle, precision/recall/F-measure scoring, threshold
sweeps, per-property feature reports, and genetic-algorithm configuration
learning."""

from __future__ import annotations

import csv
import io
import logging
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .blocking import BlockingSpec
from .cleaners import CleanerChain, ConfigError
from .ingest import Dataset
from .metrics import Combinator, Leaf, comparator, evaluate_tree
from .model import EntityId, SameAsAssertion, Verdict, canonical_pair
from .pipeline import MatchConfig, run_dedup

log = logging.getLogger(__name__)

Pair = tuple[EntityId, EntityId]

LABEL_VERDICTS = (Verdict.SAME, Verdict.DIFFERENT, Verdict.RELATED)


@dataclass(frozen=True)
class LabelEntry:
    pair: Pair
    verdict: Verdict
    labeler: str = "anonymous"
    timestamp: float = 0.0


@dataclass(frozen=True)
class GoldStandard:
    """Labeled pair set. Appending yields a new version; the full label
    history is retained and the latest entry per pair wins."""

    history: tuple[LabelEntry, ...] = ()

    def current(self) -> dict[Pair, Verdict]:
        out: dict[Pair, Verdict] = {}
        for entry in self.history:
            out[entry.pair] = entry.verdict
        return out

    def pairs_with(self, verdict: Verdict) -> set[Pair]:
        return {p for p, v in self.current().items() if v == verdict}

    def __len__(self) -> int:
        return len(self.current())


def submit_label(
    gold: GoldStandard,
    a: EntityId,
    b: EntityId,
    verdict: Verdict | str,
    labeler: str = "anonymous",
    timestamp: float = 0.0,
) -> GoldStandard:
    verdict = Verdict(verdict)
    if verdict not in LABEL_VERDICTS:
        raise ValueError(f"cannot label a pair as {verdict.value!r}")
    pair = canonical_pair(a, b)
    return GoldStandard(gold.history + (LabelEntry(pair, verdict, labeler, timestamp),))


def gold_to_csv(gold: GoldStandard) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["idA", "idB", "verdict", "labeler", "timestamp"])
    for e in gold.history:
        writer.writerow([e.pair[0], e.pair[1], e.verdict.value, e.labeler, e.timestamp])
    return out.getvalue()


def gold_from_csv(text: str) -> GoldStandard:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != ["idA", "idB", "verdict", "labeler", "timestamp"]:
        raise ValueError(f"unexpected gold-standard header: {header}")
    entries = []
    for row in reader:
        if not row:
            continue
        a, b, verdict, labeler, ts = row
        entries.append(LabelEntry(canonical_pair(a, b), Verdict(verdict), labeler, float(ts)))
    return GoldStandard(tuple(entries))


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: Optional[int] = None
    unjudged: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn,
            "unjudged": self.unjudged,
            "precision": self.precision, "recall": self.recall, "f1": self.f1,
        }


class EmptyGoldError(ValueError):
    pass


def score(
    accepted: Iterable[Pair | SameAsAssertion],
    gold: GoldStandard,
    closed_world: bool = False,
) -> EvalReport:
    """Score accepted pairs against the gold standard.

    Open world (default): pairs absent from the gold standard are counted as
    unjudged, not false positives. Closed world treats them as false
    positives, which is only meaningful for fully-labeled synthetic data.
    "related" pairs never enter tp/fp/fn.
    """
    if not len(gold):
        raise EmptyGoldError("gold standard is empty; scoring is meaningless")
    accepted_pairs = {
        a.pair if isinstance(a, SameAsAssertion) else canonical_pair(*a)
        for a in accepted
    }
    same = gold.pairs_with(Verdict.SAME)
    different = gold.pairs_with(Verdict.DIFFERENT)
    related = gold.pairs_with(Verdict.RELATED)
    judged = same | different
    tp = len(accepted_pairs & same)
    fp = len(accepted_pairs & different)
    unjudged = len(accepted_pairs - judged - related)
    if closed_world:
        fp += unjudged
        unjudged = 0
    fn = len(same - accepted_pairs)
    return EvalReport(tp=tp, fp=fp, fn=fn, unjudged=unjudged)


def threshold_sweep(
    scored: Sequence[SameAsAssertion],
    gold: GoldStandard,
    thresholds: Sequence[float],
    closed_world: bool = False,
) -> list[tuple[float, EvalReport]]:
    """One report per threshold, from a single scored set (no re-run)."""
    for t in thresholds:
        if not 0.0 <= t <= 1.0:
            raise ValueError(f"threshold out of [0,1]: {t}")
    out = []
    for t in thresholds:
        accepted = [a for a in scored if a.sim >= t]
        out.append((t, score(accepted, gold, closed_world)))
    return out


def next_candidates_for_labeling(
    assertions: Sequence[SameAsAssertion],
    gold: GoldStandard,
    limit: int = 20,
) -> list[SameAsAssertion]:
    """Unlabeled pairs, descending similarity, pair-id tiebreak."""
    labeled = set(gold.current())
    unlabeled = [a for a in assertions if a.pair not in labeled]
    unlabeled.sort(key=lambda a: (-a.sim, a.a, a.b))
    return unlabeled[:limit]


# ---------------------------------------------------------------------------
# Feature report


@dataclass(frozen=True)
class FeatureRow:
    prop: str
    fill_rate: float
    distinctness: float
    best_threshold: float
    standalone_f1: float
    discriminative: bool

    def as_dict(self) -> dict:
        return {
            "property": self.prop, "fillRate": self.fill_rate,
            "distinctness": self.distinctness, "bestThreshold": self.best_threshold,
            "standaloneF1": self.standalone_f1, "discriminative": self.discriminative,
        }


def default_comparator_for(dataset: Dataset, prop: str):
    for e in dataset.entities:
        for v in e.values(prop):
            if v.kind == "geopoint":
                return comparator("geo", scale_meters=1000.0)
            if v.kind == "number":
                return comparator("numeric")
            if v.kind == "timestamp":
                return comparator("temporal")
            return comparator("levenshtein")
    return comparator("exact")


def feature_report(
    dataset: Dataset,
    gold: GoldStandard,
    thresholds: Sequence[float] = tuple(i / 20 for i in range(21)),
    closed_world: bool = True,
) -> list[FeatureRow]:
    """Per-property fill rate, distinctness and standalone f1 obtained by
    sweeping a single-leaf tree over the gold pairs."""
    if not len(gold):
        raise EmptyGoldError("gold standard is empty")
    n = len(dataset.entities)
    entities = dataset.by_id()
    judged = [
        p for p, v in gold.current().items()
        if v in (Verdict.SAME, Verdict.DIFFERENT) and p[0] in entities and p[1] in entities
    ]
    rows = []
    for prop in sorted(dataset.schema()):
        present = [e for e in dataset.entities if prop in e.properties]
        fill = len(present) / n if n else 0.0
        distinct = {v.raw for e in present for v in e.values(prop)}
        distinctness = len(distinct) / n if n else 0.0
        leaf = Leaf(prop, default_comparator_for(dataset, prop), missing="ignore")
        scored = []
        for a, b in judged:
            result = evaluate_tree(leaf, entities[a], entities[b])
            if result.comparable_leaves:
                scored.append(SameAsAssertion(a, b, result.sim))
        best_t, best_f1 = 0.0, 0.0
        if scored:
            for t, report in threshold_sweep(scored, gold, thresholds, closed_world):
                if report.f1 > best_f1:
                    best_t, best_f1 = t, report.f1
        rows.append(
            FeatureRow(prop, fill, distinctness, best_t, best_f1,
                       discriminative=len(distinct) > 1)
        )
    rows.sort(key=lambda r: (-r.standalone_f1, r.prop))
    return rows


# ---------------------------------------------------------------------------
# Genetic-algorithm configuration learning


@dataclass(frozen=True)
class SearchSpace:
    """Allowed choices per property plus global ranges the GA explores."""

    comparators: Mapping[str, tuple[str, ...]]  # property -> comparator names
    chains: tuple[tuple[str, ...], ...] = ((), ("lowercase", "trim"))
    threshold_range: tuple[float, float] = (0.5, 1.0)
    weight_range: tuple[float, float] = (0.5, 3.0)
    leaf_threshold_range: tuple[float, float] = (0.0, 0.8)


@dataclass(frozen=True)
class GAParams:
    population_size: int = 30
    generations: int = 20
    mutation_rate: float = 0.2
    crossover_rate: float = 0.7
    random_seed: int = 0
    search_space: Optional[SearchSpace] = None
    closed_world: bool = True

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError("populationSize must be >= 2")
        if self.generations < 1:
            raise ConfigError("generations must be >= 1")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutationRate out of [0,1]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError("crossoverRate out of [0,1]")


@dataclass(frozen=True)
class Gene:
    prop: str
    comparator_name: str
    chain_idx: int
    weight: float
    leaf_threshold: float


@dataclass(frozen=True)
class Genome:
    genes: tuple[Gene, ...]
    global_threshold: float

    def key(self) -> tuple:
        return (self.genes, round(self.global_threshold, 6))


def default_search_space(dataset: Dataset) -> SearchSpace:
    comps: dict[str, tuple[str, ...]] = {}
    for prop in sorted(dataset.schema()):
        kinds = {v.kind for e in dataset.entities for v in e.values(prop)}
        if "geopoint" in kinds:
            comps[prop] = ("geo",)
        elif kinds <= {"number"}:
            comps[prop] = ("numeric", "exact")
        else:
            comps[prop] = ("levenshtein", "jaro-winkler", "jaccard", "dice",
                           "qgram", "cosine", "exact")
    return SearchSpace(comparators=comps)


def genome_to_config(
    genome: Genome, space: SearchSpace, blocking: BlockingSpec,
    min_comparable: int = 2,
) -> MatchConfig:
    leaves = []
    for g in genome.genes:
        comp = comparator(g.comparator_name) if g.comparator_name != "geo" else comparator("geo", scale_meters=1000.0)
        leaves.append(
            Leaf(g.prop, comp, CleanerChain.of(*space.chains[g.chain_idx]),
                 weight=g.weight, threshold=g.leaf_threshold)
        )
    tree = leaves[0] if len(leaves) == 1 else Combinator("wavg", tuple(leaves))
    return MatchConfig(tree, blocking, genome.global_threshold, min_comparable)


def _random_genome(rng: random.Random, space: SearchSpace) -> Genome:
    genes = []
    for prop in sorted(space.comparators):
        genes.append(Gene(
            prop,
            rng.choice(space.comparators[prop]),
            rng.randrange(len(space.chains)),
            round(rng.uniform(*space.weight_range), 3),
            round(rng.uniform(*space.leaf_threshold_range), 3),
        ))
    return Genome(tuple(genes), round(rng.uniform(*space.threshold_range), 3))


def _mutate(rng: random.Random, genome: Genome, space: SearchSpace, rate: float) -> Genome:
    genes = []
    for g in genome.genes:
        if rng.random() < rate:
            field_choice = rng.randrange(4)
            if field_choice == 0:
                g = replace(g, comparator_name=rng.choice(space.comparators[g.prop]))
            elif field_choice == 1:
                g = replace(g, chain_idx=rng.randrange(len(space.chains)))
            elif field_choice == 2:
                g = replace(g, weight=round(rng.uniform(*space.weight_range), 3))
            else:
                g = replace(g, leaf_threshold=round(rng.uniform(*space.leaf_threshold_range), 3))
        genes.append(g)
    threshold = genome.global_threshold
    if rng.random() < rate:
        threshold = round(rng.uniform(*space.threshold_range), 3)
    return Genome(tuple(genes), threshold)


def _crossover(rng: random.Random, a: Genome, b: Genome) -> Genome:
    point = rng.randrange(len(a.genes) + 1)
    genes = a.genes[:point] + b.genes[point:]
    threshold = a.global_threshold if rng.random() < 0.5 else b.global_threshold
    return Genome(genes, threshold)


def learn_config(
    dataset: Dataset,
    gold: GoldStandard,
    params: GAParams,
    blocking: Optional[BlockingSpec] = None,
    seed_configs: Sequence[Genome] = (),
) -> tuple[MatchConfig, list[float]]:
    """Evolve a matching configuration against the gold standard.

    Fitness is f1; elitism keeps the best individual, so the best-so-far
    trace is non-decreasing; fully reproducible from the random seed.
    """
    same = gold.pairs_with(Verdict.SAME)
    different = gold.pairs_with(Verdict.DIFFERENT)
    if not same or not different:
        raise EmptyGoldError("gold standard needs at least one same and one different pair")
    space = params.search_space or default_search_space(dataset)
    if blocking is None:
        # naive pairing makes each fitness evaluation O(n^2); use multi-pass
        # blocking over name, position and url so no single corrupted
        # property caps the reachable recall
        blocking = BlockingSpec(
            "standard-blocking", "name-prefix", (("prop", "name"), ("k", 4)),
            also=(
                BlockingSpec("standard-blocking", "geohash",
                             (("precision", 5), ("prop", "geo"))),
                BlockingSpec("standard-blocking", "url-host"),
            ),
        )
    rng = random.Random(params.random_seed)

    # The candidate set is fixed by the blocking spec, and a leaf's score for
    # a pair depends only on (property, comparator, chain). Precomputing one
    # score vector per such combination makes a genome evaluation a weighted
    # combination of lookups instead of a full pipeline run. The semantics
    # are those of the wavg tree genome_to_config builds.
    from .blocking import candidate_pairs
    from .metrics import _leaf_score

    entities = dataset.by_id()
    pairs = list(candidate_pairs(dataset.entities, blocking))
    vec_cache: dict[tuple, list] = {}

    def leaf_vector(prop: str, comp_name: str, chain_idx: int) -> list:
        key = (prop, comp_name, chain_idx)
        if key not in vec_cache:
            comp = (comparator("geo", scale_meters=1000.0) if comp_name == "geo"
                    else comparator(comp_name))
            leaf = Leaf(prop, comp, CleanerChain.of(*space.chains[chain_idx]))
            vec_cache[key] = [
                _leaf_score(leaf, entities[a], entities[b]) for a, b in pairs
            ]
        return vec_cache[key]

    min_comparable = 2
    cache: dict[tuple, float] = {}

    def fitness(genome: Genome) -> float:
        key = genome.key()
        if key not in cache:
            vecs = [leaf_vector(g.prop, g.comparator_name, g.chain_idx)
                    for g in genome.genes]
            weights = [g.weight for g in genome.genes]
            accepted = []
            for i, pair in enumerate(pairs):
                weighted = 0.0
                total_w = 0.0
                comparable = 0
                for vec, w in zip(vecs, weights):
                    s, is_comparable = vec[i]
                    if is_comparable:
                        comparable += 1
                    if s is not None:
                        weighted += w * s
                        total_w += w
                if comparable < min_comparable or total_w == 0.0:
                    continue
                if weighted / total_w >= genome.global_threshold:
                    accepted.append(pair)
            cache[key] = score(accepted, gold, params.closed_world).f1
        return cache[key]

    population = list(seed_configs)[: params.population_size]
    while len(population) < params.population_size:
        population.append(_random_genome(rng, space))

    trace: list[float] = []
    best: tuple[float, Genome] | None = None
    for gen in range(params.generations):
        ranked = sorted(population, key=lambda g: -fitness(g))
        gen_best = ranked[0]
        if best is None or fitness(gen_best) > best[0]:
            best = (fitness(gen_best), gen_best)
        trace.append(best[0])
        log.info("GA generation %d: best f1 so far %.4f", gen, best[0])

        def tournament() -> Genome:
            contenders = [rng.choice(ranked) for _ in range(3)]
            return max(contenders, key=fitness)

        next_pop = [best[1]]  # elitism
        while len(next_pop) < params.population_size:
            parent_a, parent_b = tournament(), tournament()
            child = (_crossover(rng, parent_a, parent_b)
                     if rng.random() < params.crossover_rate else parent_a)
            child = _mutate(rng, child, space, params.mutation_rate)
            next_pop.append(child)
        population = next_pop

    assert best is not None
    return genome_to_config(best[1], space, blocking), trace
