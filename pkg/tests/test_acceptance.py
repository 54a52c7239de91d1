"""Acceptance gate: one test per release criterion, each printing a single
pass/fail line. Oracles are independent reimplementations, not calls back
into the library code under test."""

import dataclasses
import random
import resource
import string
import time

import pytest

from kgdedup.blocking import BlockingSpec
from kgdedup.config import write_results
from kgdedup.evaluate import EvalReport, GAParams, learn_config, score, threshold_sweep
from kgdedup.fusion import FusionRule, apply_function
from kgdedup.metrics import Combinator, Leaf, comparator, levenshtein_sim
from kgdedup.model import Entity, Provenance, PropertyValue, equivalence_classes
from kgdedup.pipeline import MatchConfig, run_dedup
from kgdedup.synthetic import (
    SyntheticSpec,
    benchmark_config,
    generate_synthetic,
    name_only_config,
)

SEED = 42


@pytest.fixture(scope="module")
def benchmark495():
    return generate_synthetic(SyntheticSpec(495, 23, random_seed=SEED))


def announce(n, label):
    print(f"[acceptance] criterion {n} ({label}): PASS")


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


# -- criterion 1: metric arithmetic reproduction ----------------------------


def test_criterion_1_metric_arithmetic():
    recall = EvalReport(tp=7, fp=0, fn=16).recall
    assert abs(recall - 0.3043) <= 0.0001
    precision = EvalReport(tp=2, fp=1, fn=0).precision
    assert abs(precision - 0.6667) <= 0.0001
    announce(1, "metric arithmetic")


# -- criterion 2: oracle equivalence ----------------------------------------


def oracle_levenshtein(a, b):
    """Full-matrix dynamic program, kept deliberately naive."""
    m, n = len(a), len(b)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
    for j in range(n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            d[i][j] = min(
                d[i - 1][j] + 1,
                d[i][j - 1] + 1,
                d[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    dist = d[m][n]
    longest = max(m, n)
    return 1.0 if longest == 0 else 1.0 - dist / longest


def quality_of(v):
    return 1.0 if v.quality is None else v.quality


def oracle_fusion(name, values, threshold):
    """Enumerate the value multiset explicitly per function."""
    if name == "union":
        return sorted({v.raw for v in values})
    if name == "filter":
        return sorted(v.raw for v in values if quality_of(v) >= threshold)
    if name == "voting":
        counts = {}
        for v in values:
            counts[v.raw] = counts.get(v.raw, 0) + 1
        tied = [v for v in values if counts[v.raw] == max(counts.values())]
        best_q = max(quality_of(v) for v in tied)
        tied = [v for v in tied if quality_of(v) == best_q]
        newest = max(v.provenance.ingested_at for v in tied)
        return [min(v.raw for v in tied if v.provenance.ingested_at == newest)]
    if name == "latest":
        newest = max(v.provenance.ingested_at for v in values)
        return [min(v.raw for v in values if v.provenance.ingested_at == newest)]
    if name == "longest":
        top = max(len(v.raw) for v in values)
        return [min(v.raw for v in values if len(v.raw) == top)]
    raise AssertionError(name)


def random_values(rng, n):
    alphabet = "abcx 019"
    out = []
    for _ in range(n):
        raw = "".join(rng.choice(alphabet) for _ in range(rng.randrange(1, 8)))
        out.append(PropertyValue(
            "text", raw,
            Provenance(rng.choice(["s1", "s2"]), rng.randrange(100)),
            rng.choice([None, round(rng.random(), 2)]),
        ))
    return out


def test_criterion_2_oracle_equivalence(benchmark495):
    with Stopwatch() as sw:
        # (a) normalized Levenshtein vs full-matrix DP, 10^4 random pairs
        rng = random.Random(0)
        alphabet = string.ascii_lowercase[:6] + " '"
        for _ in range(10_000):
            a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 12)))
            b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 12)))
            assert levenshtein_sim(a, b) == oracle_levenshtein(a, b)

        # (b) each fusion function vs multiset enumeration, 10^3 random inputs
        for i in range(1_000):
            values = random_values(rng, rng.randrange(1, 7))
            threshold = round(rng.random(), 2)
            for name in ("union", "filter", "voting", "latest", "longest"):
                out, _ = apply_function(FusionRule(name), values, threshold)
                got = sorted(v.raw for v in out)
                assert got == oracle_fusion(name, values, threshold), (i, name)

        # (c) blocked accepted sets vs the naive accepted set
        ds, _ = benchmark495
        base = benchmark_config()
        naive_accepted = {a.pair for a in run_dedup(ds, base)[0]}

        standard = dataclasses.replace(base, blocking=BlockingSpec(
            "standard-blocking", "name-prefix", (("prop", "name"), ("k", 4))))
        assert {a.pair for a in run_dedup(ds, standard)[0]} <= naive_accepted

        neighborhood = dataclasses.replace(base, blocking=BlockingSpec(
            "sorted-neighborhood", "name-prefix", (("prop", "name"), ("k", 4)),
            window=10))
        assert {a.pair for a in run_dedup(ds, neighborhood)[0]} <= naive_accepted

        full_window = dataclasses.replace(base, blocking=BlockingSpec(
            "sorted-neighborhood", "name-prefix", (("prop", "name"), ("k", 4)),
            window=len(ds.entities)))
        assert {a.pair for a in run_dedup(ds, full_window)[0]} == naive_accepted
    assert sw.elapsed < 60.0, f"criterion 2 took {sw.elapsed:.1f}s"
    announce(2, "oracle equivalence")


# -- criterion 3: benchmark end-to-end --------------------------------------


def test_criterion_3_combined_beats_name_only(benchmark495):
    ds, gold = benchmark495
    with Stopwatch() as sw:
        accepted, _ = run_dedup(ds, benchmark_config())
        combined_f1 = score(accepted, gold, closed_world=True).f1

        scored, _ = run_dedup(ds, name_only_config(0.9), min_sim=0.0)
        thresholds = [i / 40 for i in range(41)]
        name_best = max(
            r.f1 for _, r in threshold_sweep(scored, gold, thresholds, closed_world=True)
        )
    assert combined_f1 > name_best, (combined_f1, name_best)
    assert sw.elapsed < 30.0, f"criterion 3 took {sw.elapsed:.1f}s"
    announce(3, "combined config beats name-only")


# -- criterion 4: determinism -----------------------------------------------


def test_criterion_4_determinism(tmp_path):
    with Stopwatch() as sw:
        files = []
        for tag in ("first", "second"):
            ds, _ = generate_synthetic(SyntheticSpec(495, 23, random_seed=SEED))
            accepted, _ = run_dedup(ds, benchmark_config())
            path = tmp_path / f"{tag}.jsonl"
            write_results(accepted, path)
            files.append(path)
    assert files[0].read_bytes() == files[1].read_bytes()
    assert sw.elapsed < 60.0, f"criterion 4 took {sw.elapsed:.1f}s"
    announce(4, "byte-identical reruns")


# -- criterion 5: threshold monotonicity ------------------------------------


def test_criterion_5_threshold_monotonicity(benchmark495):
    ds, _ = benchmark495
    base = dataclasses.replace(benchmark_config(), blocking=BlockingSpec(
        "standard-blocking", "name-prefix", (("prop", "name"), ("k", 4))))
    accepted = {}
    for t in (0.5, 0.8, 0.9, 1.0):
        cfg = dataclasses.replace(base, accept_threshold=t)
        accepted[t] = {a.pair for a in run_dedup(ds, cfg)[0]}
    assert len(accepted[1.0]) <= len(accepted[0.9]) <= len(accepted[0.8]) <= len(accepted[0.5])
    assert accepted[1.0] <= accepted[0.9] <= accepted[0.8] <= accepted[0.5]
    announce(5, "threshold monotonicity")


# -- criterion 6: GA learning -----------------------------------------------


def test_criterion_6_ga_learning(benchmark495):
    ds, gold = benchmark495
    with Stopwatch() as sw:
        baseline_accepted, _ = run_dedup(ds, benchmark_config())
        baseline_f1 = score(baseline_accepted, gold, closed_world=True).f1

        best, trace = learn_config(ds, gold, GAParams(30, 20, random_seed=0))
        assert all(b >= a for a, b in zip(trace, trace[1:]))
        assert trace[-1] >= baseline_f1, (trace[-1], baseline_f1)

        # the reported fitness must be reproducible by actually running the
        # learned config through the pipeline
        relearned, _ = run_dedup(ds, best)
        assert score(relearned, gold, closed_world=True).f1 == trace[-1]
    assert sw.elapsed < 300.0, f"criterion 6 took {sw.elapsed:.1f}s"
    announce(6, "GA learning")


# -- criterion 7: scalability guard -----------------------------------------


def test_criterion_7_scalability_guard():
    with Stopwatch() as sw:
        ds, _ = generate_synthetic(SyntheticSpec(100_000, 1_000, random_seed=0))
        tree = Combinator("wavg", (
            Leaf("name", comparator("exact")),
            Leaf("url", comparator("exact")),
        ))
        cfg = MatchConfig(tree, BlockingSpec(
            "standard-blocking", "name-prefix", (("prop", "name"), ("k", 10))))
        _, report = run_dedup(ds, cfg)
    n = len(ds.entities)
    all_pairs = n * (n - 1) // 2
    assert report.candidate_count < 0.01 * all_pairs, report.candidate_count
    assert sw.elapsed < 600.0, f"criterion 7 took {sw.elapsed:.1f}s"
    peak_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    assert peak_kb < 4 * 1024 * 1024, f"peak rss {peak_kb} kB"
    announce(7, "scalability guard")


# -- criterion 8: equivalence-closure property suite ------------------------


def oracle_closure(ids, pairs):
    """Repeated set merging, no union-find."""
    classes = [{i} for i in ids]
    for a, b in pairs:
        ca = next(c for c in classes if a in c)
        cb = next(c for c in classes if b in c)
        if ca is not cb:
            classes.remove(ca)
            classes.remove(cb)
            classes.append(ca | cb)
    return {frozenset(c) for c in classes}


def test_criterion_8_closure_properties():
    rng = random.Random(7)
    for _ in range(1_000):
        ids = [f"e{i}" for i in range(rng.randrange(2, 16))]
        pair_pool = [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:]]
        pairs = rng.sample(pair_pool, min(rng.randrange(0, 12), len(pair_pool)))

        got = {frozenset(c.members) for c in equivalence_classes(ids, pairs)}
        assert got == oracle_closure(ids, pairs)

        # partition: disjoint cover of the id universe
        flat = [i for c in got for i in c]
        assert sorted(flat) == sorted(ids)

        # permutation invariance
        shuffled = list(pairs)
        rng.shuffle(shuffled)
        shuffled = [(b, a) if rng.random() < 0.5 else (a, b) for a, b in shuffled]
        assert {frozenset(c.members)
                for c in equivalence_classes(ids, shuffled)} == got

        # monotonicity: adding an assertion only ever merges classes
        if pair_pool:
            extra = pairs + [rng.choice(pair_pool)]
            coarser = {frozenset(c.members)
                       for c in equivalence_classes(ids, extra)}
            for cls in got:
                assert any(cls <= big for big in coarser)
    announce(8, "equivalence-closure properties")
