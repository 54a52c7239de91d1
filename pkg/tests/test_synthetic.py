import pytest

from kgdedup.evaluate import score
from kgdedup.ingest import write_csv
from kgdedup.model import Verdict
from kgdedup.pipeline import run_dedup
from kgdedup.synthetic import (
    DEFAULT_ERROR_MIX,
    SpecError,
    SyntheticSpec,
    benchmark_config,
    generate_synthetic,
    oracle_config,
)


class TestSpec:
    def test_rejects_zero_entities(self):
        with pytest.raises(SpecError):
            SyntheticSpec(0, 0)

    def test_rejects_more_duplicates_than_entities(self):
        with pytest.raises(SpecError):
            SyntheticSpec(5, 6)

    def test_rejects_unknown_error_kind(self):
        with pytest.raises(SpecError):
            SyntheticSpec(10, 2, error_mix={"alien": 1.0})

    def test_rejects_negative_weight(self):
        with pytest.raises(SpecError):
            SyntheticSpec(10, 2, error_mix={"typo": -1.0})


class TestGenerate:
    def test_counts(self):
        ds, gold = generate_synthetic(SyntheticSpec(50, 5, random_seed=1))
        assert len(ds.entities) == 55
        assert len(gold.pairs_with(Verdict.SAME)) == 5
        assert len(gold.pairs_with(Verdict.DIFFERENT)) == 15

    def test_duplicate_ids_marked(self):
        ds, gold = generate_synthetic(SyntheticSpec(40, 4, random_seed=2))
        for a, b in gold.pairs_with(Verdict.SAME):
            assert {a.endswith("-d"), b.endswith("-d")} == {True, False}

    def test_byte_identical_for_fixed_seed(self):
        spec = SyntheticSpec(60, 6, random_seed=9)
        ds1, _ = generate_synthetic(spec)
        ds2, _ = generate_synthetic(spec)
        cols = ["name", "url", "streetAddress", "latitude", "longitude"]
        assert write_csv(ds1, cols) == write_csv(ds2, cols)

    def test_different_seeds_differ(self):
        ds1, _ = generate_synthetic(SyntheticSpec(60, 6, random_seed=1))
        ds2, _ = generate_synthetic(SyntheticSpec(60, 6, random_seed=2))
        assert ds1.entities != ds2.entities

    def test_error_mix_all_typos(self):
        mix = {k: 0.0 for k in DEFAULT_ERROR_MIX} | {"typo": 1.0}
        ds, gold = generate_synthetic(SyntheticSpec(40, 8, error_mix=mix, random_seed=3))
        by_id = ds.by_id()
        for a, b in gold.pairs_with(Verdict.SAME):
            orig, dup = sorted((a, b), key=len)
            # a typo only touches the name; everything else stays equal
            assert by_id[orig].values("url") == by_id[dup].values("url")
            assert by_id[orig].values("name") != by_id[dup].values("name")

    def test_missing_geo_kind_drops_geo(self):
        mix = {k: 0.0 for k in DEFAULT_ERROR_MIX} | {"missing-geo": 1.0}
        ds, gold = generate_synthetic(SyntheticSpec(40, 5, error_mix=mix, random_seed=4))
        by_id = ds.by_id()
        for a, b in gold.pairs_with(Verdict.SAME):
            dup = a if a.endswith("-d") else b
            assert "geo" not in by_id[dup].properties

    def test_entities_sorted_by_id(self):
        ds, _ = generate_synthetic(SyntheticSpec(30, 6, random_seed=5))
        ids = [e.id for e in ds.entities]
        assert ids == sorted(ids)


class TestShippedConfigs:
    def test_oracle_config_full_recall(self):
        ds, gold = generate_synthetic(SyntheticSpec(120, 12, random_seed=7))
        accepted, _ = run_dedup(ds, oracle_config())
        report = score(accepted, gold)
        assert report.recall == 1.0

    def test_benchmark_config_beats_chance(self):
        ds, gold = generate_synthetic(SyntheticSpec(120, 12, random_seed=7))
        accepted, _ = run_dedup(ds, benchmark_config())
        report = score(accepted, gold, closed_world=True)
        assert report.f1 > 0.5
