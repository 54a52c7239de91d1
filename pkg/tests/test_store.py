import pytest

from kgdedup.model import Entity, Provenance, PropertyValue, Verdict
from kgdedup.ingest import Dataset
from kgdedup.store import (
    LabelConflict,
    RunRecord,
    Store,
    entity_from_record,
    entity_to_record,
)


def make_entity(eid="a"):
    prov = Provenance("test", 100.0)
    return Entity(eid, "Restaurant", {
        "name": (PropertyValue("text", "Hugo's Bar", prov, 0.9),),
        "geo": (PropertyValue("geopoint", "47.04,10.6", prov),),
    })


class TestEntityRecords:
    def test_round_trip(self):
        e = make_entity()
        assert entity_from_record(entity_to_record(e)) == e

    def test_quality_omitted_when_absent(self):
        e = make_entity()
        rec = entity_to_record(e)
        assert "quality" not in rec["properties"]["geo"][0]
        assert rec["properties"]["name"][0]["quality"] == 0.9


class TestDatasets:
    def test_put_and_reload(self, tmp_path):
        store = Store(tmp_path)
        ds = Dataset("d1", (make_entity("a"), make_entity("b")), "src")
        store.put_dataset(ds)
        again = Store(tmp_path)
        assert again.datasets["d1"] == ds

    def test_duplicate_dataset_rejected(self, tmp_path):
        store = Store(tmp_path)
        store.put_dataset(Dataset("d1", (make_entity(),)))
        with pytest.raises(KeyError):
            store.put_dataset(Dataset("d1", (make_entity(),)))


class TestGold:
    def test_label_survives_restart(self, tmp_path):
        Store(tmp_path).add_label("a", "b", "same", labeler="alice")
        again = Store(tmp_path)
        assert again.gold.current()[("a", "b")] == Verdict.SAME

    def test_relabel_requires_supersede(self, tmp_path):
        store = Store(tmp_path)
        store.add_label("a", "b", "same")
        with pytest.raises(LabelConflict):
            store.add_label("a", "b", "different")
        store.add_label("a", "b", "different", supersede=True)
        assert store.gold.current()[("a", "b")] == Verdict.DIFFERENT
        assert len(store.gold.history) == 2

    def test_pair_canonicalized(self, tmp_path):
        store = Store(tmp_path)
        store.add_label("z", "a", "same")
        assert ("a", "z") in store.gold.current()


class TestRuns:
    def test_lifecycle_and_replay_keeps_latest_state(self, tmp_path):
        store = Store(tmp_path)
        run = RunRecord("r1", ["d1"], {"threshold": 0.9}, created_at=5.0)
        store.put_run(run)
        store.update_run(run, "running")
        store.update_run(run, "done", report={"acceptedCount": 3})
        again = Store(tmp_path)
        loaded = again.runs["r1"]
        assert loaded.state == "done"
        assert loaded.report == {"acceptedCount": 3}
        assert loaded.created_at == 5.0

    def test_state_cannot_regress(self, tmp_path):
        store = Store(tmp_path)
        run = RunRecord("r1", ["d1"], {})
        store.put_run(run)
        store.update_run(run, "done")
        with pytest.raises(ValueError):
            store.update_run(run, "running")

    def test_failed_run_keeps_error(self, tmp_path):
        store = Store(tmp_path)
        run = RunRecord("r1", ["d1"], {})
        store.put_run(run)
        store.update_run(run, "failed", error="boom")
        assert Store(tmp_path).runs["r1"].error == "boom"

    def test_results_round_trip(self, tmp_path):
        from kgdedup.config import write_results
        from kgdedup.model import SameAsAssertion

        store = Store(tmp_path)
        assertions = [SameAsAssertion("a", "b", 0.92)]
        write_results(assertions, store.results_path("r1"))
        assert store.run_results("r1") == assertions
        assert store.run_results("missing") == []


class TestFusion:
    def test_fusion_and_override_survive_restart(self, tmp_path):
        store = Store(tmp_path)
        store.put_fusion({"fusionId": "f1", "runId": "r1", "config": {},
                          "classes": [], "createdAt": 1.0})
        store.add_override({"fusionId": "f1", "fusedId": "fused:a+b",
                            "property": "name", "value": "X",
                            "operator": "alice", "timestamp": 2.0})
        again = Store(tmp_path)
        assert "f1" in again.fusions
        assert again.fusions["f1"]["overrides"][0]["value"] == "X"
