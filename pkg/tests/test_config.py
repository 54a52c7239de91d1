import pytest

from kgdedup.cleaners import ConfigError
from kgdedup.config import (
    assertion_to_record,
    blocking_from_dict,
    config_from_dict,
    fusion_from_dict,
    load_config,
    node_from_dict,
    node_to_dict,
    read_results,
    write_results,
)
from kgdedup.metrics import Combinator, Leaf
from kgdedup.model import SameAsAssertion, Verdict

TREE_DOC = {
    "op": "and",
    "children": [
        {"property": "name", "metric": "jaro-winkler",
         "cleaners": ["lowercase", "collapse-whitespace"],
         "weight": 2.0, "threshold": 0.6},
        {"property": "geo", "metric": "geo", "params": {"scale_meters": 500.0},
         "threshold": 0.5},
    ],
}


class TestTreeSerialization:
    def test_leaf_fields(self):
        node = node_from_dict(TREE_DOC)
        assert isinstance(node, Combinator)
        name_leaf = node.children[0]
        assert isinstance(name_leaf, Leaf)
        assert name_leaf.weight == 2.0
        assert name_leaf.threshold == 0.6
        assert name_leaf.chain.steps[0][0] == "lowercase"

    def test_round_trip(self):
        node = node_from_dict(TREE_DOC)
        assert node_from_dict(node_to_dict(node)) == node

    def test_unknown_metric(self):
        with pytest.raises(ConfigError):
            node_from_dict({"property": "name", "metric": "sorcery"})

    def test_unknown_op(self):
        with pytest.raises(Exception):
            node_from_dict({"op": "xor", "children": [
                {"property": "name", "metric": "exact"}]})

    def test_node_needs_property_or_op(self):
        with pytest.raises(ConfigError):
            node_from_dict({"metric": "exact"})

    def test_parameterised_cleaner_step(self):
        node = node_from_dict({
            "property": "name", "metric": "exact",
            "cleaners": [{"name": "alias-split", "sep": "|"}],
        })
        assert node_from_dict(node_to_dict(node)) == node


class TestBlockingAndFusionDicts:
    def test_blocking_defaults(self):
        spec = blocking_from_dict({})
        assert spec.strategy == "naive"

    def test_blocking_params_sorted_stable(self):
        spec = blocking_from_dict({"strategy": "standard-blocking",
                                   "key": "name-prefix",
                                   "params": {"k": 4, "prop": "name"}})
        assert spec.key_params == (("k", 4), ("prop", "name"))

    def test_fusion_string_shorthand(self):
        policy = fusion_from_dict({"properties": {"name": "voting"},
                                   "unique": ["name"]})
        assert policy.rule_for("name").function == "voting"
        assert "name" in policy.unique_props

    def test_fusion_rule_with_params(self):
        policy = fusion_from_dict({"properties": {
            "name": {"function": "prefer-source", "source": "osm"}}})
        assert policy.rule_for("name").params["source"] == "osm"


class TestRunConfig:
    def test_requires_compare(self):
        with pytest.raises(ConfigError):
            config_from_dict({"threshold": 0.9})

    def test_full_document(self):
        cfg = config_from_dict({
            "compare": TREE_DOC,
            "threshold": 0.85,
            "min_comparable_leaves": 2,
            "blocking": {"strategy": "standard-blocking", "key": "name-prefix",
                         "params": {"prop": "name", "k": 4}},
            "schema": {"aliases": {"title": "name"}, "types": {"url": "url"}},
            "fusion": {"unique": ["name"]},
            "dataset": {"path": "data.csv", "format": "csv"},
        })
        assert cfg.match.accept_threshold == 0.85
        assert cfg.schema.aliases["title"] == "name"
        assert cfg.dataset_path == "data.csv"

    def test_load_yaml_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text(
            "compare:\n"
            "  property: name\n"
            "  metric: levenshtein\n"
            "threshold: 0.8\n"
        )
        cfg = load_config(path)
        assert cfg.match.accept_threshold == 0.8

    def test_malformed_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("compare: [unclosed\n")
        with pytest.raises(ConfigError):
            load_config(path)

    def test_non_mapping_document(self, tmp_path):
        path = tmp_path / "list.yaml"
        path.write_text("- a\n- b\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestResultsFile:
    def test_round_trip(self, tmp_path):
        assertions = [
            SameAsAssertion("a", "b", 0.93, {"name": 0.9}, verdict=Verdict.SAME),
            SameAsAssertion("c", "d", 0.91),
        ]
        path = tmp_path / "results.jsonl"
        write_results(assertions, path)
        again = read_results(path)
        assert again == assertions

    def test_record_shape(self):
        rec = assertion_to_record(SameAsAssertion("a", "b", 0.5))
        assert set(rec) == {"idA", "idB", "sim", "perProperty", "verdict"}

    def test_deterministic_bytes(self, tmp_path):
        assertions = [SameAsAssertion("a", "b", 0.93, {"x": 0.1, "y": 0.2})]
        p1, p2 = tmp_path / "r1.jsonl", tmp_path / "r2.jsonl"
        write_results(assertions, p1)
        write_results(assertions, p2)
        assert p1.read_bytes() == p2.read_bytes()
