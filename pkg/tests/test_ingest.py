import pytest

from kgdedup.ingest import (
    Dataset,
    ParseError,
    SchemaError,
    SchemaMapping,
    apply_mapping,
    parse_csv,
    parse_rdf,
    write_csv,
    write_ntriples,
)
from kgdedup.model import Entity, text_value

MAPPING = SchemaMapping(
    aliases={"rdfs:label": "name", "title": "name",
             "http://schema.org/name": "name",
             "http://schema.org/url": "url",
             "http://schema.org/streetAddress": "streetAddress",
             "http://schema.org/latitude": "latitude",
             "http://schema.org/longitude": "longitude",
             "http://schema.org/address": "address",
             "http://schema.org/geo": "geo"},
    type_hints={"url": "url"},
)

CSV_FIVE_PROPS = (
    "id,name,url,streetAddress,latitude,longitude\n"
    "r1,Hugo's Bar,http://hugos.at,Str. Herrenanger 11,47.040537,10.609275\n"
)


class TestParseCsv:
    def test_five_property_row_merges_geo(self):
        ds = parse_csv(CSV_FIVE_PROPS, MAPPING)
        assert len(ds.entities) == 1
        e = ds.entities[0]
        assert set(e.properties) == {"name", "url", "streetAddress", "geo"}
        assert e.values("geo")[0].geopoint == (47.040537, 10.609275)

    def test_zero_zero_geo_treated_as_missing(self):
        csv_text = ("id,name,latitude,longitude\n"
                    "r1,X,0,0\n")
        ds = parse_csv(csv_text, MAPPING)
        assert "geo" not in ds.entities[0].properties

    def test_empty_file_after_header(self):
        ds = parse_csv("id,name\n", MAPPING)
        assert ds.entities == ()

    def test_missing_id_column(self):
        with pytest.raises(SchemaError):
            parse_csv("name,url\nX,u\n", MAPPING)

    def test_wrong_column_count_rejected_with_line(self):
        csv_text = "id,name\nr1,X\nr2\nr3,Z\n"
        ds = parse_csv(csv_text, MAPPING)
        assert [e.id for e in ds.entities] == ["r1", "r3"]
        assert len(ds.row_errors) == 1
        assert ds.row_errors[0].line == 3

    def test_unparseable_number_reports_cell(self):
        mapping = SchemaMapping(type_hints={"rank": "number"})
        ds = parse_csv("id,rank\nr1,notanumber\n", mapping)
        assert ds.entities == ()
        assert "rank" in str(ds.row_errors[0])

    def test_empty_cells_are_absent_not_empty_string(self):
        ds = parse_csv("id,name,url\nr1,X,\n", MAPPING)
        assert "url" not in ds.entities[0].properties

    def test_round_trip(self):
        ds = parse_csv(CSV_FIVE_PROPS, MAPPING)
        text = write_csv(ds, ["name", "url", "streetAddress", "latitude", "longitude"])
        again = parse_csv(text, MAPPING)
        assert again.entities == ds.entities

    def test_entity_count_accounting(self):
        csv_text = "id,name\nr1,A\nbad\nr2,B\nr3,C\n"
        ds = parse_csv(csv_text, MAPPING)
        assert len(ds.entities) + len(ds.row_errors) == 4


class TestParseRdf:
    def test_single_ntriple(self):
        nt = '<http://x/s> <http://schema.org/name> "Hugo\'s Bar" .\n'
        ds = parse_rdf(nt, "ntriples", MAPPING)
        assert len(ds.entities) == 1
        e = ds.entities[0]
        assert e.id == "http://x/s"
        assert e.values("name")[0].raw == "Hugo's Bar"

    def test_ntriples_syntax_error_carries_offset(self):
        bad = '<http://x/s> <http://schema.org/name> "ok" .\nthis is not a triple\n'
        with pytest.raises(ParseError) as err:
            parse_rdf(bad, "ntriples", MAPPING)
        assert err.value.offset > 0

    def test_nested_address_flattened(self):
        ttl = """
@prefix schema: <http://schema.org/> .
<http://x/r1> schema:name "Hugo's" ;
    schema:address <http://x/r1/addr> .
<http://x/r1/addr> schema:streetAddress "Str. Herrenanger 11" .
"""
        ds = parse_rdf(ttl, "turtle", MAPPING)
        assert len(ds.entities) == 1
        e = ds.entities[0]
        assert e.values("streetAddress")[0].raw == "Str. Herrenanger 11"

    def test_nested_geo_merged_to_geopoint(self):
        ttl = """
@prefix schema: <http://schema.org/> .
<http://x/r1> schema:name "X" ; schema:geo <http://x/r1/geo> .
<http://x/r1/geo> schema:latitude 47.04 ; schema:longitude 10.6 .
"""
        ds = parse_rdf(ttl, "turtle", MAPPING)
        assert ds.entities[0].values("geo")[0].geopoint == (47.04, 10.6)

    def test_two_aliases_give_two_values(self):
        ttl = """
@prefix schema: <http://schema.org/> .
@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
<http://x/r1> rdfs:label "Hugo's" ; schema:name "Hugos" .
"""
        mapping = SchemaMapping(aliases={
            "http://www.w3.org/2000/01/rdf-schema#label": "name",
            "http://schema.org/name": "name",
        })
        ds = parse_rdf(ttl, "turtle", mapping)
        assert sorted(v.raw for v in ds.entities[0].values("name")) == ["Hugo's", "Hugos"]

    def test_undeclared_prefix_is_parse_error(self):
        with pytest.raises(ParseError):
            parse_rdf('<http://x/a> schema:name "X" .', "turtle", MAPPING)

    def test_predicate_object_list_with_commas(self):
        ttl = """
@prefix schema: <http://schema.org/> .
<http://x/r1> schema:name "A", "B" .
"""
        ds = parse_rdf(ttl, "turtle", MAPPING)
        assert sorted(v.raw for v in ds.entities[0].values("name")) == ["A", "B"]


class TestApplyMapping:
    def test_rename(self):
        e = Entity("a", "T", {"rdfs:label": (text_value("x"),)})
        ds = apply_mapping(Dataset("d", (e,)), SchemaMapping(aliases={"rdfs:label": "name"}))
        assert ds.entities[0].values("name")[0].raw == "x"

    def test_merge_preserves_source_order(self):
        e = Entity("a", "T", {"title": (text_value("a"),), "name": (text_value("b"),)})
        ds = apply_mapping(Dataset("d", (e,)), SchemaMapping(aliases={"title": "name"}))
        assert [v.raw for v in ds.entities[0].values("name")] == ["a", "b"]

    def test_identity_mapping(self):
        e = Entity("a", "T", {"name": (text_value("x"),)})
        ds = Dataset("d", (e,))
        assert apply_mapping(ds, SchemaMapping()) == ds

    def test_idempotent_once_canonical(self):
        mapping = SchemaMapping(aliases={"title": "name"})
        e = Entity("a", "T", {"title": (text_value("x"),)})
        once = apply_mapping(Dataset("d", (e,)), mapping)
        twice = apply_mapping(once, mapping)
        assert once == twice


class TestDataset:
    def test_duplicate_ids_rejected(self):
        e1 = Entity("a", "T", {"name": (text_value("x"),)})
        e2 = Entity("a", "T", {"name": (text_value("y"),)})
        with pytest.raises(SchemaError):
            Dataset("d", (e1, e2))

    def test_write_ntriples(self):
        e = Entity("a", "T", {"name": (text_value('Hugo "H"'),)})
        out = write_ntriples(Dataset("d", (e,)))
        assert '\\"H\\"' in out
        assert out.endswith(".\n")
