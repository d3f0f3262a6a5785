"""
Tests for report models and their converters
"""

import pytest

from core.betaproof import check_alpha_proof, extract_countermodel, proof_functor, proof_search
from core.dilator import Denotation
from core.expressions import load_stream
from core.formulas import parse_formula
from core.linord import FiniteOrder, OmegaStar, find_descending_chain, find_embedding
from core.norms import classify, o12_probe
from core.ordinals import OMEGA, ZERO
from core.reports import (
    SCHEMAS,
    OrderListing,
    audit_report,
    category_report,
    chain_report,
    countermodel_report,
    decode_code,
    embedding_report,
    encode_code,
    functor_report,
    order_listing,
    probe_report,
    proof_report,
)

pytestmark = pytest.mark.unit


class TestCodes:
    @pytest.mark.parametrize(
        "code,encoded",
        [
            (3, 3),
            (b"p0", "b64:cDA="),
            (OMEGA, "cnf:w"),
            ((0, (1, 2)), [0, [1, 2]]),
            (Denotation(1, (0, 2)), {"term": 1, "args": [0, 2]}),
        ],
    )
    def test_encoding(self, code, encoded):
        assert encode_code(code) == encoded
        assert decode_code(encoded) == code

    def test_implication_terms_survive(self):
        d = Denotation((2, (0, 1)), (0, 1))
        assert decode_code(encode_code(d)) == d

    def test_plain_strings_stay_strings(self):
        assert decode_code("succ") == "succ"


class TestOrderListing:
    def test_finite_orders_list_from_the_least_element(self):
        listing = order_listing(FiniteOrder([2, 0, 1]), 10)
        assert listing.elements == [2, 0, 1]
        assert listing.complete
        assert listing.size == 3
        assert listing.order_type == "cnf:3"

    def test_descending_and_truncated(self):
        listing = order_listing(FiniteOrder([2, 0, 1]), 2, descending=True)
        assert listing.elements == [1, 0]
        assert not listing.ascending
        assert not listing.complete

    def test_infinite_orders_sort_their_prefix(self):
        listing = order_listing(OmegaStar(), 3)
        assert listing.elements == [2, 1, 0]
        assert listing.size is None
        assert listing.wellfounded is False
        assert not listing.complete


class TestConverters:
    def test_chain(self):
        order = OmegaStar()
        report = chain_report(order, 3, find_descending_chain(order, 3))
        assert report.status == "found"
        assert report.verified
        assert len(report.chain) == 3

    def test_embedding(self):
        source, target = FiniteOrder([1, 0]), FiniteOrder([5, 3, 4])
        report = embedding_report(source, target, find_embedding(source, target), 10)
        assert report.status == "found"
        assert report.pairs == [(1, 5), (0, 3)]
        assert report.violation is None

    def test_proof_and_audit(self):
        tree = proof_search(parse_formula("all x . ~(x < c0)"), 3)
        report = proof_report(tree)
        assert report.status == "closed"
        assert report.size == len(report.nodes) == 4
        assert report.nodes[0].rule == "n-rule"
        assert audit_report(tree, check_alpha_proof(tree)).passed

    def test_countermodel(self):
        tree = proof_search(parse_formula("ex x . R(x)", infer_relations=True), 2)
        report = countermodel_report(tree, extract_countermodel(tree))
        assert report.universe == [0, 1]
        assert report.relations == {"R": []}
        assert report.formula_holds is False

    def test_functor(self):
        phi = parse_formula("all x . (R(x) | ~R(x))", infer_relations=True)
        embedding = proof_functor(phi, [0, 2], proof_search(phi, 2), proof_search(phi, 3))
        report = functor_report(str(phi), embedding)
        assert report.passed
        assert ([], []) in report.node_map
        assert ([1], [2]) in report.node_map

    def test_probe(self, stream_path):
        report = probe_report(o12_probe(load_stream(stream_path("catA")), [ZERO]))
        assert report.grid == ["cnf:0"]
        assert report.value == "cnf:0"
        assert report.witness.index == 1
        assert report.witness.chain[0] == {"term": 0, "args": []}
        assert [entry.attempts[0].status for entry in report.entries][:2] == ["none", "found"]

    def test_category(self, stream_path):
        report = category_report(classify(load_stream(stream_path("catA")), [ZERO]))
        assert report.category == "A"
        assert report.least == "cnf:0"


class TestSchemas:
    def test_every_schema_is_a_report(self):
        assert SCHEMAS["order"] is OrderListing
        for model in SCHEMAS.values():
            assert "properties" in model.model_json_schema()

    def test_json_round_trip(self, stream_path):
        report = category_report(classify(load_stream(stream_path("catB_w")), [OMEGA]))
        again = SCHEMAS["category"].model_validate_json(report.model_dump_json())
        assert again == report

    def test_reports_are_frozen(self):
        listing = order_listing(FiniteOrder([0]), 1)
        with pytest.raises(Exception):
            listing.size = 2
