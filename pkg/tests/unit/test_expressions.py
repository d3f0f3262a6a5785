"""
Tests for the order, dilator and ordinal expression grammars and fixture loading
"""

import json

import pytest

from core.combinators import CertifiedSumSystem, ImplicationSystem, SumSystem
from core.errors import ExpressionSyntaxError, FixtureError, StreamExhaustedError
from core.expressions import (
    load_stream,
    parse_cnf,
    parse_dilator,
    parse_grid,
    parse_map,
    parse_order,
    read_json,
)
from core.linord import DisjOrder, FiniteOrder, OmegaStar, SumOrder
from core.ordinals import OMEGA, ONE, Ordinal, cnf_add, cnf_mul, cnf_omega_pow, cnf_power

pytestmark = pytest.mark.unit


class TestOrders:
    @pytest.mark.parametrize(
        "text",
        [
            "fin:[2,0,1]",
            "fin:[]",
            "ws",
            "cnf:w^w",
            "sum(fin:[0],ws)",
            "disj(ws,cnf:w)",
            "desc(fin:[0,1])",
            "eval(expw,cnf:w)",
            "kb:[[],[0],[1]]",
        ],
    )
    def test_expr_is_canonical(self, text):
        assert parse_order(text).expr == text

    def test_whitespace_is_ignored(self):
        order = parse_order(" sum( fin:[0 , 1] , ws ) ")
        assert isinstance(order, SumOrder)
        assert order.expr == "sum(fin:[0,1],ws)"

    def test_types(self):
        assert isinstance(parse_order("fin:[0]"), FiniteOrder)
        assert isinstance(parse_order("ws"), OmegaStar)
        assert isinstance(parse_order("disj(ws,ws)"), DisjOrder)
        assert parse_order("disj(ws,ws)").wellfounded is False

    def test_cnf_bound(self):
        order = parse_order("cnf:w^w+w*2+3")
        assert str(order.order_type) == "w^w+w*2+3"

    def test_tree_from_a_file(self, fixtures_dir):
        order = parse_order("kb:@trees/binary2.json", fixtures_dir)
        assert order.expr == "kb:@trees/binary2.json"
        assert order.size == 7

    def test_descending_tree(self):
        assert parse_order("desc(fin:[0,1,2])").size == 8

    def test_broken_tree_file(self, fixtures_dir):
        with pytest.raises(FixtureError, match="prefix closed"):
            parse_order("kb:@trees/broken.json", fixtures_dir)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FixtureError):
            parse_order("kb:@nowhere.json", tmp_path)

    def test_duplicate_finite_codes(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_order("fin:[1,1]")
        assert info.value.production == "fin"

    def test_missing_comma_names_the_production(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_order("sum(ws fin:[0])")
        assert info.value.production == "sum"
        assert info.value.token == "fin:"

    @pytest.mark.parametrize(
        "text,production",
        [("ws2", "order"), ("ws )", "order"), ("cnf:", "cnf"), ("kb:{}", "kb"), ("kb:[[0]]", "kb")],
    )
    def test_rejected(self, text, production):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_order(text)
        assert info.value.production == production


class TestDilators:
    @pytest.mark.parametrize(
        "text",
        [
            "id",
            "expw",
            "const(fin:[0,1])",
            "impl(cnf:w,ws)",
            "sum(id,expw)",
            "comp(expw,id)",
            'proof("all x . (R(x) | ~R(x))")',
        ],
    )
    def test_expr_is_canonical(self, text):
        assert parse_dilator(text).expr == text

    def test_implication(self):
        system = parse_dilator("impl(fin:[0],ws)")
        assert isinstance(system, ImplicationSystem)
        assert system.b.expr == "ws"

    def test_omega_sum_of_a_stream(self, fixtures_dir):
        system = parse_dilator("osum(@streams/pure.json,2)", fixtures_dir)
        assert isinstance(system, SumSystem)
        assert system.expr == "osum(@streams/pure.json,2)"
        assert [part.expr for part in system.parts] == ["id", "expw"]

    def test_omega_sum_beyond_the_stream(self, fixtures_dir):
        with pytest.raises(StreamExhaustedError):
            parse_dilator("osum(@streams/pure.json,9)", fixtures_dir)

    def test_recursive_copy(self, fixtures_dir):
        system = parse_dilator("rcopy(@streams/certified.json)", fixtures_dir)
        assert isinstance(system, CertifiedSumSystem)
        assert system.certificates == (b"p0", b"p2")
        assert system.expr == "rcopy(@streams/certified.json)"

    def test_table(self, fixtures_dir):
        system = parse_dilator("table(@tables/colex_pair.json)", fixtures_dir)
        assert system.expr == "table(@tables/colex_pair.json)"
        assert system.arity("succ") == 1

    @pytest.mark.parametrize(
        "text,production",
        [
            ("const(ws", "const"),
            ('proof("all x . R(x)', "proof"),
            ("ident", "dilator"),
            ("osum(@streams/pure.json)", "osum"),
        ],
    )
    def test_rejected(self, text, production):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_dilator(text)
        assert info.value.production == production


class TestStreams:
    def test_certified_stream(self, stream_path):
        stream = load_stream(stream_path("certified"))
        assert stream.certified
        assert [entry.expr for entry in stream.positive] == ["id", "const(fin:[0,1])"]
        assert [entry.certificate for entry in stream.positive] == [b"p0", b"p2"]

    def test_uncertified_entries_use_their_expression(self, stream_path):
        stream = load_stream(stream_path("paired_1"))
        assert not stream.certified
        assert stream.positive[0].certificate == b"id"
        assert [entry.expr for entry in stream.negative] == ["impl(cnf:w^2,ws)"]
        assert stream.name == "paired: shared defect at w^2"

    @pytest.mark.parametrize(
        "content",
        [
            [],
            {"positive": "id"},
            {"positive": [{"certificate": "cDA="}]},
            {"positive": [{"expr": "id", "certificate": "!!"}]},
        ],
    )
    def test_malformed_streams(self, tmp_path, content):
        path = tmp_path / "stream.json"
        path.write_text(json.dumps(content))
        with pytest.raises(FixtureError):
            load_stream(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(FixtureError, match="invalid JSON"):
            read_json(path)


class TestScalars:
    def test_cnf(self):
        assert parse_cnf("cnf:w^(w+1)") == cnf_omega_pow(cnf_add(OMEGA, ONE))
        assert parse_cnf("2^w") == OMEGA
        assert parse_cnf("w^2") == cnf_power(OMEGA, Ordinal.from_int(2))
        assert parse_cnf("(w+1)*2") == cnf_add(cnf_mul(OMEGA, Ordinal.from_int(2)), ONE)

    def test_grid_is_sorted_without_repeats(self):
        assert parse_grid("cnf:w^2, cnf:w,cnf:w") == [OMEGA, parse_cnf("w^2")]
        with pytest.raises(ExpressionSyntaxError):
            parse_grid(" ")

    def test_map(self):
        assert parse_map("1,3") == (1, 3)
        assert parse_map("") == ()
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_map("1,x")
        assert info.value.token == "x"
