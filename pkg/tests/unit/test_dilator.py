"""
Tests for denotation systems, the law checker and natural transformations
"""

from itertools import islice

import pytest

from core.combinators import (
    ImplicationSystem,
    TableSystem,
    compose,
    constant,
    embed_into_implication,
    exp_omega,
    identity_system,
    omega_sum,
    recursive_copy,
    sum_systems,
    summand_inclusion,
)
from core.dilator import (
    Denotation,
    MergePattern,
    NatTransApprox,
    check_natural,
    check_predilator,
    evaluate,
    fmap,
    identity_transformation,
    merge_pattern,
    pattern_colex,
)
from core.errors import ArityMismatchError, FixtureError, StreamExhaustedError
from core.expressions import read_json
from core.linord import (
    CnfOrder,
    FiniteOrder,
    OmegaStar,
    OrderEmbedding,
    find_descending_chain,
    finite_order,
)
from core.models import Cmp
from core.ordinals import OMEGA, ONE, Ordinal, cnf_add, omega_tower

pytestmark = pytest.mark.unit


def table(fixtures_dir, name: str) -> TableSystem:
    return TableSystem.from_json(read_json(fixtures_dir / "tables" / f"{name}.json"), name)


class TestMergePattern:
    def test_interleaving_with_a_tie(self):
        pattern = merge_pattern([0, 2], [1, 2], finite_order(3))
        assert pattern == MergePattern((0, 2), (1, 2))
        assert pattern.width == 3
        assert str(pattern) == "[0, 2]|[1, 2]"

    def test_empty_sides(self):
        assert merge_pattern([], [4], finite_order(5)) == MergePattern((), (0,))
        assert MergePattern((), ()).width == 0

    def test_flip(self):
        assert MergePattern((0, 2), (1, 2)).flip() == MergePattern((1, 2), (0, 2))

    @pytest.mark.parametrize("left,right", [((1, 0), ()), ((0,), (2,)), ((0, 0), (1,))])
    def test_invalid_patterns(self, left, right):
        with pytest.raises(ValueError):
            MergePattern(left, right)

    def test_colex(self):
        assert pattern_colex(MergePattern((0, 2), (1, 2))) is Cmp.LT
        assert pattern_colex(MergePattern((0, 1), (0, 2))) is Cmp.LT
        assert pattern_colex(MergePattern((0,), (0,))) is Cmp.EQ


class TestEvaluation:
    def test_identity_at_a_finite_order(self):
        values = evaluate(identity_system(), finite_order(3))
        assert values.prefix(3) == [Denotation("id", (i,)) for i in range(3)]
        assert values.size == 3
        assert values.expr == "eval(id,fin:[0,1,2])"

    def test_identity_at_omega_star_is_illfounded(self):
        values = evaluate(identity_system(), OmegaStar())
        assert values.wellfounded is False
        result = find_descending_chain(values, 3)
        assert result.value == [Denotation("id", (i,)) for i in range(3)]

    def test_exp_omega_value_type(self):
        values = evaluate(exp_omega(), CnfOrder(OMEGA))
        assert values.order_type == omega_tower(2)

    def test_exp_omega_ordinals(self):
        values = evaluate(exp_omega(), CnfOrder(OMEGA))
        three = Ordinal.from_int(3)
        d = Denotation((1, 2), (Ordinal.from_int(0), three))
        beta = cnf_add(Ordinal(((three, 2),)), ONE)
        assert values.ordinal_of(d) == beta
        assert values.element_at_ordinal(beta) == d

    def test_exp_omega_at_level_one_enumerates_quickly(self):
        values = evaluate(exp_omega(), finite_order(1))
        assert values.prefix(30)[-1] == Denotation((29,), (0,))

    def test_constant_ignores_its_argument(self):
        values = evaluate(constant(finite_order(2)), OmegaStar())
        assert values.prefix(5) == [Denotation(0, ()), Denotation(1, ())]
        assert values.wellfounded is True

    def test_sum_interleaves_summands(self):
        values = evaluate(sum_systems(identity_system(), constant(finite_order(2))), finite_order(1))
        assert values.prefix(4) == [
            Denotation((0, "id"), (0,)),
            Denotation((1, 0), ()),
            Denotation((1, 1), ()),
        ]
        assert values.compare(Denotation((1, 0), ()), Denotation((0, "id"), (0,))) is Cmp.GT

    def test_composition_nests_value_types(self):
        values = evaluate(compose(exp_omega(), exp_omega()), CnfOrder(OMEGA))
        assert values.order_type == omega_tower(3)
        assert compose(exp_omega(), identity_system()).expr == "comp(expw,id)"


class TestFunctorialAction:
    def test_fmap_moves_arguments(self):
        f = OrderEmbedding.from_mapping(finite_order(2), finite_order(3), {0: 0, 1: 2})
        moved = fmap(identity_system(), f)(Denotation("id", (1,)))
        assert moved == Denotation("id", (2,))

    def test_fmap_rejects_foreign_denotations(self):
        f = OrderEmbedding.from_mapping(finite_order(2), finite_order(3), {0: 0, 1: 2})
        with pytest.raises(ArityMismatchError):
            fmap(identity_system(), f)(Denotation("id", (5,)))


class TestLawChecking:
    @pytest.mark.parametrize(
        "system",
        [
            identity_system(),
            constant(finite_order(2)),
            exp_omega(),
            sum_systems(identity_system(), constant(finite_order(1))),
            ImplicationSystem(finite_order(1), OmegaStar()),
        ],
        ids=lambda s: s.expr,
    )
    def test_builtins_are_predilators(self, system):
        report = check_predilator(system, 3, sample=25)
        assert report.passed, report.counterexample
        assert report.checks > 0

    def test_level_bound(self):
        with pytest.raises(ValueError):
            check_predilator(identity_system(), 1)

    def test_colex_table_passes(self, fixtures_dir):
        assert check_predilator(table(fixtures_dir, "colex_pair"), 3).passed

    def test_corrupt_table_fails_antisymmetry(self, fixtures_dir):
        report = check_predilator(table(fixtures_dir, "corrupt"), 2)
        assert report.law == "antisymmetry"
        assert "level 2" in report.counterexample

    def test_incomplete_table_fails_totality(self, fixtures_dir):
        assert check_predilator(table(fixtures_dir, "incomplete"), 2).law == "totality"

    @pytest.mark.parametrize(
        "data",
        [
            {"terms": [{"name": "a", "arity": -1}]},
            {"terms": [{"name": "a", "arity": 0}, {"name": "a", "arity": 1}]},
            {"terms": [{"name": "a", "arity": 0}], "fallback": "lex"},
            {
                "terms": [{"name": "a", "arity": 0}],
                "patterns": [
                    {"left": "a", "right": "b", "left_ranks": [], "right_ranks": [], "result": "LT"}
                ],
            },
            {"patterns": []},
        ],
    )
    def test_malformed_tables(self, data):
        with pytest.raises(FixtureError):
            TableSystem.from_json(data)


class TestNaturality:
    def test_identity_transformation(self):
        assert check_natural(identity_transformation(exp_omega()), 3, sample=20).passed

    def test_summand_inclusion(self):
        total = sum_systems(identity_system(), constant(finite_order(2)))
        assert check_natural(summand_inclusion(total, 1), 3).passed
        assert check_natural(summand_inclusion(total, 0), 3).passed

    def test_order_reversal_is_caught(self):
        identity = identity_system()
        reverse = NatTransApprox(
            identity,
            identity,
            lambda n, d: Denotation("id", (n - 1 - d.args[0],)),
            label="reverse",
        )
        report = check_natural(reverse, 3)
        assert report.law == "order-preservation"


class TestSums:
    def test_expr(self):
        total = sum_systems(identity_system(), constant(finite_order(2)))
        assert total.expr == "sum(id,const(fin:[0,1]))"

    def test_omega_sum_prefix(self):
        systems = [identity_system(), exp_omega()]
        assert omega_sum(systems, 2).parts == tuple(systems)
        with pytest.raises(StreamExhaustedError):
            omega_sum(systems, 3)
        with pytest.raises(ValueError):
            omega_sum(systems, -1)

    def test_recursive_copy_keeps_least_certificate(self):
        total = recursive_copy(
            [
                (identity_system(), b"p1"),
                (constant(finite_order(2)), b"p2"),
                (identity_system(), b"p0"),
            ]
        )
        assert total.certificates == (b"p0", b"p2")
        assert total.expr == "rcopy[id,const(fin:[0,1])]"
        first = next(iter(total.denotations(finite_order(1))))
        assert first == Denotation((0, b"p0", "id"), (0,))
        assert not total.contains(Denotation((0, b"p1", "id"), (0,)), finite_order(1))


class TestImplication:
    def test_wellfounded_consequent(self):
        system = ImplicationSystem(finite_order(1), finite_order(2))
        assert system.ill_founded_at(OmegaStar()) is False

    def test_illfounded_exactly_when_antecedent_embeds(self):
        system = ImplicationSystem(finite_order(1), OmegaStar())
        assert system.ill_founded_at(finite_order(1)) is True
        assert system.ill_founded_at(finite_order(0)) is False

    def test_witness_chain(self):
        values = evaluate(ImplicationSystem(finite_order(1), OmegaStar()), finite_order(2))
        chain = find_descending_chain(values, 3).value
        assert [d.term for d in chain] == [(0, ()), (1, (0,)), (2, (0, 1))]
        assert all(values.less(y, x) for x, y in zip(chain, chain[1:]))

    def test_embedding_of_the_consequent(self):
        source = FiniteOrder([0, 1, 2], enumeration=[2, 0, 1])
        embedding = embed_into_implication(source, finite_order(2))
        assert embedding.violation(3) is None

    def test_terms_are_descending_sequences(self):
        system = ImplicationSystem(finite_order(2), OmegaStar())
        terms = list(islice(system.terms(None), 6))
        assert terms[0] == (0, ())
        assert all(system.is_term(t) for t in terms)
        assert not system.is_term((2, (1, 0)))
