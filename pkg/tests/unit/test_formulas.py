"""
Tests for the formula grammar, normal forms and stage semantics
"""

from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.errors import ExpressionSyntaxError, MalformedFormulaError
from core.formulas import (
    And,
    BetaStructure,
    Const,
    Exists,
    Forall,
    Implies,
    Less,
    LessEq,
    Not,
    Or,
    Rel,
    Var,
    constants,
    eval_in_structure,
    free_variables,
    is_closed,
    negate,
    nnf,
    parse_formula,
    parse_relation_decl,
    relabel,
    relation_symbols,
    stage_structures,
    substitute,
    valid_at_stage,
)

pytestmark = pytest.mark.unit

x, y, z = Var("x"), Var("y"), Var("z")
c0, c1 = Const(0), Const(1)


class TestParsing:
    def test_implication_associates_to_the_right(self):
        formula = parse_formula("x < y -> y < z -> x < z")
        assert formula == Implies(Less(x, y), Implies(Less(y, z), Less(x, z)))

    def test_conjunction_binds_tighter_than_disjunction(self):
        formula = parse_formula("c0 < c1 | c1 < c0 & c0 <= c0")
        assert formula == Or(Less(c0, c1), And(Less(c1, c0), LessEq(c0, c0)))

    def test_quantifier_scope_extends_right(self):
        formula = parse_formula("all x . x < c0 | c0 < x")
        assert formula == Forall("x", Or(Less(x, c0), Less(c0, x)))

    def test_negation_of_a_quantifier(self):
        assert parse_formula("~ all x . x < c0") == Not(Forall("x", Less(x, c0)))

    @pytest.mark.parametrize(
        "text",
        [
            "all x . ~(x < c0)",
            "ex x . all y . y <= x",
            "(c0 < c1 & c1 < c0)",
            "all x . (x < c0 -> ~(c0 < x))",
        ],
    )
    def test_printing_reparses(self, text):
        formula = parse_formula(text)
        assert parse_formula(str(formula)) == formula

    def test_declared_relation(self):
        formula = parse_formula("ex x . R(x, c1)", {"R": 2})
        assert formula == Exists("x", Rel("R", (x, c1)))

    def test_inferred_relation(self):
        formula = parse_formula("all x . R(x, c0) & P()", infer_relations=True)
        assert relation_symbols(formula) == {"R": 2, "P": 0}

    def test_undeclared_relation(self):
        with pytest.raises(ExpressionSyntaxError, match="undeclared") as info:
            parse_formula("R(x)")
        assert info.value.production == "atom"

    def test_wrong_arity(self):
        with pytest.raises(ExpressionSyntaxError, match="R takes 2 arguments"):
            parse_formula("R(x)", {"R": 2})

    def test_missing_term_reports_end_of_input(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_formula("c0 < ")
        assert info.value.token == "<end>"
        assert info.value.production == "term"

    def test_unexpected_character(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_formula("c0 $ c1")
        assert info.value.token == "$"

    @pytest.mark.parametrize("text", ["all c0 . c0 < c1", "(c0 < c1", "c0 < c1 c2", "x"])
    def test_rejected(self, text):
        with pytest.raises(ExpressionSyntaxError):
            parse_formula(text)

    def test_relation_declarations(self):
        assert parse_relation_decl("R2:2") == ("R2", 2)
        for bad in ("c1:2", "all:1", "R", "R:x"):
            with pytest.raises(ExpressionSyntaxError):
                parse_relation_decl(bad)


class TestStructure:
    def test_nnf_pushes_negations_to_atoms(self):
        formula = parse_formula("~(c0 < c1 -> ex x . R(x))", {"R": 1})
        assert nnf(formula) == And(Less(c0, c1), Forall("x", Not(Rel("R", (x,)))))

    def test_negate_dualizes(self):
        assert negate(Forall("x", Less(x, c0))) == Exists("x", Not(Less(x, c0)))
        assert negate(Not(Less(c0, c1))) == Less(c0, c1)

    def test_substitute_respects_binding(self):
        formula = parse_formula("x < y & all x . x < y")
        result = substitute(formula, "x", Const(3))
        assert result == And(Less(Const(3), y), Forall("x", Less(x, y)))

    def test_relabel(self):
        formula = relabel(parse_formula("c0 < c2"), lambda i: i + 1)
        assert formula == Less(c1, Const(3))
        assert constants(parse_formula("c0 < c2 | x < c0")) == {0, 2}

    def test_free_variables(self):
        assert free_variables(parse_formula("all x . x < y")) == {"y"}
        assert is_closed(parse_formula("all x . ex y . x < y"))


class TestSemantics:
    def test_evaluation_in_a_full_stage(self):
        structure = BetaStructure(3)
        assert eval_in_structure(parse_formula("all x . ex y . x <= y"), structure)
        assert not eval_in_structure(parse_formula("all x . ex y . x < y"), structure)

    def test_quantifiers_range_over_the_whole_stage(self):
        assert eval_in_structure(parse_formula("ex x . c1 < x"), BetaStructure(3))
        assert not eval_in_structure(parse_formula("ex x . c1 < x"), BetaStructure(2))
        assert list(BetaStructure(3).universe) == [0, 1, 2]

    def test_free_variable_has_no_value(self):
        with pytest.raises(MalformedFormulaError):
            eval_in_structure(Less(x, c0), BetaStructure(2))

    def test_constant_beyond_the_stage_has_no_value(self):
        with pytest.raises(MalformedFormulaError):
            eval_in_structure(Less(c0, c1), BetaStructure(1))

    def test_relations_must_fit_the_stage(self):
        with pytest.raises(ValueError):
            BetaStructure(2, {"R": frozenset({(5,)})})

    def test_stage_structures(self):
        assert len(list(stage_structures(2, {}))) == 1
        assert len(list(stage_structures(1, {"R": 1}))) == 2
        assert len(list(stage_structures(2, {"R": 1}))) == 4
        assert len(list(stage_structures(2, {"E": 2}))) == 16

    def test_describe(self):
        structure = BetaStructure(1, {"R": frozenset()})
        assert structure.describe() == {"stage": 1, "universe": [0], "relations": {"R": []}}

    def test_validity(self):
        assert valid_at_stage(parse_formula("all x . (R(x) | ~R(x))", {"R": 1}), 2)
        assert not valid_at_stage(parse_formula("ex x . R(x)", {"R": 1}), 2)
        assert valid_at_stage(parse_formula("all x . ~(x < c0)"), 3)
        assert valid_at_stage(parse_formula("ex x . ex y . x < y"), 2)
        assert not valid_at_stage(parse_formula("ex x . ex y . x < y"), 1)

    def test_empty_stage(self):
        assert valid_at_stage(parse_formula("all x . x < x"), 0)
        assert not valid_at_stage(parse_formula("ex x . x <= x"), 0)

    def test_constants_beyond_the_stage(self):
        with pytest.raises(MalformedFormulaError):
            valid_at_stage(parse_formula("c3 < c4"), 2)


# --- evaluation by sets of assignments ---------------------------------------

VARIABLES = ("x", "y")

terms = st.sampled_from([x, y, c0, c1])
atoms = st.one_of(
    st.builds(Less, terms, terms),
    st.builds(LessEq, terms, terms),
    st.builds(lambda t: Rel("R", (t,)), terms),
    st.builds(lambda s, t: Rel("E", (s, t)), terms, terms),
)
bodies = st.recursive(
    atoms,
    lambda children: st.one_of(
        children.map(Not),
        st.builds(And, children, children),
        st.builds(Or, children, children),
        st.builds(Implies, children, children),
        st.builds(Forall, st.sampled_from(VARIABLES), children),
        st.builds(Exists, st.sampled_from(VARIABLES), children),
    ),
    max_leaves=6,
)
quantifiers = st.sampled_from([Forall, Exists])
sentences = st.builds(lambda q, r, body: q("x", r("y", body)), quantifiers, quantifiers, bodies)


@st.composite
def structures(draw):
    points = list(range(draw(st.integers(min_value=2, max_value=3))))
    unary = draw(st.sets(st.tuples(st.sampled_from(points))))
    binary = draw(st.sets(st.tuples(st.sampled_from(points), st.sampled_from(points))))
    return BetaStructure(len(points), {"R": frozenset(unary), "E": frozenset(binary)})


def satisfying(formula, structure: BetaStructure):
    """The (x, y) assignments satisfying a formula, built bottom-up"""
    grid = frozenset(product(structure.universe, repeat=2))

    def value(term, point):
        return term.index if isinstance(term, Const) else point[VARIABLES.index(term.name)]

    if isinstance(formula, Less):
        return frozenset(p for p in grid if value(formula.left, p) < value(formula.right, p))
    if isinstance(formula, LessEq):
        return frozenset(p for p in grid if value(formula.left, p) <= value(formula.right, p))
    if isinstance(formula, Rel):
        tuples = structure.relations[formula.name]
        return frozenset(p for p in grid if tuple(value(t, p) for t in formula.args) in tuples)
    if isinstance(formula, Not):
        return grid - satisfying(formula.body, structure)
    if isinstance(formula, And):
        return satisfying(formula.left, structure) & satisfying(formula.right, structure)
    if isinstance(formula, Or):
        return satisfying(formula.left, structure) | satisfying(formula.right, structure)
    if isinstance(formula, Implies):
        return (grid - satisfying(formula.left, structure)) | satisfying(formula.right, structure)
    body = satisfying(formula.body, structure)
    k = VARIABLES.index(formula.var)
    result = set()
    for p in grid:
        line = {q for q in grid if q[1 - k] == p[1 - k]}
        if (line <= body) if isinstance(formula, Forall) else bool(line & body):
            result.add(p)
    return frozenset(result)


class TestAgainstAssignmentSets:
    @settings(derandomize=True)
    @given(sentences, structures())
    def test_sentences(self, formula, structure):
        assert eval_in_structure(formula, structure) is ((0, 0) in satisfying(formula, structure))

    @settings(derandomize=True)
    @given(bodies, structures(), st.data())
    def test_open_formulas(self, formula, structure, data):
        points = st.sampled_from(structure.universe)
        point = data.draw(st.tuples(points, points))
        env = dict(zip(VARIABLES, point))
        expected = point in satisfying(formula, structure)
        assert eval_in_structure(formula, structure, env) is expected
