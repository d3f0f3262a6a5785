"""
Acceptance properties checked against exact small-instance oracles
"""

import random
from itertools import combinations, permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from core.betaproof import (
    check_completeness,
    check_soundness,
    extract_countermodel,
    proof_functor,
    proof_predilator,
    proof_search,
)
from core.budget import SearchBudget
from core.combinators import (
    compose,
    constant,
    embed_into_implication,
    exp_omega,
    identity_system,
    implication_dilator,
    recursive_copy,
    sum_systems,
)
from core.dilator import check_predilator, evaluate
from core.expressions import load_stream, parse_dilator, parse_order
from core.formulas import constants, eval_in_structure, parse_formula, valid_at_stage
from core.linord import (
    FiniteOrder,
    KbOrder,
    OmegaStar,
    find_descending_chain,
    finite_order,
    increasing_maps,
)
from core.models import Category, Cmp, ProofStatus
from core.norms import classify, o12_probe, s12_probe, verify_chain
from core.ordinals import (
    OMEGA,
    ZERO,
    Ordinal,
    cnf_add,
    cnf_compare,
    cnf_omega_pow,
    cnf_power,
    notations_of_weight,
    omega_tower,
)
from core.streams import StreamEntry, TheoryStream
from core.trees import FiniteTree

pytestmark = [pytest.mark.integration, pytest.mark.acceptance, pytest.mark.slow]

OMEGA_SQUARED = cnf_power(OMEGA, Ordinal.from_int(2))
PROBE_GRID = [ZERO, OMEGA, OMEGA_SQUARED, omega_tower(2)]
SEARCH_DEPTH = 24


def corpus_formula(entry):
    return parse_formula(entry["formula"], entry.get("relations") or None)


# --- KB order ----------------------------------------------------------------


def kb_less(s, t) -> bool:
    """s <_KB t straight from the definition"""
    if len(s) > len(t) and s[: len(t)] == t:
        return True
    for a, b in zip(s, t):
        if a != b:
            return a < b
    return False


@st.composite
def finite_trees(draw):
    steps = draw(
        st.lists(
            st.tuples(st.integers(min_value=0), st.integers(min_value=0, max_value=3)),
            max_size=24,
        )
    )
    nodes = [()]
    for parent, label in steps:
        node = nodes[parent % len(nodes)] + (label,)
        if node not in nodes:
            nodes.append(node)
    return nodes


class TestKleeneBrouwerOracle:
    @settings(max_examples=200, derandomize=True)
    @given(finite_trees())
    def test_agrees_with_the_definition(self, nodes):
        order = KbOrder(FiniteTree(nodes))
        for s, t in combinations(nodes, 2):
            expected = Cmp.LT if kb_less(s, t) else Cmp.GT
            assert order.compare(s, t) is expected
        assert not find_descending_chain(order, len(nodes) + 1).found


# --- implication dilators ----------------------------------------------------


def embeds_by_brute_force(a: FiniteOrder, x: FiniteOrder) -> bool:
    source = a.sort(a.prefix(a.size))
    for image in permutations(x.prefix(x.size), len(source)):
        if all(
            x.compare(image[i], image[j]) is Cmp.LT
            for i, j in combinations(range(len(source)), 2)
        ):
            return True
    return False


class TestImplicationCharacterization:
    @pytest.mark.parametrize("p", range(6))
    @pytest.mark.parametrize("q", range(6))
    def test_chain_exists_iff_a_embeds(self, p, q):
        a, x = finite_order(p), finite_order(q)
        value = evaluate(implication_dilator(a, OmegaStar()), x)
        depth = p + 3
        result = find_descending_chain(value, depth)
        assert result.found is embeds_by_brute_force(a, x)
        if result.found:
            assert len(result.value) == depth
            assert verify_chain(value, result.value)

    @pytest.mark.parametrize("b", ["ws", "fin:[0,1,2,3,4]", "sum(fin:[0,1,2],ws)"])
    @pytest.mark.parametrize("a", ["fin:[0,1]", "cnf:w"])
    def test_embedding_into_the_value_at_a(self, a, b):
        embedding = embed_into_implication(parse_order(b), parse_order(a))
        assert embedding.violation(20) is None


# --- laws ----------------------------------------------------------------------


class TestLawSuite:
    @pytest.mark.parametrize(
        "system",
        [
            identity_system(),
            constant(FiniteOrder([0, 1, 2])),
            constant(OmegaStar()),
            exp_omega(),
            implication_dilator(finite_order(2), OmegaStar()),
            implication_dilator(FiniteOrder([0, 1, 2], enumeration=[2, 0, 1]), finite_order(3)),
            sum_systems(identity_system(), exp_omega()),
            compose(exp_omega(), identity_system()),
            compose(identity_system(), constant(finite_order(2))),
            recursive_copy([(identity_system(), b"p1"), (exp_omega(), b"p0")]),
        ],
        ids=lambda system: system.expr,
    )
    def test_combinators(self, system):
        report = check_predilator(system, 4)
        assert report.passed, f"{report.law}: {report.counterexample}"

    def test_proof_predilators(self, corpus):
        for entry in corpus:
            phi = corpus_formula(entry)
            if constants(phi):
                continue
            report = check_predilator(proof_predilator(phi), 4)
            assert report.passed, f"{entry['name']}: {report.law}: {report.counterexample}"


# --- beta logic --------------------------------------------------------------


def stages_for(entry, phi):
    top = 3 if entry.get("relations") else 4
    least = max(constants(phi), default=-1) + 1
    return range(max(least, 1), top + 1)


class TestBetaCompleteness:
    def test_search_closes_iff_valid(self, corpus):
        for entry in corpus:
            phi = corpus_formula(entry)
            for n in stages_for(entry, phi):
                assert check_completeness(phi, n, SEARCH_DEPTH), f"{entry['name']} at stage {n}"

    def test_closed_trees_are_sound_and_open_ones_refute(self, corpus):
        for entry in corpus:
            phi = corpus_formula(entry)
            for n in stages_for(entry, phi):
                tree = proof_search(phi, n, SEARCH_DEPTH)
                if tree.status is ProofStatus.CLOSED:
                    assert check_soundness(tree, entry.get("relations")).passed
                    assert valid_at_stage(phi, n)
                else:
                    assert not eval_in_structure(phi, extract_countermodel(tree))


class TestProofFunctoriality:
    def test_embeddings_and_composition(self, corpus):
        for entry in corpus:
            phi = corpus_formula(entry)
            if constants(phi):
                continue
            trees = {n: proof_search(phi, n, SEARCH_DEPTH) for n in range(5)}
            functors = {}
            for n, m in combinations(range(5), 2):
                for f in increasing_maps(n, m):
                    embedding = proof_functor(phi, f, trees[n], trees[m])
                    assert embedding.violations() == [], f"{entry['name']} along {f}"
                    functors[(n, m, f)] = embedding
            for (n, m, f), first in functors.items():
                for (m2, k, g), second in functors.items():
                    if m2 != m:
                        continue
                    direct = functors[(n, k, tuple(g[i] for i in f))]
                    assert first.then(second).node_map == direct.node_map


# --- theory streams ----------------------------------------------------------

WELLFOUNDED = ["id", "expw", "const(fin:[0,1])", "sum(id,expw)", "comp(expw,id)"]
PLANTED = {
    "const(ws)": ZERO,
    "impl(cnf:w,ws)": OMEGA,
    "impl(cnf:w^2,ws)": OMEGA_SQUARED,
    "impl(cnf:w^w,ws)": omega_tower(2),
}


def planted_stream(seed: int):
    rng = random.Random(seed)
    defects = rng.sample(sorted(PLANTED), rng.randint(1, 2))
    fillers = rng.sample(WELLFOUNDED, rng.randint(1, 4 - len(defects)))
    exprs = defects + fillers
    rng.shuffle(exprs)
    entries = [StreamEntry(parse_dilator(expr), expr.encode()) for expr in exprs]
    return entries, min(PLANTED[expr] for expr in defects)


class TestStreamProbes:
    @pytest.mark.parametrize("seed", range(20))
    def test_least_witness_ignores_the_enumeration(self, seed):
        entries, expected = planted_stream(seed)
        budget = SearchBudget(depth=4)
        for order in permutations(entries):
            report = o12_probe(TheoryStream(tuple(order)), PROBE_GRID, budget)
            assert report.value == expected
            witness = report.witness
            assert witness.verify(order[witness.index].system)

    def test_category_a(self, stream_path):
        assert classify(load_stream(stream_path("catA")), [OMEGA]).category is Category.A
        entries, _ = planted_stream(0)
        stream = TheoryStream(
            tuple(entries) + (StreamEntry(constant(OmegaStar()), b"planted"),)
        )
        verdict = classify(stream, [OMEGA])
        assert verdict.category is Category.A
        assert verdict.least == ZERO

    @pytest.mark.parametrize("planted", ["impl(cnf:w,ws)", "impl(cnf:w^2,ws)", "impl(cnf:w^w,ws)"])
    def test_category_b(self, planted):
        exprs = ["id", planted, "expw"]
        stream = TheoryStream(tuple(StreamEntry(parse_dilator(e), e.encode()) for e in exprs))
        verdict = classify(stream, PROBE_GRID[1:])
        assert verdict.category is Category.B
        assert verdict.least == PLANTED[planted]

    @pytest.mark.parametrize("name", [f"paired_{i}" for i in range(1, 6)])
    def test_s12_never_exceeds_o12(self, stream_path, name):
        stream = load_stream(stream_path(name))
        s12, o12 = s12_probe(stream, PROBE_GRID), o12_probe(stream, PROBE_GRID)
        if s12.value is not None:
            assert o12.value is not None
            assert s12.value <= o12.value


# --- CNF arithmetic ----------------------------------------------------------


def flatten(alpha: Ordinal):
    """Hereditary exponent list: w^e1 + w^e2 + ... with e1 >= e2 >= ..."""
    return tuple(flatten(e) for e, c in alpha.terms for _ in range(c))


def naive_compare(s, t) -> int:
    for a, b in zip(s, t):
        c = naive_compare(a, b)
        if c:
            return c
    return (len(s) > len(t)) - (len(s) < len(t))


def naive_add(s, t):
    if not t:
        return s
    kept = tuple(e for e in s if naive_compare(e, t[0]) >= 0)
    return kept + t


SMALL_NOTATIONS = [alpha for weight in range(5) for alpha in notations_of_weight(weight)]


class TestCnfOracle:
    def test_comparison_and_addition(self):
        for a in SMALL_NOTATIONS:
            for b in SMALL_NOTATIONS:
                expected = naive_compare(flatten(a), flatten(b))
                assert cnf_compare(a, b) is {-1: Cmp.LT, 0: Cmp.EQ, 1: Cmp.GT}[expected]
                assert flatten(cnf_add(a, b)) == naive_add(flatten(a), flatten(b))

    def test_omega_power(self):
        for a in SMALL_NOTATIONS:
            assert flatten(cnf_omega_pow(a)) == (flatten(a),)
