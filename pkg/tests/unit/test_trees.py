"""
Tests for trees, the Kleene-Brouwer comparison and branch search
"""

from itertools import product

import pytest

from core.budget import SearchBudget
from core.models import Cmp, SearchStatus
from core.trees import ROOT, FiniteTree, LazyTree, find_branch, is_prefix, kb_compare

pytestmark = pytest.mark.unit

BINARY2 = [[], [0], [1], [0, 0], [0, 1], [1, 0], [1, 1]]


def full_binary_tree(wellfounded=None) -> LazyTree:
    return LazyTree(
        contains=lambda node: all(label in (0, 1) for label in node),
        children=lambda node, bound: [node + (i,) for i in (0, 1) if i < bound],
        child_bound=lambda node: 2,
        wellfounded=wellfounded,
        expr="binary",
    )


class TestKleeneBrouwer:
    def test_extension_is_smaller(self):
        assert kb_compare((0, 1), (0,)) is Cmp.LT
        assert kb_compare((), (5,)) is Cmp.GT

    def test_first_difference_decides(self):
        assert kb_compare((0, 9, 9), (1,)) is Cmp.LT
        assert kb_compare((2,), (1, 0)) is Cmp.GT

    def test_equal_nodes(self):
        assert kb_compare((1, 2), (1, 2)) is Cmp.EQ

    def test_pair_labels_compare_lexicographically(self):
        assert kb_compare(((0, 1),), ((1, 0),)) is Cmp.LT

    def test_is_prefix(self):
        assert is_prefix((), (3,))
        assert is_prefix((1, 2), (1, 2, 3))
        assert not is_prefix((1, 3), (1, 2, 3))


class TestFiniteTree:
    def test_rejects_missing_parent(self):
        with pytest.raises(ValueError, match="prefix closed"):
            FiniteTree([[], [0, 1]])

    def test_nodes_by_length(self):
        tree = FiniteTree(BINARY2)
        assert list(tree.nodes()) == [tuple(n) for n in BINARY2]
        assert tree.size == 7
        assert tree.expr == "kb:[[],[0],[1],[0,0],[0,1],[1,0],[1,1]]"

    def test_children_respect_label_bound(self):
        tree = FiniteTree([[], [0], [5]])
        assert tree.children(ROOT, 1) == [(0,)]
        assert tree.children(ROOT, 6) == [(0,), (5,)]
        assert tree.child_bound(ROOT) == 6
        assert tree.child_bound((5,)) == 0

    def test_branch_found(self):
        result = find_branch(FiniteTree(BINARY2), 3, SearchBudget().meter())
        assert result.status is SearchStatus.FOUND
        assert result.value == [(), (0,), (0, 0)]

    def test_no_branch_beyond_height(self):
        result = find_branch(FiniteTree(BINARY2), 4, SearchBudget().meter())
        assert result.status is SearchStatus.NONE

    def test_branch_through_late_sibling(self):
        tree = FiniteTree([[], [0], [4], [4, 2]])
        result = find_branch(tree, 3, SearchBudget().meter())
        assert result.value == [(), (4,), (4, 2)]

    def test_depth_must_be_positive(self):
        with pytest.raises(ValueError):
            find_branch(FiniteTree(BINARY2), 0, SearchBudget().meter())


class TestLazyTree:
    def test_infinite_branch(self):
        result = find_branch(full_binary_tree(), 5, SearchBudget().meter())
        assert result.found
        assert result.value[-1] == (0, 0, 0, 0)

    def test_unbounded_branching_runs_out_of_budget(self):
        barren = LazyTree(contains=lambda node: node == (), children=lambda node, bound: [])
        result = find_branch(barren, 2, SearchBudget(nodes=20).meter())
        assert result.status is SearchStatus.BUDGET_EXHAUSTED

    def test_known_empty_branching_is_definite(self):
        single = LazyTree(
            contains=lambda node: node == (),
            children=lambda node, bound: [],
            child_bound=lambda node: 0,
        )
        result = find_branch(single, 2, SearchBudget(nodes=20).meter())
        assert result.status is SearchStatus.NONE

    def test_generic_enumeration_of_a_finite_lazy_tree(self):
        tree = LazyTree(
            contains=lambda node: node in {(), (0,), (1,)},
            children=lambda node, bound: [(i,) for i in range(2) if i < bound] if node == () else [],
            child_bound=lambda node: 2 if node == () else 0,
        )
        assert list(tree.nodes()) == [(), (0,), (1,)]

    def test_enumeration_of_an_infinite_tree_has_no_repeats(self):
        nodes = []
        for node in full_binary_tree().nodes():
            nodes.append(node)
            if len(nodes) == 40:
                break
        assert len(set(nodes)) == 40
        depth_two = {node for node in nodes if len(node) == 2}
        assert depth_two == set(product((0, 1), repeat=2))
