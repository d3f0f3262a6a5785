"""
Trees of finite sequences, their Kleene-Brouwer comparison and branch search

Nodes are tuples of labels. A label is a natural number or a tuple of naturals
(pair trees); labels of siblings are compared with Python's ordering, which is
the natural order on ints and the lexicographic order on tuples.
"""

import json
import logging
from abc import ABC, abstractmethod
from itertools import count
from typing import (
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from core.budget import BudgetMeter
from core.models import Cmp, SearchResult, SearchStatus

logger = logging.getLogger(__name__)

Label = Union[int, Tuple[int, ...]]
Node = Tuple[Label, ...]

ROOT: Node = ()


def label_weight(label: Label) -> int:
    if isinstance(label, tuple):
        return sum(label)
    return label


def kb_compare(s: Node, t: Node) -> Cmp:
    """Kleene-Brouwer order: proper extensions are smaller, else the first
    differing label decides"""
    for x, y in zip(s, t):
        if x != y:
            return Cmp.of(x, y)
    return Cmp.of(len(t), len(s))


def is_prefix(s: Node, t: Node) -> bool:
    return len(s) <= len(t) and t[: len(s)] == s


class Tree(ABC):
    """A prefix-closed set of label sequences.

    children(node, bound) lists the children whose label weight is below bound;
    child_bound(node) returns a bound that covers every child, or None when the
    branching at node is unbounded or unknown.
    """

    expr: Optional[str] = None
    wellfounded: Optional[bool] = None

    @abstractmethod
    def contains(self, node: Node) -> bool: ...

    @abstractmethod
    def children(self, node: Node, bound: int) -> List[Node]: ...

    def child_bound(self, node: Node) -> Optional[int]:
        return None

    @property
    def size(self) -> Optional[int]:
        """Number of nodes, if known to be finite"""
        return None

    def nodes(self) -> Iterator[Node]:
        """Enumerate all nodes without repetition.

        Round `bound` visits nodes of length <= bound whose labels weigh less
        than bound; enumeration stops once a round proves nothing lies outside it.
        """
        seen: Set[Node] = set()
        for bound in count(1):
            complete = True
            stack = [ROOT]
            fresh: List[Node] = []
            while stack:
                node = stack.pop()
                if node not in seen:
                    seen.add(node)
                    fresh.append(node)
                limit = self.child_bound(node)
                if limit is None or limit > bound or (len(node) >= bound and limit > 0):
                    complete = False
                if len(node) < bound:
                    stack.extend(reversed(self.children(node, bound)))
            yield from fresh
            if complete:
                return


class FiniteTree(Tree):
    """Explicit finite tree, as loaded from a JSON array of integer arrays"""

    def __init__(self, nodes: Iterable[Sequence[Label]], expr: Optional[str] = None):
        members = {tuple(node) for node in nodes}
        for node in members:
            if node and node[:-1] not in members:
                raise ValueError(f"tree is not prefix closed: {list(node)} lacks its parent")
        self._members = members
        self._children: Dict[Node, List[Node]] = {node: [] for node in members}
        for node in members:
            if node:
                self._children[node[:-1]].append(node)
        for kids in self._children.values():
            kids.sort(key=lambda child: child[-1])
        self.expr = expr or "kb:" + json.dumps(self.as_lists(), separators=(",", ":"))
        self.wellfounded = True

    def contains(self, node: Node) -> bool:
        return node in self._members

    def children(self, node: Node, bound: int) -> List[Node]:
        return [c for c in self._children.get(node, []) if label_weight(c[-1]) < bound]

    def child_bound(self, node: Node) -> Optional[int]:
        kids = self._children.get(node, [])
        return max(label_weight(c[-1]) for c in kids) + 1 if kids else 0

    @property
    def size(self) -> Optional[int]:
        return len(self._members)

    def nodes(self) -> Iterator[Node]:
        return iter(sorted(self._members, key=lambda n: (len(n), n)))

    def as_lists(self) -> List[List[Label]]:
        return [list(node) for node in sorted(self._members, key=lambda n: (len(n), n))]


class LazyTree(Tree):
    """Tree given by a membership test and a child generator"""

    def __init__(
        self,
        contains: Callable[[Node], bool],
        children: Callable[[Node, int], List[Node]],
        child_bound: Optional[Callable[[Node], Optional[int]]] = None,
        wellfounded: Optional[bool] = None,
        expr: Optional[str] = None,
    ):
        self._contains = contains
        self._children = children
        self._child_bound = child_bound
        self.wellfounded = wellfounded
        self.expr = expr

    def contains(self, node: Node) -> bool:
        return self._contains(node)

    def children(self, node: Node, bound: int) -> List[Node]:
        return self._children(node, bound)

    def child_bound(self, node: Node) -> Optional[int]:
        return self._child_bound(node) if self._child_bound else None


def find_branch(tree: Tree, depth: int, meter: BudgetMeter) -> SearchResult[List[Node]]:
    """Search for a nested chain root > n1 > ... of `depth` nodes (KB-descending).

    Children are explored with a label bound that doubles between rounds; the
    answer is a definite NONE only when a round covered every child.
    """
    if depth <= 0:
        raise ValueError(f"depth must be positive, got {depth}")
    if not tree.contains(ROOT):
        return SearchResult(SearchStatus.NONE, spent=meter.spent)

    bound = 1
    while True:
        exhaustive = True
        failed: Set[Node] = set()

        def extend(node: Node, remaining: int) -> Optional[List[Node]]:
            nonlocal exhaustive
            if not meter.spend():
                exhaustive = False
                return None
            if remaining == 1:
                return [node]
            if node in failed:
                return None
            limit = tree.child_bound(node)
            if limit is None or limit > bound:
                exhaustive = False
            for child in tree.children(node, bound):
                branch = extend(child, remaining - 1)
                if branch is not None:
                    return [node] + branch
                if meter.exhausted:
                    return None
            failed.add(node)
            return None

        branch = extend(ROOT, depth)
        if branch is not None:
            logger.info(f"Found branch of length {depth} at label bound {bound}")
            return SearchResult(SearchStatus.FOUND, branch, meter.spent)
        if meter.exhausted:
            return SearchResult(SearchStatus.BUDGET_EXHAUSTED, spent=meter.spent)
        if exhaustive:
            return SearchResult(SearchStatus.NONE, spent=meter.spent)
        bound *= 2
