"""
Countable linear orders
Orders are presented lazily by an enumeration of element codes plus a decidable
comparison. This module holds the base orders (finite, omega*, CNF ordinals),
sums, Kleene-Brouwer orders of trees, the disjunction order, order embeddings
and the bounded searches for descending chains and embeddings.
"""

import logging
import threading
from abc import ABC, abstractmethod
from functools import cmp_to_key
from itertools import combinations, count
from typing import (
    Callable,
    Dict,
    Hashable,
    Iterable,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
)

from core.budget import BudgetMeter, SearchBudget
from core.errors import UnknownElementError
from core.lazy import CachedEnumeration
from core.models import Cmp, SearchResult, SearchStatus
from core.ordinals import (
    ZERO,
    Ordinal,
    cnf_add,
    cnf_compare,
    cnf_difference,
    ordinals_below,
)
from core.trees import ROOT, Node, Tree, find_branch, kb_compare

logger = logging.getLogger(__name__)

Code = Hashable

_SIGN = {Cmp.LT: -1, Cmp.EQ: 0, Cmp.GT: 1}


def _natural(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool) and x >= 0


class LinearOrder(ABC):
    """A countable linear order.

    Subclasses supply the enumeration, the comparison on members and the
    membership test. Codes are canonical: two codes denote the same element
    exactly when they are equal.
    """

    wellfounded: Optional[bool] = None

    def __init__(self):
        self._enumeration = CachedEnumeration(self._enumerate)

    @property
    @abstractmethod
    def expr(self) -> str: ...

    @abstractmethod
    def _enumerate(self) -> Iterator[Code]: ...

    @abstractmethod
    def _compare(self, x: Code, y: Code) -> Cmp: ...

    @abstractmethod
    def contains(self, x: Code) -> bool: ...

    @property
    def size(self) -> Optional[int]:
        """Number of elements; None unless the order is known to be finite"""
        return None

    @property
    def order_type(self) -> Optional[Ordinal]:
        return None

    def compare(self, x: Code, y: Code) -> Cmp:
        for code in (x, y):
            if not self.contains(code):
                raise UnknownElementError(f"{code!r} is not an element of {self.expr}")
        if x == y:
            return Cmp.EQ
        return self._compare(x, y)

    def less(self, x: Code, y: Code) -> bool:
        return self.compare(x, y) is Cmp.LT

    def elements(self) -> Iterator[Code]:
        return iter(self._enumeration)

    def prefix(self, n: int) -> List[Code]:
        return self._enumeration.prefix(n)

    def element_at(self, i: int) -> Optional[Code]:
        return self._enumeration.get(i)

    def index_of(self, x: Code, limit: Optional[int] = None) -> Optional[int]:
        """Position of x in the enumeration"""
        if not self.contains(x):
            return None
        return self._enumeration.index_of(x, limit)

    def sort(self, codes: Iterable[Code]) -> List[Code]:
        return sorted(codes, key=cmp_to_key(lambda x, y: _SIGN[self.compare(x, y)]))

    def ordinal_of(self, x: Code) -> Optional[Ordinal]:
        """Order type of the initial segment below x, when known"""
        return None

    def element_at_ordinal(self, beta: Ordinal) -> Optional[Code]:
        """Inverse of ordinal_of"""
        return None

    def descending_chain(self, depth: int, meter: BudgetMeter) -> SearchResult[List[Code]]:
        if self.size is not None:
            if self.size < depth:
                return SearchResult(SearchStatus.NONE, spent=meter.spent)
            meter.spend(self.size)
            top = list(reversed(self.sort(self.prefix(self.size))))
            return SearchResult(SearchStatus.FOUND, top[:depth], meter.spent)
        return enumeration_chain(self, depth, meter)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.expr})"


def _descending_subsequence(
    order: LinearOrder, items: List[Code], depth: int, meter: BudgetMeter
) -> Optional[List[Code]]:
    """Lexicographically least (by position) descending subsequence of length depth"""
    n = len(items)
    longest = [1] * n
    for i in reversed(range(n)):
        for j in range(i + 1, n):
            if longest[i] >= depth:
                break
            if longest[j] + 1 <= longest[i]:
                continue
            if not meter.spend():
                return None
            if order.compare(items[j], items[i]) is Cmp.LT:
                longest[i] = longest[j] + 1
    chain: List[Code] = []
    for i in range(n):
        need = depth - len(chain)
        if longest[i] >= need and (not chain or order.less(items[i], chain[-1])):
            chain.append(items[i])
            if len(chain) == depth:
                return chain
    return None


def enumeration_chain(
    order: LinearOrder, depth: int, meter: BudgetMeter
) -> SearchResult[List[Code]]:
    """Descending chain whose elements also appear in enumeration order"""
    window = max(depth, 8)
    while True:
        items = order.prefix(window)
        if not meter.spend(len(items)):
            return SearchResult(SearchStatus.BUDGET_EXHAUSTED, spent=meter.spent)
        chain = _descending_subsequence(order, items, depth, meter)
        if chain is not None:
            return SearchResult(SearchStatus.FOUND, chain, meter.spent)
        if meter.exhausted:
            return SearchResult(SearchStatus.BUDGET_EXHAUSTED, spent=meter.spent)
        if len(items) < window:
            return SearchResult(SearchStatus.NONE, spent=meter.spent)
        window *= 2


class FiniteOrder(LinearOrder):
    """fin:[c0,c1,...]: the listed codes in ascending order.

    `enumeration` lets the enumeration differ from the ranking.
    """

    wellfounded = True

    def __init__(self, ranking: Sequence[int], enumeration: Optional[Sequence[int]] = None):
        self.ranking = tuple(ranking)
        if not all(_natural(c) for c in self.ranking):
            raise ValueError(f"finite order codes must be naturals: {list(self.ranking)}")
        if len(set(self.ranking)) != len(self.ranking):
            raise ValueError(f"duplicate code in finite order: {list(self.ranking)}")
        self._rank: Dict[int, int] = {c: i for i, c in enumerate(self.ranking)}
        self.enumeration = tuple(enumeration) if enumeration is not None else self.ranking
        if len(self.enumeration) != len(self.ranking) or set(self.enumeration) != set(
            self.ranking
        ):
            raise ValueError("enumeration must list every code exactly once")
        super().__init__()

    @property
    def expr(self) -> str:
        return "fin:[" + ",".join(str(c) for c in self.ranking) + "]"

    def _enumerate(self) -> Iterator[Code]:
        return iter(self.enumeration)

    def _compare(self, x: Code, y: Code) -> Cmp:
        return Cmp.of(self._rank[x], self._rank[y])

    def contains(self, x: Code) -> bool:
        return _natural(x) and x in self._rank

    @property
    def size(self) -> Optional[int]:
        return len(self.ranking)

    @property
    def order_type(self) -> Optional[Ordinal]:
        return Ordinal.from_int(len(self.ranking))

    def rank(self, x: Code) -> int:
        if not self.contains(x):
            raise UnknownElementError(f"{x!r} is not an element of {self.expr}")
        return self._rank[x]

    def ordinal_of(self, x: Code) -> Optional[Ordinal]:
        return Ordinal.from_int(self.rank(x))

    def element_at_ordinal(self, beta: Ordinal) -> Optional[Code]:
        if beta.is_finite and beta.as_int < len(self.ranking):
            return self.ranking[beta.as_int]
        return None


def finite_order(n: int) -> FiniteOrder:
    """The n-element chain 0 < 1 < ... < n-1"""
    return FiniteOrder(range(n))


class OmegaStar(LinearOrder):
    """ws: codes 0, 1, 2, ... with k+1 below k"""

    wellfounded = False

    @property
    def expr(self) -> str:
        return "ws"

    def _enumerate(self) -> Iterator[Code]:
        return count()

    def _compare(self, x: Code, y: Code) -> Cmp:
        return Cmp.of(y, x)

    def contains(self, x: Code) -> bool:
        return _natural(x)

    def index_of(self, x: Code, limit: Optional[int] = None) -> Optional[int]:
        return x if self.contains(x) else None

    def element_at(self, i: int) -> Optional[Code]:
        return i

    def descending_chain(self, depth: int, meter: BudgetMeter) -> SearchResult[List[Code]]:
        if not meter.spend(depth):
            return SearchResult(SearchStatus.BUDGET_EXHAUSTED, spent=meter.spent)
        return SearchResult(SearchStatus.FOUND, list(range(depth)), meter.spent)


class CnfOrder(LinearOrder):
    """cnf:<alpha>: the ordinals below alpha, coded by their notations"""

    wellfounded = True

    def __init__(self, bound: Ordinal):
        self.bound = bound
        super().__init__()

    @property
    def expr(self) -> str:
        return f"cnf:{self.bound}"

    def _enumerate(self) -> Iterator[Code]:
        return ordinals_below(self.bound)

    def _compare(self, x: Code, y: Code) -> Cmp:
        return cnf_compare(x, y)

    def contains(self, x: Code) -> bool:
        return isinstance(x, Ordinal) and x < self.bound

    @property
    def size(self) -> Optional[int]:
        return self.bound.as_int if self.bound.is_finite else None

    @property
    def order_type(self) -> Optional[Ordinal]:
        return self.bound

    def ordinal_of(self, x: Code) -> Optional[Ordinal]:
        if not self.contains(x):
            raise UnknownElementError(f"{x!r} is not an element of {self.expr}")
        return x

    def element_at_ordinal(self, beta: Ordinal) -> Optional[Code]:
        return beta if beta < self.bound else None


class SumOrder(LinearOrder):
    """Ordered sum: codes (i, x) with every block i below block i+1"""

    def __init__(self, parts: Sequence[LinearOrder]):
        self.parts = tuple(parts)
        flags = [p.wellfounded for p in self.parts]
        if all(flag is True for flag in flags):
            self.wellfounded = True
        elif any(flag is False for flag in flags):
            self.wellfounded = False
        else:
            self.wellfounded = None
        super().__init__()

    @property
    def expr(self) -> str:
        if not self.parts:
            return "fin:[]"
        if len(self.parts) == 1:
            return f"sum({self.parts[0].expr},fin:[])"
        text = self.parts[-1].expr
        for part in reversed(self.parts[:-1]):
            text = f"sum({part.expr},{text})"
        return text

    def _enumerate(self) -> Iterator[Code]:
        streams = [part.elements() for part in self.parts]
        active = list(range(len(streams)))
        while active:
            for i in list(active):
                try:
                    x = next(streams[i])
                except StopIteration:
                    active.remove(i)
                    continue
                yield (i, x)

    def _compare(self, x: Code, y: Code) -> Cmp:
        if x[0] != y[0]:
            return Cmp.of(x[0], y[0])
        return self.parts[x[0]].compare(x[1], y[1])

    def contains(self, x: Code) -> bool:
        return (
            isinstance(x, tuple)
            and len(x) == 2
            and _natural(x[0])
            and x[0] < len(self.parts)
            and self.parts[x[0]].contains(x[1])
        )

    @property
    def size(self) -> Optional[int]:
        sizes = [part.size for part in self.parts]
        return None if any(s is None for s in sizes) else sum(sizes)

    @property
    def order_type(self) -> Optional[Ordinal]:
        total = ZERO
        for part in self.parts:
            if part.order_type is None:
                return None
            total = cnf_add(total, part.order_type)
        return total

    def _offset(self, i: int) -> Optional[Ordinal]:
        total = ZERO
        for part in self.parts[:i]:
            if part.order_type is None:
                return None
            total = cnf_add(total, part.order_type)
        return total

    def ordinal_of(self, x: Code) -> Optional[Ordinal]:
        offset = self._offset(x[0])
        inner = self.parts[x[0]].ordinal_of(x[1])
        if offset is None or inner is None:
            return None
        return cnf_add(offset, inner)

    def element_at_ordinal(self, beta: Ordinal) -> Optional[Code]:
        offset = ZERO
        for i, part in enumerate(self.parts):
            kind = part.order_type
            if kind is None:
                return None
            end = cnf_add(offset, kind)
            if beta < end:
                inner = part.element_at_ordinal(cnf_difference(offset, beta))
                return None if inner is None else (i, inner)
            offset = end
        return None


class KbOrder(LinearOrder):
    """Kleene-Brouwer order of a tree; codes are the nodes"""

    def __init__(self, tree: Tree):
        self.tree = tree
        self.wellfounded = tree.wellfounded
        super().__init__()

    @property
    def expr(self) -> str:
        if self.tree.expr:
            return self.tree.expr
        raise ValueError("tree has no printable expression")

    def _enumerate(self) -> Iterator[Code]:
        return self.tree.nodes()

    def _compare(self, x: Code, y: Code) -> Cmp:
        return kb_compare(x, y)

    def contains(self, x: Code) -> bool:
        return isinstance(x, tuple) and self.tree.contains(x)

    @property
    def size(self) -> Optional[int]:
        return self.tree.size

    def descending_chain(self, depth: int, meter: BudgetMeter) -> SearchResult[List[Code]]:
        return find_branch(self.tree, depth, meter)


class DescendingTree(Tree):
    """Strictly descending sequences through b, as b-enumeration indices"""

    def __init__(self, b: LinearOrder):
        self.b = b
        self.wellfounded = b.wellfounded
        self.expr = f"desc({b.expr})"

    def contains(self, node: Node) -> bool:
        previous = None
        for label in node:
            if not _natural(label):
                return False
            x = self.b.element_at(label)
            if x is None or (previous is not None and not self.b.less(x, previous)):
                return False
            previous = x
        return True

    def _below_last(self, node: Node, bound: int) -> List[int]:
        last = self.b.element_at(node[-1]) if node else None
        found = []
        for j in range(bound):
            y = self.b.element_at(j)
            if y is None:
                break
            if last is None or self.b.less(y, last):
                found.append(j)
        return found

    def children(self, node: Node, bound: int) -> List[Node]:
        return [node + (j,) for j in self._below_last(node, bound)]

    def child_bound(self, node: Node) -> Optional[int]:
        size = self.b.size
        if size is None:
            return None
        return size if self._below_last(node, size) else 0

    @property
    def size(self) -> Optional[int]:
        return None if self.b.size is None else sum(1 for _ in self.nodes())


class DisjTree(Tree):
    """Equal-length pairs of strictly descending sequences through a and b.

    Labels are pairs (i, j) of enumeration indices; siblings compare
    lexicographically.
    """

    def __init__(self, a: LinearOrder, b: LinearOrder):
        self.a = a
        self.b = b
        if a.wellfounded is True or b.wellfounded is True:
            self.wellfounded = True
        elif a.wellfounded is False and b.wellfounded is False:
            self.wellfounded = False
        else:
            self.wellfounded = None
        self.expr = f"disj({a.expr},{b.expr})"

    def contains(self, node: Node) -> bool:
        previous = None
        for label in node:
            if not (
                isinstance(label, tuple)
                and len(label) == 2
                and _natural(label[0])
                and _natural(label[1])
            ):
                return False
            x, y = self.a.element_at(label[0]), self.b.element_at(label[1])
            if x is None or y is None:
                return False
            if previous is not None and not (
                self.a.less(x, previous[0]) and self.b.less(y, previous[1])
            ):
                return False
            previous = (x, y)
        return True

    @staticmethod
    def _candidates(order: LinearOrder, last: Optional[Code], bound: int) -> List[int]:
        found = []
        for i in range(bound):
            x = order.element_at(i)
            if x is None:
                break
            if last is None or order.less(x, last):
                found.append(i)
        return found

    def _lasts(self, node: Node):
        if not node:
            return None, None
        i, j = node[-1]
        return self.a.element_at(i), self.b.element_at(j)

    def children(self, node: Node, bound: int) -> List[Node]:
        last_a, last_b = self._lasts(node)
        left = self._candidates(self.a, last_a, bound)
        right = self._candidates(self.b, last_b, bound)
        return [node + ((i, j),) for i in left for j in right if i + j < bound]

    def child_bound(self, node: Node) -> Optional[int]:
        last_a, last_b = self._lasts(node)
        sizes = []
        for order, last in ((self.a, last_a), (self.b, last_b)):
            if order.size is not None:
                if not self._candidates(order, last, order.size):
                    return 0
                sizes.append(order.size)
        return sum(sizes) if len(sizes) == 2 else None

    @property
    def size(self) -> Optional[int]:
        if self.a.size is None or self.b.size is None:
            return None
        return sum(1 for _ in self.nodes())


class DisjOrder(KbOrder):
    """disj(a,b): wellfounded when either argument is, illfounded when both are"""

    def __init__(self, a: LinearOrder, b: LinearOrder):
        self.a = a
        self.b = b
        super().__init__(DisjTree(a, b))


class OrderEmbedding:
    """Strictly increasing map between linear orders, computed on demand"""

    def __init__(
        self,
        source: LinearOrder,
        target: LinearOrder,
        fn: Callable[[Code], Code],
        label: Optional[str] = None,
    ):
        self.source = source
        self.target = target
        self._fn = fn
        self.label = label
        self._memo: Dict[Code, Code] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_mapping(
        cls, source: LinearOrder, target: LinearOrder, mapping: Dict[Code, Code]
    ) -> "OrderEmbedding":
        def lookup(x: Code) -> Code:
            if x not in mapping:
                raise UnknownElementError(f"embedding is undefined at {x!r}")
            return mapping[x]

        embedding = cls(source, target, lookup)
        embedding._memo.update(mapping)
        return embedding

    def __call__(self, x: Code) -> Code:
        if x in self._memo:
            return self._memo[x]
        if not self.source.contains(x):
            raise UnknownElementError(f"{x!r} is not an element of {self.source.expr}")
        value = self._fn(x)
        with self._lock:
            self._memo.setdefault(x, value)
        return value

    def pairs(self, n: int) -> List[Tuple[Code, Code]]:
        return [(x, self(x)) for x in self.source.prefix(n)]

    def violation(self, n: int) -> Optional[Tuple[Code, Code]]:
        """First pair among the first n source elements that is not preserved"""
        domain = self.source.prefix(n)
        images = [self(x) for x in domain]
        for x, fx in zip(domain, images):
            if not self.target.contains(fx):
                return (x, x)
        for (x, fx), (y, fy) in combinations(zip(domain, images), 2):
            if self.source.compare(x, y) is not self.target.compare(fx, fy):
                return (x, y)
        return None

    def then(self, after: "OrderEmbedding") -> "OrderEmbedding":
        """after . self"""
        return OrderEmbedding(self.source, after.target, lambda x: after(self(x)))


def increasing_maps(n: int, m: int) -> Iterator[Tuple[int, ...]]:
    """All strictly increasing maps {0..n-1} -> {0..m-1}, as image tuples"""
    return combinations(range(m), n)


def compare(order: LinearOrder, x: Code, y: Code) -> Cmp:
    return order.compare(x, y)


def kb_order(tree: Tree) -> KbOrder:
    return KbOrder(tree)


def sum_orders(a: LinearOrder, b: LinearOrder) -> SumOrder:
    return SumOrder((a, b))


def disj_order(a: LinearOrder, b: LinearOrder) -> DisjOrder:
    return DisjOrder(a, b)


def find_descending_chain(
    order: LinearOrder, depth: int, budget: Optional[SearchBudget] = None
) -> SearchResult[List[Code]]:
    """Semi-decide ill-foundedness by a chain of `depth` strictly descending codes.

    Kleene-Brouwer orders answer with nested branches from the root; other
    orders with a chain that descends along the enumeration. A missing chain
    says nothing about wellfoundedness.
    """
    if depth < 1:
        raise ValueError(f"depth must be positive, got {depth}")
    meter = (budget or SearchBudget()).meter()
    result = order.descending_chain(depth, meter)
    logger.info(f"Chain search in {order.expr} (depth {depth}): {result.status.value}")
    return result


def find_embedding(
    a: LinearOrder, x: LinearOrder, budget: Optional[SearchBudget] = None
) -> SearchResult[OrderEmbedding]:
    """Embed a finite order into x; the lexicographically least map when x.size is known.

    A target of unknown size is read through its enumeration, so one that
    runs out before |a| elements is a definite NONE.
    """
    if a.size is None:
        raise ValueError(f"find_embedding needs a finite source, got {a.expr}")
    meter = (budget or SearchBudget()).meter()
    k = a.size
    domain = a.sort(a.prefix(k))
    if x.size is not None:
        if x.size < k:
            return SearchResult(SearchStatus.NONE, spent=meter.spent)
        if not meter.spend(x.size):
            return SearchResult(SearchStatus.BUDGET_EXHAUSTED, spent=meter.spent)
        image = x.sort(x.prefix(x.size))[:k]
    else:
        if not meter.spend(k):
            return SearchResult(SearchStatus.BUDGET_EXHAUSTED, spent=meter.spent)
        image = x.sort(x.prefix(k))
        if len(image) < k:
            return SearchResult(SearchStatus.NONE, spent=meter.spent)
    embedding = OrderEmbedding.from_mapping(a, x, dict(zip(domain, image)))
    return SearchResult(SearchStatus.FOUND, embedding, meter.spent)


def embeds_into(a: LinearOrder, x: LinearOrder) -> Optional[bool]:
    """Decide whether a embeds into x where sizes or types settle it; None otherwise"""
    if a.size is not None:
        if x.size is not None:
            return a.size <= x.size
        return len(x.prefix(a.size)) == a.size
    if x.size is not None:
        return len(a.prefix(x.size + 1)) <= x.size
    if a.wellfounded is False and x.wellfounded is True:
        return False
    if a.wellfounded is True and x.wellfounded is True:
        if a.order_type is not None and x.order_type is not None:
            return a.order_type <= x.order_type
    return None


def full_embedding(a: LinearOrder, x: LinearOrder) -> Optional[OrderEmbedding]:
    """An embedding of all of a into x, when one can be written down"""
    if a.size is not None:
        result = find_embedding(a, x)
        return result.value
    if embeds_into(a, x) is not True:
        return None
    probe = a.element_at(0)
    if probe is None or a.ordinal_of(probe) is None:
        return None
    if x.element_at_ordinal(a.ordinal_of(probe)) is None:
        return None

    def through_types(v: Code) -> Code:
        return x.element_at_ordinal(a.ordinal_of(v))

    return OrderEmbedding(a, x, through_types, label="order-type embedding")


class _DescendingNodes:
    """e(b_i): b_i alone if it is the maximum so far, else e(b_l) extended by i,
    where b_l is the least earlier element above b_i"""

    def __init__(self, b: LinearOrder):
        self.b = b
        self.nodes: List[Node] = []
        self._lock = threading.Lock()

    def node(self, i: int) -> Node:
        with self._lock:
            while len(self.nodes) <= i:
                k = len(self.nodes)
                x = self.b.element_at(k)
                above = [j for j in range(k) if self.b.less(x, self.b.element_at(j))]
                if not above:
                    self.nodes.append((k,))
                else:
                    least = above[0]
                    for j in above[1:]:
                        if self.b.less(self.b.element_at(j), self.b.element_at(least)):
                            least = j
                    self.nodes.append(self.nodes[least] + (k,))
            return self.nodes[i]


def descending_embedding(b: LinearOrder) -> OrderEmbedding:
    """Embed b into the KB order of its own tree of descending sequences"""
    nodes = _DescendingNodes(b)
    target = KbOrder(DescendingTree(b))
    return OrderEmbedding(
        b, target, lambda x: nodes.node(b.index_of(x)), label="descending-node embedding"
    )


def embed_into_disj(
    source: LinearOrder,
    other: LinearOrder,
    source_first: bool = True,
    budget: Optional[SearchBudget] = None,
) -> OrderEmbedding:
    """Embed source into disj(source, other) (or disj(other, source)) along a
    descending spine of the illfounded order `other`"""
    spine: List[int] = []
    desc = descending_embedding(source)
    target = DisjOrder(source, other) if source_first else DisjOrder(other, source)

    def spine_of(length: int) -> List[int]:
        if len(spine) < length:
            wanted = max(length, source.size or 0, 2 * len(spine))
            found = other.descending_chain(wanted, (budget or SearchBudget()).meter())
            if not found.found:
                raise ValueError(f"{other.expr} has no descending chain of length {wanted}")
            indices = [other.index_of(c) for c in found.value]
            if indices[: len(spine)] != spine:
                raise ValueError(f"descending chains of {other.expr} are not nested")
            spine[:] = indices
        return spine[:length]

    def image(x: Code) -> Code:
        path = desc(x)
        rail = spine_of(len(path))
        return tuple(zip(path, rail)) if source_first else tuple(zip(rail, path))

    return OrderEmbedding(source, target, image, label="disjunction embedding")
