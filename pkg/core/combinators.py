"""
Built-in denotation systems
Identity, constants, the w^x system, implication dilators, finite and w-sums,
certified sums, composition and explicit pattern tables.
"""

import logging
import threading
import weakref
from itertools import count, islice
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

from core.budget import BudgetMeter
from core.dilator import (
    Denotation,
    DenotationSystem,
    EvaluatedOrder,
    FlatSystem,
    MergePattern,
    NatTransApprox,
    pattern_colex,
)
from core.errors import FixtureError, PatternInconsistencyError, StreamExhaustedError
from core.linord import (
    Code,
    DescendingTree,
    LinearOrder,
    OrderEmbedding,
    descending_embedding,
    embeds_into,
    full_embedding,
)
from core.models import Cmp, SearchResult, SearchStatus
from core.ordinals import ZERO, Ordinal, cnf_add, cnf_difference, cnf_omega_pow
from core.trees import Node, find_branch

logger = logging.getLogger(__name__)


def _negate(flag: Optional[bool]) -> Optional[bool]:
    return None if flag is None else not flag


class IdentitySystem(FlatSystem):
    """id: one unary term, compared by its argument"""

    TERM = "id"

    @property
    def expr(self) -> str:
        return "id"

    def _enumerate_terms(self, max_arity: Optional[int]) -> Iterator[Hashable]:
        if max_arity is None or max_arity >= 1:
            yield self.TERM

    def arity(self, term: Hashable) -> int:
        return 1

    def is_term(self, term: Hashable) -> bool:
        return term == self.TERM

    def pattern_compare(self, t: Hashable, s: Hashable, pattern: MergePattern) -> Cmp:
        return Cmp.of(pattern.left[0], pattern.right[0])

    def finitely_many_terms(self, max_arity: Optional[int]) -> bool:
        return True

    def ill_founded_at(self, X: LinearOrder) -> Optional[bool]:
        return _negate(X.wellfounded)

    def value_type(self, X: LinearOrder) -> Optional[Ordinal]:
        return X.order_type

    def ordinal_of(self, d: Code, X: LinearOrder) -> Optional[Ordinal]:
        return X.ordinal_of(d.args[0])

    def element_at_ordinal(self, beta: Ordinal, X: LinearOrder) -> Optional[Code]:
        x = X.element_at_ordinal(beta)
        return None if x is None else Denotation(self.TERM, (x,))

    def witness_chain(self, X: LinearOrder, depth: int, meter: BudgetMeter) -> Optional[List[Code]]:
        found = X.descending_chain(depth, meter)
        if not found.found:
            return None
        return [Denotation(self.TERM, (x,)) for x in found.value]


class ConstantSystem(FlatSystem):
    """const(a): one nullary term per element of a"""

    def __init__(self, a: LinearOrder):
        super().__init__()
        self.a = a

    @property
    def expr(self) -> str:
        return f"const({self.a.expr})"

    def _enumerate_terms(self, max_arity: Optional[int]) -> Iterator[Hashable]:
        return self.a.elements()

    def arity(self, term: Hashable) -> int:
        return 0

    def is_term(self, term: Hashable) -> bool:
        return self.a.contains(term)

    def pattern_compare(self, t: Hashable, s: Hashable, pattern: MergePattern) -> Cmp:
        return self.a.compare(t, s)

    def finitely_many_terms(self, max_arity: Optional[int]) -> bool:
        return self.a.size is not None

    def ill_founded_at(self, X: LinearOrder) -> Optional[bool]:
        return _negate(self.a.wellfounded)

    def value_type(self, X: LinearOrder) -> Optional[Ordinal]:
        return self.a.order_type

    def ordinal_of(self, d: Code, X: LinearOrder) -> Optional[Ordinal]:
        return self.a.ordinal_of(d.term)

    def element_at_ordinal(self, beta: Ordinal, X: LinearOrder) -> Optional[Code]:
        x = self.a.element_at_ordinal(beta)
        return None if x is None else Denotation(x, ())

    def witness_chain(self, X: LinearOrder, depth: int, meter: BudgetMeter) -> Optional[List[Code]]:
        found = self.a.descending_chain(depth, meter)
        if not found.found:
            return None
        return [Denotation(x, ()) for x in found.value]


def _compositions(total: int, max_parts: Optional[int] = None) -> Iterator[Tuple[int, ...]]:
    """Tuples of at most max_parts positive ints summing to total"""
    if total == 0:
        yield ()
        return
    if max_parts == 0:
        return
    rest_parts = None if max_parts is None else max_parts - 1
    for first in range(1, total + 1):
        for rest in _compositions(total - first, rest_parts):
            yield (first,) + rest


class ExpOmegaSystem(FlatSystem):
    """expw: x |-> w^x. A term lists the CNF coefficients of its arguments,
    in increasing order of the arguments"""

    @property
    def expr(self) -> str:
        return "expw"

    def _enumerate_terms(self, max_arity: Optional[int]) -> Iterator[Hashable]:
        for total in count():
            yield from _compositions(total, max_arity)
            if max_arity == 0:
                return

    def arity(self, term: Hashable) -> int:
        return len(term)

    def is_term(self, term: Hashable) -> bool:
        return isinstance(term, tuple) and all(
            isinstance(c, int) and not isinstance(c, bool) and c > 0 for c in term
        )

    def pattern_compare(self, t: Hashable, s: Hashable, pattern: MergePattern) -> Cmp:
        left = dict(zip(pattern.left, t))
        right = dict(zip(pattern.right, s))
        for rank in reversed(range(pattern.width)):
            x, y = left.get(rank, 0), right.get(rank, 0)
            if x != y:
                return Cmp.of(x, y)
        return Cmp.EQ

    def finitely_many_terms(self, max_arity: Optional[int]) -> bool:
        return max_arity == 0

    def ill_founded_at(self, X: LinearOrder) -> Optional[bool]:
        return _negate(X.wellfounded)

    def value_type(self, X: LinearOrder) -> Optional[Ordinal]:
        return None if X.order_type is None else cnf_omega_pow(X.order_type)

    def ordinal_of(self, d: Code, X: LinearOrder) -> Optional[Ordinal]:
        total = ZERO
        for x, c in reversed(list(zip(d.args, d.term))):
            exponent = X.ordinal_of(x)
            if exponent is None:
                return None
            total = cnf_add(total, Ordinal(((exponent, c),)))
        return total

    def element_at_ordinal(self, beta: Ordinal, X: LinearOrder) -> Optional[Code]:
        args, coefficients = [], []
        for exponent, c in reversed(beta.terms):
            x = X.element_at_ordinal(exponent)
            if x is None:
                return None
            args.append(x)
            coefficients.append(c)
        return Denotation(tuple(coefficients), tuple(args))

    def witness_chain(self, X: LinearOrder, depth: int, meter: BudgetMeter) -> Optional[List[Code]]:
        found = X.descending_chain(depth, meter)
        if not found.found:
            return None
        return [Denotation((1,), (x,)) for x in found.value]


class ImplicationSystem(FlatSystem):
    """impl(a,b): x |-> KB order of the tree of attempts to build a descending
    f: w -> b together with an embedding g: a -> x.

    A node <n, f, g> is the term (n, f), f listing b-enumeration indices, with
    the g-images of a_0..a_{k-1} (k = min(n, |a|)) as sorted arguments.
    """

    def __init__(self, a: LinearOrder, b: LinearOrder):
        super().__init__()
        self.a = a
        self.b = b
        self.descending = DescendingTree(b)
        self._ranks: Dict[int, Tuple[int, ...]] = {}
        self._ranks_lock = threading.Lock()

    @property
    def expr(self) -> str:
        return f"impl({self.a.expr},{self.b.expr})"

    def ranks(self, k: int) -> Tuple[int, ...]:
        """Position of a_i among a_0..a_{k-1}, for i < k"""
        with self._ranks_lock:
            if k not in self._ranks:
                first = self.a.prefix(k)
                ordered = self.a.sort(first)
                self._ranks[k] = tuple(ordered.index(x) for x in first)
            return self._ranks[k]

    def _length_cap(self, max_arity: Optional[int]) -> Optional[int]:
        if max_arity is None:
            return None
        if self.a.size is not None and self.a.size <= max_arity:
            return None
        return max_arity

    def _enumerate_terms(self, max_arity: Optional[int]) -> Iterator[Hashable]:
        cap = self._length_cap(max_arity)
        seen = set()
        for bound in count(1):
            limit = bound if cap is None else min(cap, bound)
            stack: List[Node] = [()]
            while stack:
                node = stack.pop()
                if node not in seen:
                    seen.add(node)
                    yield (len(node), node)
                if len(node) < limit:
                    stack.extend(reversed(self.descending.children(node, bound)))
            if cap == 0 or (self.b.size is not None and bound >= self.b.size):
                return

    def arity(self, term: Hashable) -> int:
        n = term[0]
        return n if self.a.size is None else min(n, self.a.size)

    def is_term(self, term: Hashable) -> bool:
        if not isinstance(term, tuple) or len(term) != 2:
            return False
        n, f = term
        return (
            isinstance(n, int)
            and isinstance(f, tuple)
            and len(f) == n
            and self.descending.contains(f)
        )

    def pattern_compare(self, t: Hashable, s: Hashable, pattern: MergePattern) -> Cmp:
        (n1, f1), (n2, f2) = t, s
        k1, k2 = self.arity(t), self.arity(s)
        r1, r2 = self.ranks(k1), self.ranks(k2)
        for i in range(min(n1, n2)):
            if f1[i] != f2[i]:
                return Cmp.of(f1[i], f2[i])
            if i < k1 and i < k2:
                x, y = pattern.left[r1[i]], pattern.right[r2[i]]
                if x != y:
                    return Cmp.of(x, y)
        return Cmp.of(n2, n1)

    def finitely_many_terms(self, max_arity: Optional[int]) -> bool:
        return self._length_cap(max_arity) == 0 or self.b.size is not None

    def ill_founded_at(self, X: LinearOrder) -> Optional[bool]:
        if self.b.wellfounded is True:
            return False
        embeds = embeds_into(self.a, X)
        if self.b.wellfounded is False:
            return embeds
        if embeds is False:
            return False
        return super().ill_founded_at(X)

    def node(self, f: Tuple[int, ...], images: Sequence[Code], X: LinearOrder) -> Denotation:
        """<len f, f, g> where images[i] = g(a_i)"""
        k = self.arity((len(f), f))
        return Denotation((len(f), tuple(f)), tuple(X.sort(images[:k])))

    def witness_chain(self, X: LinearOrder, depth: int, meter: BudgetMeter) -> Optional[List[Code]]:
        u = full_embedding(self.a, X)
        if u is None:
            return None
        steps = depth - 1
        f: Tuple[int, ...] = ()
        if steps > 0:
            found = self.b.descending_chain(steps, meter)
            if not found.found:
                return None
            f = tuple(self.b.index_of(c) for c in found.value)
        k = steps if self.a.size is None else min(steps, self.a.size)
        images = [u(x) for x in self.a.prefix(k)]
        return [self.node(f[:n], images, X) for n in range(depth)]

    def descending_branch(
        self, X: LinearOrder, depth: int, meter: BudgetMeter
    ) -> Optional[SearchResult[List[Code]]]:
        # f and g are independent: a descending f of length depth-1 in b, and
        # any k = min(depth-1, |a|) elements of x for the images of a_0..a_{k-1}
        found = find_branch(self.descending, depth, meter)
        if not found.found:
            return found
        f = found.value[-1]
        k = len(f) if self.a.size is None else min(len(f), self.a.size)
        if X.size is not None and X.size < k:
            return SearchResult(SearchStatus.NONE, spent=meter.spent)
        pool = X.sort(X.prefix(k))
        images = [pool[r] for r in self.ranks(k)]
        chain = [self.node(f[:n], images, X) for n in range(depth)]
        return SearchResult(SearchStatus.FOUND, chain, meter.spent)


def lift_descending_node(
    system: ImplicationSystem, node: Node, u: OrderEmbedding
) -> Denotation:
    """<n, f, empty> |-> <n, f, u restricted to n>"""
    k = system.arity((len(node), tuple(node)))
    images = [u(x) for x in system.a.prefix(k)]
    return system.node(tuple(node), images, u.target)


def embed_into_implication(b: LinearOrder, a: LinearOrder) -> OrderEmbedding:
    """Embed b into impl(a,b) evaluated at a, through the descending nodes e(b_i)
    and the identity on a"""
    system = ImplicationSystem(a, b)
    target = EvaluatedOrder(system, a)
    nodes = descending_embedding(b)
    identity = OrderEmbedding(a, a, lambda x: x, label="identity")
    return OrderEmbedding(
        b,
        target,
        lambda x: lift_descending_node(system, nodes(x), identity),
        label="implication embedding",
    )


class SumSystem(DenotationSystem):
    """Block sum: every denotation of part i lies below every one of part i+1"""

    def __init__(self, parts: Sequence[DenotationSystem], label: Optional[str] = None):
        self.parts = tuple(parts)
        self._label = label

    @property
    def expr(self) -> str:
        if self._label:
            return self._label
        if not self.parts:
            return "const(fin:[])"
        if len(self.parts) == 1:
            return f"sum({self.parts[0].expr},const(fin:[]))"
        text = self.parts[-1].expr
        for part in reversed(self.parts[:-1]):
            text = f"sum({part.expr},{text})"
        return text

    def _tag(self, d: Denotation) -> int:
        return d.term[0]

    def inject(self, i: int, d: Denotation) -> Denotation:
        return Denotation((i, d.term), d.args)

    def project(self, d: Denotation) -> Denotation:
        return Denotation(d.term[-1], d.args)

    def _well_tagged(self, d: Code) -> bool:
        if not isinstance(d, Denotation) or not isinstance(d.term, tuple) or len(d.term) != 2:
            return False
        i = d.term[0]
        return isinstance(i, int) and 0 <= i < len(self.parts)

    def denotations(self, X: LinearOrder) -> Iterator[Code]:
        streams = [(i, part.denotations(X)) for i, part in enumerate(self.parts)]
        while streams:
            alive = []
            for i, stream in streams:
                d = next(stream, None)
                if d is not None:
                    yield self.inject(i, d)
                    alive.append((i, stream))
            streams = alive

    def contains(self, d: Code, X: LinearOrder) -> bool:
        if not self._well_tagged(d):
            return False
        return self.parts[self._tag(d)].contains(self.project(d), X)

    def compare(self, d: Code, e: Code, X: LinearOrder) -> Cmp:
        i, j = self._tag(d), self._tag(e)
        if i != j:
            return Cmp.of(i, j)
        return self.parts[i].compare(self.project(d), self.project(e), X)

    def fmap(self, d: Code, f: Callable[[Code], Code]) -> Code:
        i = self._tag(d)
        return self.inject(i, self.parts[i].fmap(self.project(d), f))

    def finitely_many(self, X: LinearOrder) -> bool:
        return all(part.finitely_many(X) for part in self.parts)

    def ill_founded_at(self, X: LinearOrder) -> Optional[bool]:
        flags = [part.ill_founded_at(X) for part in self.parts]
        if any(flag is True for flag in flags):
            return True
        if all(flag is False for flag in flags):
            return False
        return None

    def value_type(self, X: LinearOrder) -> Optional[Ordinal]:
        total = ZERO
        for part in self.parts:
            kind = part.value_type(X)
            if kind is None:
                return None
            total = cnf_add(total, kind)
        return total

    def _offset(self, i: int, X: LinearOrder) -> Optional[Ordinal]:
        total = ZERO
        for part in self.parts[:i]:
            kind = part.value_type(X)
            if kind is None:
                return None
            total = cnf_add(total, kind)
        return total

    def ordinal_of(self, d: Code, X: LinearOrder) -> Optional[Ordinal]:
        i = self._tag(d)
        offset = self._offset(i, X)
        inner = self.parts[i].ordinal_of(self.project(d), X)
        if offset is None or inner is None:
            return None
        return cnf_add(offset, inner)

    def element_at_ordinal(self, beta: Ordinal, X: LinearOrder) -> Optional[Code]:
        offset = ZERO
        for i, part in enumerate(self.parts):
            kind = part.value_type(X)
            if kind is None:
                return None
            end = cnf_add(offset, kind)
            if beta < end:
                inner = part.element_at_ordinal(cnf_difference(offset, beta), X)
                return None if inner is None else self.inject(i, inner)
            offset = end
        return None

    def witness_chain(self, X: LinearOrder, depth: int, meter: BudgetMeter) -> Optional[List[Code]]:
        for i, part in enumerate(self.parts):
            if part.ill_founded_at(X) is True:
                chain = part.witness_chain(X, depth, meter)
                if chain is not None:
                    return [self.inject(i, d) for d in chain]
        return None

    def descending_branch(
        self, X: LinearOrder, depth: int, meter: BudgetMeter
    ) -> Optional[SearchResult[List[Code]]]:
        last = None
        for i, part in enumerate(self.parts):
            found = part.descending_branch(X, depth, meter)
            if found is None:
                continue
            if found.found:
                return SearchResult(
                    SearchStatus.FOUND, [self.inject(i, d) for d in found.value], found.spent
                )
            last = found
        return last


class CertifiedSumSystem(SumSystem):
    """Sum whose terms carry the certificate of their summand: (i, p, t)"""

    def __init__(
        self, entries: Sequence[Tuple[DenotationSystem, bytes]], label: Optional[str] = None
    ):
        super().__init__([system for system, _ in entries], label=label)
        self.certificates = tuple(certificate for _, certificate in entries)

    @property
    def expr(self) -> str:
        if self._label:
            return self._label
        inner = ",".join(part.expr for part in self.parts)
        return f"rcopy[{inner}]"

    def inject(self, i: int, d: Denotation) -> Denotation:
        return Denotation((i, self.certificates[i], d.term), d.args)

    def _well_tagged(self, d: Code) -> bool:
        if not isinstance(d, Denotation) or not isinstance(d.term, tuple) or len(d.term) != 3:
            return False
        i = d.term[0]
        return (
            isinstance(i, int)
            and 0 <= i < len(self.parts)
            and d.term[1] == self.certificates[i]
        )


class ComposedSystem(DenotationSystem):
    """comp(D,F): X |-> D(F(X)), with denotations of D whose arguments are
    denotations of F"""

    def __init__(self, outer: DenotationSystem, inner: DenotationSystem):
        self.outer = outer
        self.inner = inner
        self._values: "weakref.WeakKeyDictionary[LinearOrder, EvaluatedOrder]" = (
            weakref.WeakKeyDictionary()
        )
        self._lock = threading.Lock()

    @property
    def expr(self) -> str:
        return f"comp({self.outer.expr},{self.inner.expr})"

    def inner_value(self, X: LinearOrder) -> EvaluatedOrder:
        with self._lock:
            if X not in self._values:
                self._values[X] = EvaluatedOrder(self.inner, X)
            return self._values[X]

    def denotations(self, X: LinearOrder) -> Iterator[Code]:
        return self.outer.denotations(self.inner_value(X))

    def contains(self, d: Code, X: LinearOrder) -> bool:
        return self.outer.contains(d, self.inner_value(X))

    def compare(self, d: Code, e: Code, X: LinearOrder) -> Cmp:
        return self.outer.compare(d, e, self.inner_value(X))

    def fmap(self, d: Code, f: Callable[[Code], Code]) -> Code:
        return self.outer.fmap(d, lambda y: self.inner.fmap(y, f))

    def finitely_many(self, X: LinearOrder) -> bool:
        return self.outer.finitely_many(self.inner_value(X))

    def ill_founded_at(self, X: LinearOrder) -> Optional[bool]:
        return self.outer.ill_founded_at(self.inner_value(X))

    def value_type(self, X: LinearOrder) -> Optional[Ordinal]:
        return self.outer.value_type(self.inner_value(X))

    def ordinal_of(self, d: Code, X: LinearOrder) -> Optional[Ordinal]:
        return self.outer.ordinal_of(d, self.inner_value(X))

    def element_at_ordinal(self, beta: Ordinal, X: LinearOrder) -> Optional[Code]:
        return self.outer.element_at_ordinal(beta, self.inner_value(X))

    def witness_chain(self, X: LinearOrder, depth: int, meter: BudgetMeter) -> Optional[List[Code]]:
        return self.outer.witness_chain(self.inner_value(X), depth, meter)

    def descending_branch(
        self, X: LinearOrder, depth: int, meter: BudgetMeter
    ) -> Optional[SearchResult[List[Code]]]:
        return self.outer.descending_branch(self.inner_value(X), depth, meter)

    def isomorphism(self, X: LinearOrder) -> OrderEmbedding:
        """comp(D,F)(X) -> D(F(X)); denotations are nested, so codes carry over"""
        source = EvaluatedOrder(self, X)
        target = EvaluatedOrder(self.outer, self.inner_value(X))
        return OrderEmbedding(source, target, lambda d: d, label="nesting isomorphism")


class TableSystem(FlatSystem):
    """Finite denotation system given by a term list and a pattern table.

    Lookups try the entry for (t, s, pattern), then the mirrored entry. Pairs
    without an entry fall back to term order then colex on the pattern when the
    table asks for it, and are a pattern inconsistency otherwise.
    """

    def __init__(
        self,
        arities: Dict[str, int],
        entries: Dict[Tuple[str, str, Tuple[int, ...], Tuple[int, ...]], Cmp],
        fallback: Optional[str] = None,
        source: Optional[str] = None,
    ):
        super().__init__()
        self.arities = dict(arities)
        self.order = {name: i for i, name in enumerate(arities)}
        self.entries = dict(entries)
        self.fallback = fallback
        self.source = source

    @classmethod
    def from_json(cls, data: dict, source: Optional[str] = None) -> "TableSystem":
        where = source or "table"
        try:
            arities: Dict[str, int] = {}
            for item in data["terms"]:
                name, arity = str(item["name"]), int(item["arity"])
                if arity < 0 or name in arities:
                    raise ValueError(f"bad or repeated term {name!r}")
                arities[name] = arity
            fallback = data.get("fallback")
            if fallback not in (None, "colex"):
                raise ValueError(f"unknown fallback {fallback!r}")
            entries = {}
            for item in data.get("patterns", []):
                left, right = str(item["left"]), str(item["right"])
                if left not in arities or right not in arities:
                    raise ValueError(f"pattern names an unknown term: {left}, {right}")
                pattern = MergePattern(tuple(item["left_ranks"]), tuple(item["right_ranks"]))
                if len(pattern.left) != arities[left] or len(pattern.right) != arities[right]:
                    raise ValueError(f"pattern {pattern} does not fit {left} vs {right}")
                entries[(left, right, pattern.left, pattern.right)] = Cmp(item["result"])
        except (KeyError, TypeError, ValueError) as e:
            logger.error(f"Invalid pattern table {where}: {e}")
            raise FixtureError(f"invalid pattern table {where}: {e}") from e
        return cls(arities, entries, fallback=fallback, source=source)

    @property
    def expr(self) -> str:
        return f"table(@{self.source})" if self.source else "table(<inline>)"

    def _enumerate_terms(self, max_arity: Optional[int]) -> Iterator[Hashable]:
        for name, arity in self.arities.items():
            if max_arity is None or arity <= max_arity:
                yield name

    def arity(self, term: Hashable) -> int:
        return self.arities[term]

    def is_term(self, term: Hashable) -> bool:
        return isinstance(term, str) and term in self.arities

    def pattern_compare(self, t: Hashable, s: Hashable, pattern: MergePattern) -> Cmp:
        key = (t, s, pattern.left, pattern.right)
        if key in self.entries:
            return self.entries[key]
        mirrored = (s, t, pattern.right, pattern.left)
        if mirrored in self.entries:
            return self.entries[mirrored].flip()
        if self.fallback == "colex":
            if t != s:
                return Cmp.of(self.order[t], self.order[s])
            return pattern_colex(pattern)
        raise PatternInconsistencyError(f"{self.expr} has no entry for {t} vs {s} at pattern {pattern}")

    def finitely_many_terms(self, max_arity: Optional[int]) -> bool:
        return True


def identity_system() -> IdentitySystem:
    return IdentitySystem()


def constant(a: LinearOrder) -> ConstantSystem:
    return ConstantSystem(a)


def exp_omega() -> ExpOmegaSystem:
    return ExpOmegaSystem()


def implication_dilator(a: LinearOrder, b: LinearOrder) -> ImplicationSystem:
    return ImplicationSystem(a, b)


def sum_systems(d: DenotationSystem, e: DenotationSystem) -> SumSystem:
    return SumSystem((d, e))


def omega_sum(
    systems: Iterable[DenotationSystem], k: int, label: Optional[str] = None
) -> SumSystem:
    """The finite prefix sum of the first k systems of a stream"""
    if k < 0:
        raise ValueError(f"prefix length must be non-negative, got {k}")
    taken = list(islice(iter(systems), k))
    if len(taken) < k:
        raise StreamExhaustedError(f"stream has only {len(taken)} entries, {k} requested")
    return SumSystem(taken, label=label)


def compose(outer: DenotationSystem, inner: DenotationSystem) -> ComposedSystem:
    return ComposedSystem(outer, inner)


def recursive_copy(
    entries: Iterable[Tuple[DenotationSystem, bytes]], label: Optional[str] = None
) -> CertifiedSumSystem:
    """Certified sum; repeated systems keep the byte-least certificate at the
    position of their first occurrence"""
    kept: List[Tuple[DenotationSystem, bytes]] = []
    position: Dict[str, int] = {}
    for system, certificate in entries:
        key = system.expr
        if key in position:
            i = position[key]
            if certificate < kept[i][1]:
                kept[i] = (kept[i][0], certificate)
            continue
        position[key] = len(kept)
        kept.append((system, certificate))
    logger.debug(f"Certified sum over {len(kept)} distinct systems")
    return CertifiedSumSystem(kept, label=label)


def summand_inclusion(total: SumSystem, i: int) -> NatTransApprox:
    return NatTransApprox(
        total.parts[i],
        total,
        lambda n, d: total.inject(i, d),
        label=f"inclusion[{i}] into {total.expr}",
    )
