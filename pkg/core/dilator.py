"""
Pre-dilators as denotation systems
A system enumerates denotations over any linear order X and compares two of
them using only the relative position of their arguments. This module holds the
framework: denotations, merge patterns, evaluation, the functorial action, law
checking and natural transformations between systems.
"""

import logging
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from itertools import combinations, count
from typing import (
    Callable,
    Dict,
    Hashable,
    Iterator,
    List,
    Optional,
    Sequence,
    Tuple,
)

from config import DEFAULT_SAMPLE
from core.budget import BudgetMeter
from core.errors import ArityMismatchError, PatternInconsistencyError, UnknownElementError
from core.lazy import CachedEnumeration
from core.linord import (
    Code,
    LinearOrder,
    OrderEmbedding,
    finite_order,
    increasing_maps,
)
from core.models import Cmp, LawReport, SearchResult, SearchStatus
from core.ordinals import Ordinal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Denotation:
    """A term applied to arguments listed in increasing order"""

    term: Hashable
    args: Tuple[Code, ...] = ()


@dataclass(frozen=True)
class MergePattern:
    """Relative position of two argument tuples.

    left[i] is the rank of the i-th left argument in the merged order, right[j]
    likewise; ranks increase strictly within a side and may tie across sides.
    """

    left: Tuple[int, ...]
    right: Tuple[int, ...]

    def __post_init__(self):
        for side in (self.left, self.right):
            if any(x >= y for x, y in zip(side, side[1:])):
                raise ValueError(f"pattern side must increase strictly: {side}")
        used = set(self.left) | set(self.right)
        if used != set(range(len(used))):
            raise ValueError(f"pattern ranks must be 0..k-1: {self.left} / {self.right}")

    @property
    def width(self) -> int:
        return len(set(self.left) | set(self.right))

    def flip(self) -> "MergePattern":
        return MergePattern(self.right, self.left)

    def __str__(self) -> str:
        return f"{list(self.left)}|{list(self.right)}"


def merge_pattern(xs: Sequence[Code], ys: Sequence[Code], order: LinearOrder) -> MergePattern:
    left: List[int] = []
    right: List[int] = []
    i = j = rank = 0
    while i < len(xs) or j < len(ys):
        if j == len(ys):
            relation = Cmp.LT
        elif i == len(xs):
            relation = Cmp.GT
        else:
            relation = order.compare(xs[i], ys[j])
        if relation is not Cmp.GT:
            left.append(rank)
            i += 1
        if relation is not Cmp.LT:
            right.append(rank)
            j += 1
        rank += 1
    return MergePattern(tuple(left), tuple(right))


def pattern_colex(pattern: MergePattern) -> Cmp:
    """Compare two equal-arity argument tuples from the last position down"""
    for x, y in zip(reversed(pattern.left), reversed(pattern.right)):
        if x != y:
            return Cmp.of(x, y)
    return Cmp.of(len(pattern.left), len(pattern.right))


class DenotationSystem(ABC):
    """A pre-dilator presented by denotations"""

    @property
    @abstractmethod
    def expr(self) -> str: ...

    @abstractmethod
    def denotations(self, X: LinearOrder) -> Iterator[Code]: ...

    @abstractmethod
    def contains(self, d: Code, X: LinearOrder) -> bool: ...

    @abstractmethod
    def compare(self, d: Code, e: Code, X: LinearOrder) -> Cmp: ...

    @abstractmethod
    def fmap(self, d: Code, f: Callable[[Code], Code]) -> Code:
        """Transport d along f, applied to every argument"""

    @abstractmethod
    def finitely_many(self, X: LinearOrder) -> bool:
        """Whether D(X) is known to be finite"""

    def ill_founded_at(self, X: LinearOrder) -> Optional[bool]:
        if self.finitely_many(X):
            return False
        return None

    def value_type(self, X: LinearOrder) -> Optional[Ordinal]:
        return None

    def ordinal_of(self, d: Code, X: LinearOrder) -> Optional[Ordinal]:
        return None

    def element_at_ordinal(self, beta: Ordinal, X: LinearOrder) -> Optional[Code]:
        return None

    def witness_chain(
        self, X: LinearOrder, depth: int, meter: BudgetMeter
    ) -> Optional[List[Code]]:
        """A descending chain built from a decided ill-foundedness, if available"""
        return None

    def descending_branch(
        self, X: LinearOrder, depth: int, meter: BudgetMeter
    ) -> Optional[SearchResult[List[Code]]]:
        """Nested-branch search for systems whose values are tree orders"""
        return None

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.expr})"


class FlatSystem(DenotationSystem):
    """A system whose denotations are terms applied directly to elements of X"""

    def __init__(self):
        self._terms: Dict[Optional[int], CachedEnumeration] = {}
        self._terms_lock = threading.Lock()

    @abstractmethod
    def _enumerate_terms(self, max_arity: Optional[int]) -> Iterator[Hashable]:
        """Terms of arity at most max_arity (all terms when None)"""

    @abstractmethod
    def arity(self, term: Hashable) -> int: ...

    @abstractmethod
    def is_term(self, term: Hashable) -> bool: ...

    @abstractmethod
    def pattern_compare(self, t: Hashable, s: Hashable, pattern: MergePattern) -> Cmp: ...

    @abstractmethod
    def finitely_many_terms(self, max_arity: Optional[int]) -> bool: ...

    def terms(self, max_arity: Optional[int] = None) -> CachedEnumeration:
        with self._terms_lock:
            if max_arity not in self._terms:
                self._terms[max_arity] = CachedEnumeration(
                    lambda: self._enumerate_terms(max_arity)
                )
            return self._terms[max_arity]

    def finitely_many(self, X: LinearOrder) -> bool:
        if X.size is not None:
            return self.finitely_many_terms(X.size)
        # an infinite X leaves D(X) finite only when every term is nullary
        return self.finitely_many_terms(None) and all(self.arity(t) == 0 for t in self.terms(None))

    def denotations(self, X: LinearOrder) -> Iterator[Code]:
        if X.size is not None:
            elements = X.sort(X.prefix(X.size))
            for term in self.terms(X.size):
                for args in combinations(elements, self.arity(term)):
                    yield Denotation(term, args)
            return
        yield from self._dovetail(X)

    def _dovetail(self, X: LinearOrder) -> Iterator[Code]:
        terms = self.terms(None)
        for r in count(1):
            term_list = terms.prefix(r)
            elements = X.prefix(r)
            if len(term_list) < r and len(elements) < r and r > 1:
                return
            newest_term = r - 1 < len(term_list)
            newest_element = r - 1 < len(elements)
            for ti, term in enumerate(term_list):
                k = self.arity(term)
                if k > len(elements):
                    continue
                if ti == r - 1:
                    pools = combinations(range(len(elements)), k)
                elif newest_element and k > 0:
                    pools = (
                        rest + (r - 1,) for rest in combinations(range(r - 1), k - 1)
                    )
                else:
                    continue
                for positions in pools:
                    args = tuple(X.sort([elements[p] for p in positions]))
                    yield Denotation(term, args)
            if not newest_term and not newest_element:
                return
            # terms exhausted and none takes arguments: new elements add nothing
            if not newest_term and all(self.arity(term) == 0 for term in term_list):
                return

    def contains(self, d: Code, X: LinearOrder) -> bool:
        if not isinstance(d, Denotation) or not self.is_term(d.term):
            return False
        if len(d.args) != self.arity(d.term):
            return False
        if not all(X.contains(x) for x in d.args):
            return False
        return all(X.less(x, y) for x, y in zip(d.args, d.args[1:]))

    def compare(self, d: Code, e: Code, X: LinearOrder) -> Cmp:
        if d == e:
            return Cmp.EQ
        pattern = merge_pattern(d.args, e.args, X)
        result = self.pattern_compare(d.term, e.term, pattern)
        if result is Cmp.EQ:
            raise PatternInconsistencyError(
                f"{self.expr} identifies distinct denotations {d} and {e} (pattern {pattern})"
            )
        return result

    def fmap(self, d: Code, f: Callable[[Code], Code]) -> Code:
        return Denotation(d.term, tuple(f(x) for x in d.args))


class EvaluatedOrder(LinearOrder):
    """D(X): the denotations of a system over X"""

    def __init__(self, system: DenotationSystem, argument: LinearOrder):
        self.system = system
        self.argument = argument
        ill = system.ill_founded_at(argument)
        self.wellfounded = None if ill is None else not ill
        self._size: Optional[int] = None
        self._size_known = False
        super().__init__()

    @property
    def expr(self) -> str:
        return f"eval({self.system.expr},{self.argument.expr})"

    def _enumerate(self) -> Iterator[Code]:
        return self.system.denotations(self.argument)

    def _compare(self, x: Code, y: Code) -> Cmp:
        return self.system.compare(x, y, self.argument)

    def contains(self, x: Code) -> bool:
        return self.system.contains(x, self.argument)

    @property
    def size(self) -> Optional[int]:
        if not self._size_known:
            if self.system.finitely_many(self.argument):
                self._size = self._enumeration.length()
            self._size_known = True
        return self._size

    @property
    def order_type(self) -> Optional[Ordinal]:
        kind = self.system.value_type(self.argument)
        if kind is None and self.size is not None:
            return Ordinal.from_int(self.size)
        return kind

    def ordinal_of(self, x: Code) -> Optional[Ordinal]:
        return self.system.ordinal_of(x, self.argument)

    def element_at_ordinal(self, beta: Ordinal) -> Optional[Code]:
        return self.system.element_at_ordinal(beta, self.argument)

    def descending_chain(self, depth: int, meter: BudgetMeter) -> SearchResult[List[Code]]:
        if self.system.ill_founded_at(self.argument) is True:
            chain = self.system.witness_chain(self.argument, depth, meter)
            if chain is not None:
                return SearchResult(SearchStatus.FOUND, chain, meter.spent)
        branch = self.system.descending_branch(self.argument, depth, meter)
        if branch is not None:
            return branch
        return super().descending_chain(depth, meter)


def evaluate(system: DenotationSystem, X: LinearOrder) -> EvaluatedOrder:
    return EvaluatedOrder(system, X)


def fmap(system: DenotationSystem, f: OrderEmbedding) -> Callable[[Code], Code]:
    """D(f): the action of a system on an embedding between orders"""

    def apply(x: Code) -> Code:
        try:
            return f(x)
        except UnknownElementError as e:
            raise ArityMismatchError(f"embedding is not defined on argument {x!r}") from e

    def transport(d: Code) -> Code:
        if not system.contains(d, f.source):
            raise ArityMismatchError(f"{d} is not a denotation of {system.expr} over {f.source.expr}")
        return system.fmap(d, apply)

    return transport


def _level_map(images: Tuple[int, ...]) -> Callable[[Code], Code]:
    def at(x: Code) -> Code:
        if not isinstance(x, int) or not 0 <= x < len(images):
            raise ArityMismatchError(f"argument {x!r} outside the domain of {list(images)}")
        return images[x]

    return at


def _describe(system: DenotationSystem, d: Code, e: Code, level: LinearOrder) -> str:
    text = f"{d} vs {e} at level {level.size}"
    if isinstance(system, FlatSystem) and isinstance(d, Denotation) and isinstance(e, Denotation):
        text += f", pattern {merge_pattern(d.args, e.args, level)}"
    return text


def _check_level(
    system: DenotationSystem, level: LinearOrder, sample: int, report: LawReport
) -> Optional[List[Code]]:
    values = EvaluatedOrder(system, level)
    elements = values.prefix(sample)
    if len(set(elements)) != len(elements):
        report.fail("no-duplicates", f"level {level.size} enumerates a denotation twice")
        return None
    for d in elements:
        report.checks += 1
        if not system.contains(d, level):
            report.fail("membership", f"{d} enumerated at level {level.size} but not a member")
            return None
    try:
        for d, e in combinations(elements, 2):
            report.checks += 1
            forward = system.compare(d, e, level)
            backward = system.compare(e, d, level)
            if backward is not forward.flip():
                report.fail(
                    "antisymmetry",
                    f"{_describe(system, d, e, level)}: {forward.value} then {backward.value}",
                )
                return None
        ranked = values.sort(elements)
        for i, j in combinations(range(len(ranked)), 2):
            report.checks += 1
            if system.compare(ranked[i], ranked[j], level) is not Cmp.LT:
                report.fail(
                    "transitivity",
                    f"no linear arrangement at level {level.size} around {ranked[i]} and {ranked[j]}",
                )
                return None
    except PatternInconsistencyError as e:
        report.fail("totality", str(e))
        return None
    return elements


def check_predilator(
    system: DenotationSystem, n_max: int, sample: int = DEFAULT_SAMPLE
) -> LawReport:
    """Check the pre-dilator laws on levels 0..n_max.

    Each level is checked on its first `sample` denotations: reflexivity and
    antisymmetry, transitivity, membership of images, order preservation of
    every embedding between levels, and the identity and composition laws.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    report = LawReport(subject=system.expr)
    levels = {n: finite_order(n) for n in range(n_max + 1)}
    samples: Dict[int, List[Code]] = {}
    for n, level in levels.items():
        elements = _check_level(system, level, sample, report)
        if elements is None:
            logger.info(f"Law check failed for {system.expr}: {report.law}")
            return report
        samples[n] = elements

    try:
        for n in range(n_max + 1):
            for m in range(n, n_max + 1):
                for images in increasing_maps(n, m):
                    f = _level_map(images)
                    moved = [system.fmap(d, f) for d in samples[n]]
                    for d, fd in zip(samples[n], moved):
                        report.checks += 1
                        if not system.contains(fd, levels[m]):
                            return report.fail(
                                "images", f"D({list(images)}) sends {d} outside level {m}"
                            )
                        if n == m and fd != d:
                            return report.fail("identity", f"D(id_{n}) moves {d} to {fd}")
                    for (d, fd), (e, fe) in combinations(zip(samples[n], moved), 2):
                        report.checks += 1
                        if system.compare(d, e, levels[n]) is not system.compare(fd, fe, levels[m]):
                            return report.fail(
                                "order-preservation",
                                f"D({list(images)}) does not preserve {d} vs {e}",
                            )
                    for k in range(m, n_max + 1):
                        for outer in increasing_maps(m, k):
                            g = _level_map(outer)
                            both = _level_map(tuple(outer[i] for i in images))
                            for d, fd in zip(samples[n], moved):
                                report.checks += 1
                                if system.fmap(fd, g) != system.fmap(d, both):
                                    return report.fail(
                                        "composition",
                                        f"D({list(outer)}) . D({list(images)}) differs from "
                                        f"D({[outer[i] for i in images]}) at {d}",
                                    )
    except PatternInconsistencyError as e:
        return report.fail("totality", str(e))
    logger.info(f"Law check passed for {system.expr} ({report.checks} checks)")
    return report


@dataclass
class NatTransApprox:
    """Level maps eta_n: D(n) -> E(n) for finite n"""

    source: DenotationSystem
    target: DenotationSystem
    level_map: Callable[[int, Code], Code]
    label: str = "eta"


def identity_transformation(system: DenotationSystem) -> NatTransApprox:
    return NatTransApprox(system, system, lambda n, d: d, label=f"id[{system.expr}]")


def check_natural(eta: NatTransApprox, n_max: int, sample: int = DEFAULT_SAMPLE) -> LawReport:
    """Order preservation of each eta_n and commuting squares for all f: n -> m"""
    report = LawReport(subject=eta.label)
    levels = {n: finite_order(n) for n in range(n_max + 1)}
    samples = {
        n: EvaluatedOrder(eta.source, level).prefix(sample) for n, level in levels.items()
    }
    try:
        for n, level in levels.items():
            images = [eta.level_map(n, d) for d in samples[n]]
            for d, image in zip(samples[n], images):
                report.checks += 1
                if not eta.target.contains(image, level):
                    return report.fail("membership", f"eta_{n}({d}) = {image} is not in E({n})")
            for (d, x), (e, y) in combinations(zip(samples[n], images), 2):
                report.checks += 1
                if eta.source.compare(d, e, level) is not eta.target.compare(x, y, level):
                    return report.fail("order-preservation", f"eta_{n} does not preserve {d} vs {e}")
        for n in range(n_max + 1):
            for m in range(n, n_max + 1):
                for images in increasing_maps(n, m):
                    f = _level_map(images)
                    for d in samples[n]:
                        report.checks += 1
                        down = eta.target.fmap(eta.level_map(n, d), f)
                        across = eta.level_map(m, eta.source.fmap(d, f))
                        if down != across:
                            return report.fail(
                                "naturality",
                                f"square for f={list(images)} fails at {d}: {down} != {across}",
                            )
    except PatternInconsistencyError as e:
        return report.fail("totality", str(e))
    return report
