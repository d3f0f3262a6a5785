"""
Soundness probes over theory streams

Prefix sums of the claimed dilators, least-witness probes for the Pi^1_2 and
Sigma^1_2 soundness ordinals over an explicit CNF grid, the category
classifier, the block isomorphism check and the epsilon-closure check.
"""

import asyncio
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence, Union

from config import DEFAULT_SAMPLE, PROBE_WORKERS
from core.budget import SearchBudget
from core.combinators import ExpOmegaSystem, compose, omega_sum, recursive_copy
from core.dilator import DenotationSystem, EvaluatedOrder
from core.errors import PtyxError, StreamExhaustedError
from core.linord import Code, CnfOrder, LinearOrder, OrderEmbedding, SumOrder
from core.models import Category, Cmp, ProbeVerdict, SearchResult, SearchStatus
from core.ordinals import OMEGA, ZERO, Ordinal, omega_tower
from core.streams import StreamEntry, TheoryStream

logger = logging.getLogger(__name__)

EPSILON_POINTS = (OMEGA, omega_tower(2), omega_tower(3))


@dataclass
class Witness:
    """A descending chain in D_index(alpha)"""

    index: int
    alpha: Ordinal
    chain: List[Code]
    exact: bool = True  # backed by a decided ill-foundedness, not only a finite branch

    def verify(self, system: DenotationSystem) -> bool:
        return verify_chain(EvaluatedOrder(system, CnfOrder(self.alpha)), self.chain)


@dataclass
class Attempt:
    alpha: Ordinal
    status: str
    spent: int = 0


@dataclass
class EntryProbe:
    index: int
    expr: str
    attempts: List[Attempt] = field(default_factory=list)
    least: Optional[Ordinal] = None


@dataclass
class ProbeReport:
    kind: str
    grid: List[Ordinal]
    verdict: ProbeVerdict = ProbeVerdict.NO_WITNESS
    value: Optional[Ordinal] = None
    witness: Optional[Witness] = None
    entries: List[EntryProbe] = field(default_factory=list)

    @property
    def spent(self) -> int:
        return sum(a.spent for e in self.entries for a in e.attempts)


@dataclass
class CategoryVerdict:
    category: Category
    least: Optional[Ordinal]
    probe: ProbeReport
    evidence: List[str] = field(default_factory=list)


def verify_chain(order: LinearOrder, chain: Sequence[Code]) -> bool:
    """Replay a chain through compare: members, strictly descending"""
    if not all(order.contains(x) for x in chain):
        return False
    return all(order.compare(x, y) is Cmp.GT for x, y in zip(chain, chain[1:]))


def decide_at(
    system: DenotationSystem, alpha: Ordinal, budget: SearchBudget
) -> SearchResult[Witness]:
    """Look for a witness that system(alpha) is illfounded.

    A decided ill-foundedness yields an exact witness chain of budget.depth
    elements; a decided wellfoundedness is a definite NONE. Undecided systems
    fall back to their nested-branch search. A branch found there is only a
    finite candidate: it comes back as BUDGET_EXHAUSTED carrying an inexact
    Witness, and never counts as found.
    """
    X = CnfOrder(alpha)
    meter = budget.meter()
    flag = system.ill_founded_at(X)
    if flag is False:
        return SearchResult(SearchStatus.NONE, spent=meter.spent)
    value = EvaluatedOrder(system, X)
    if flag is True:
        chain = system.witness_chain(X, budget.depth, meter)
        if chain is not None and len(chain) == budget.depth and verify_chain(value, chain):
            return SearchResult(SearchStatus.FOUND, Witness(-1, alpha, chain, True), meter.spent)
        if chain is not None:
            logger.error(f"Witness chain for {system.expr} at {alpha} failed verification")
        return SearchResult(SearchStatus.BUDGET_EXHAUSTED, spent=meter.spent)
    branch = system.descending_branch(X, budget.depth, meter)
    if branch is not None and branch.found and verify_chain(value, branch.value):
        logger.info(f"Inexact chain of length {len(branch.value)} for {system.expr} at {alpha}")
        return SearchResult(
            SearchStatus.BUDGET_EXHAUSTED, Witness(-1, alpha, branch.value, False), meter.spent
        )
    if branch is not None and branch.status is SearchStatus.NONE and X.size is not None:
        return SearchResult(SearchStatus.NONE, spent=meter.spent)
    return SearchResult(SearchStatus.BUDGET_EXHAUSTED, spent=meter.spent)


async def _decide_all(
    entries: Sequence[StreamEntry], alpha: Ordinal, budget: SearchBudget, workers: int
) -> List[Union[SearchResult[Witness], BaseException]]:
    gate = asyncio.Semaphore(workers)

    async def one(entry: StreamEntry):
        async with gate:
            return await asyncio.to_thread(decide_at, entry.system, alpha, budget)

    return await asyncio.gather(*(one(entry) for entry in entries), return_exceptions=True)


def _record(probe: EntryProbe, alpha: Ordinal, result) -> Optional[SearchResult[Witness]]:
    if isinstance(result, BaseException):
        if not isinstance(result, PtyxError):
            raise result
        logger.error(f"Probe of {probe.expr} at {alpha} failed: {result}")
        probe.attempts.append(Attempt(alpha, "error"))
        return None
    probe.attempts.append(Attempt(alpha, result.status.value, result.spent))
    return result


def _grid(alphas: Sequence[Ordinal]) -> List[Ordinal]:
    return sorted(set(alphas))


async def o12_probe_async(
    stream: TheoryStream,
    alphas: Sequence[Ordinal],
    budget: Optional[SearchBudget] = None,
    workers: int = PROBE_WORKERS,
) -> ProbeReport:
    budget = budget or SearchBudget()
    grid = _grid(alphas)
    report = ProbeReport("o12", grid)
    report.entries = [EntryProbe(i, e.expr) for i, e in enumerate(stream.positive)]
    for alpha in grid:
        results = await _decide_all(stream.positive, alpha, budget, workers)
        found = []
        for probe, result in zip(report.entries, results):
            outcome = _record(probe, alpha, result)
            if outcome is not None and outcome.found:
                probe.least = alpha
                found.append(probe.index)
        if found:
            index = min(found)
            witness = results[index].value
            report.witness = Witness(index, alpha, witness.chain, witness.exact)
            report.value = alpha
            report.verdict = ProbeVerdict.WITNESS_FOUND
            break
    logger.info(f"o12 probe over {len(grid)} points: {report.verdict.value} at {report.value}")
    return report


def o12_probe(
    stream: TheoryStream,
    alphas: Sequence[Ordinal],
    budget: Optional[SearchBudget] = None,
    workers: int = PROBE_WORKERS,
) -> ProbeReport:
    """Least grid point where some claimed dilator has a witness, least index first"""
    return asyncio.run(o12_probe_async(stream, alphas, budget, workers))


async def _least_witness(
    entry: StreamEntry, probe: EntryProbe, grid: Sequence[Ordinal], budget: SearchBudget
) -> Optional[Witness]:
    for alpha in grid:
        try:
            result = await asyncio.to_thread(decide_at, entry.system, alpha, budget)
        except PtyxError as e:
            result = e
        outcome = _record(probe, alpha, result)
        if outcome is not None and outcome.found:
            probe.least = alpha
            return Witness(probe.index, alpha, outcome.value.chain, outcome.value.exact)
    return None


async def s12_probe_async(
    stream: TheoryStream,
    alphas: Sequence[Ordinal],
    budget: Optional[SearchBudget] = None,
    workers: int = PROBE_WORKERS,
) -> ProbeReport:
    budget = budget or SearchBudget()
    grid = _grid(alphas)
    report = ProbeReport("s12", grid)
    report.entries = [EntryProbe(i, e.expr) for i, e in enumerate(stream.negative)]
    gate = asyncio.Semaphore(workers)

    async def one(entry: StreamEntry, probe: EntryProbe):
        async with gate:
            return await _least_witness(entry, probe, grid, budget)

    results = await asyncio.gather(
        *(one(e, p) for e, p in zip(stream.negative, report.entries)), return_exceptions=True
    )
    witnesses = []
    for probe, result in zip(report.entries, results):
        if isinstance(result, BaseException):
            raise result
        if result is not None:
            witnesses.append(result)
    if witnesses:
        top = max(witnesses, key=lambda w: (w.alpha, -w.index))
        report.value = top.alpha
        report.witness = top
        report.verdict = ProbeVerdict.WITNESS_FOUND
    logger.info(f"s12 probe over {len(report.entries)} entries: sup {report.value}")
    return report


def s12_probe(
    stream: TheoryStream,
    alphas: Sequence[Ordinal],
    budget: Optional[SearchBudget] = None,
    workers: int = PROBE_WORKERS,
) -> ProbeReport:
    """Supremum over claimed non-dilators of their least witnessed grid point"""
    return asyncio.run(s12_probe_async(stream, alphas, budget, workers))


def classify(
    stream: TheoryStream,
    grid: Sequence[Ordinal],
    budget: Optional[SearchBudget] = None,
    workers: int = PROBE_WORKERS,
) -> CategoryVerdict:
    points = _grid(list(grid) + [ZERO])
    probe = o12_probe(stream, points, budget, workers)
    evidence = [
        f"{entry.expr}: " + ", ".join(f"{a.alpha}={a.status}" for a in entry.attempts)
        for entry in probe.entries
    ]
    if probe.witness is None:
        category = Category.C_OR_D
        evidence.append(f"no witness on grid {', '.join(str(a) for a in points)}")
    elif probe.value == ZERO:
        category = Category.A
        evidence.append(f"entry {probe.witness.index} is illfounded at 0")
    else:
        category = Category.B
        evidence.append(f"least witness {probe.value} from entry {probe.witness.index}")
    logger.info(f"Classified stream {stream.source or stream.name}: {category.value}")
    return CategoryVerdict(category, probe.value, probe, evidence)


def pi12_prefix(stream: TheoryStream, k: int) -> DenotationSystem:
    """Sum of the first k claimed dilators, certified when the stream carries certificates"""
    if k < 0:
        raise ValueError(f"prefix length must be non-negative, got {k}")
    if k > len(stream.positive):
        raise StreamExhaustedError(
            f"stream has {len(stream.positive)} positive entries, prefix {k} requested"
        )
    entries = stream.positive[:k]
    if stream.certified:
        return recursive_copy([(e.system, e.certificate) for e in entries])
    label = f"osum(@{stream.source},{k})" if stream.source else None
    return omega_sum([e.system for e in entries], k, label=label)


@dataclass
class RelationReport:
    k: int
    argument: str
    passed: bool = True
    pairs_checked: int = 0
    size: Optional[int] = None
    failure: Optional[str] = None
    isomorphism: Optional[OrderEmbedding] = None


def check_ordinal_relation(
    stream: TheoryStream,
    k: int,
    alpha: Union[Ordinal, LinearOrder],
    sample: int = DEFAULT_SAMPLE,
) -> RelationReport:
    """prefix_k(alpha) against the block sum of D_i(alpha), i < k"""
    X = alpha if isinstance(alpha, LinearOrder) else CnfOrder(alpha)
    total = pi12_prefix(stream, k)
    value = EvaluatedOrder(total, X)
    blocks = SumOrder([EvaluatedOrder(e.system, X) for e in stream.positive[:k]])
    iso = OrderEmbedding(
        value, blocks, lambda d: (total._tag(d), total.project(d)), label="block isomorphism"
    )
    report = RelationReport(k, X.expr, isomorphism=iso, size=value.size)
    elements = value.prefix(sample)
    images = [iso(d) for d in elements]
    for d, image in zip(elements, images):
        if not blocks.contains(image):
            report.passed = False
            report.failure = f"{d} maps outside the block sum"
            return report
    for (d, x), (e, y) in combinations(zip(elements, images), 2):
        report.pairs_checked += 1
        if value.compare(d, e) is not blocks.compare(x, y):
            report.passed = False
            report.failure = f"block map does not preserve {d} vs {e}"
            return report
    for i, y in blocks.prefix(sample):
        if not value.contains(total.inject(i, y)):
            report.passed = False
            report.failure = f"block element {(i, y)} has no preimage"
            return report
    return report


@dataclass
class EpsilonRow:
    height: int
    alpha: Ordinal
    expr: str
    status: str
    exact: Optional[bool] = None


@dataclass
class EpsilonReport:
    expr: str
    rows: List[EpsilonRow] = field(default_factory=list)

    @property
    def witnessed(self) -> List[EpsilonRow]:
        return [row for row in self.rows if row.status == SearchStatus.FOUND.value]


def tower_composite(system: DenotationSystem, height: int) -> DenotationSystem:
    """D composed with w^x iterated `height` times"""
    inner: Optional[DenotationSystem] = None
    for _ in range(height):
        inner = ExpOmegaSystem() if inner is None else compose(ExpOmegaSystem(), inner)
    return system if inner is None else compose(system, inner)


def epsilon_closure_check(
    system: DenotationSystem,
    alpha: Ordinal,
    budget: Optional[SearchBudget] = None,
    max_height: int = 3,
) -> EpsilonReport:
    """Witness search for D . (w^x)^h, h <= max_height, at alpha and the
    epsilon approximants w, w^w, w^w^w"""
    budget = budget or SearchBudget()
    report = EpsilonReport(system.expr)
    points = _grid([alpha, *EPSILON_POINTS])
    for height in range(max_height + 1):
        composite = tower_composite(system, height)
        for point in points:
            result = decide_at(composite, point, budget)
            report.rows.append(
                EpsilonRow(
                    height,
                    point,
                    composite.expr,
                    result.status.value,
                    result.value.exact if result.value is not None else None,
                )
            )
    logger.info(f"Epsilon check for {system.expr}: {len(report.witnessed)} witnessed points")
    return report
