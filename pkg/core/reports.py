"""
Report models
pydantic models for everything the command line emits, plus converters from the
core result objects. Element codes are encoded canonically so that identical
runs serialize to identical bytes.
"""

import base64
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type

from pydantic import BaseModel, ConfigDict, Field

from core import models
from core.betaproof import ProofAudit, ProofEmbedding, ProofTree, tree_to_json
from core.dilator import Denotation
from core.expressions import parse_cnf
from core.formulas import BetaStructure, eval_in_structure
from core.linord import Code, LinearOrder, OrderEmbedding
from core.models import SearchResult
from core.norms import CategoryVerdict
from core.norms import EpsilonReport as EpsilonResult
from core.norms import ProbeReport
from core.norms import RelationReport as RelationResult
from core.norms import Witness
from core.ordinals import Ordinal

logger = logging.getLogger(__name__)

# Finite orders up to this size are listed from their least element
FULL_SORT_LIMIT = 5000


def encode_code(x: Any) -> Any:
    """JSON form of an element code"""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, str)):
        return x
    if isinstance(x, bytes):
        return "b64:" + base64.b64encode(x).decode("ascii")
    if isinstance(x, Ordinal):
        return f"cnf:{x}"
    if isinstance(x, Denotation):
        return {"term": encode_code(x.term), "args": [encode_code(a) for a in x.args]}
    if isinstance(x, (tuple, list)):
        return [encode_code(item) for item in x]
    if isinstance(x, frozenset):
        return sorted((encode_code(item) for item in x), key=repr)
    return repr(x)


def decode_code(x: Any) -> Code:
    """Inverse of encode_code"""
    if isinstance(x, str):
        if x.startswith("cnf:"):
            return parse_cnf(x)
        if x.startswith("b64:"):
            return base64.b64decode(x[4:])
        return x
    if isinstance(x, dict) and set(x) == {"term", "args"}:
        return Denotation(decode_code(x["term"]), tuple(decode_code(a) for a in x["args"]))
    if isinstance(x, list):
        return tuple(decode_code(item) for item in x)
    return x


def ordinal_text(alpha: Optional[Ordinal]) -> Optional[str]:
    return None if alpha is None else f"cnf:{alpha}"


class Report(BaseModel):
    model_config = ConfigDict(frozen=True)


class OrderListing(Report):
    expr: str
    size: Optional[int] = None
    order_type: Optional[str] = None
    wellfounded: Optional[bool] = None
    ascending: bool = True
    complete: bool = True
    elements: List[Any] = Field(default_factory=list)


class CompareReport(Report):
    expr: str
    x: Any
    y: Any
    result: str


class ChainReport(Report):
    expr: str
    depth: int
    status: str
    spent: int = 0
    chain: Optional[List[Any]] = None
    verified: Optional[bool] = None


class EmbeddingReport(Report):
    source: str
    target: str
    status: str
    spent: int = 0
    pairs: List[Tuple[Any, Any]] = Field(default_factory=list)
    violation: Optional[str] = None


class LawReport(Report):
    subject: str
    passed: bool
    checks: int
    law: Optional[str] = None
    counterexample: Optional[str] = None


class NaturalityReport(LawReport):
    source: str
    target: str


class MapReport(Report):
    expr: str
    images: List[int]
    source_level: int
    target_level: int
    pairs: List[Tuple[Any, Any]] = Field(default_factory=list)
    order_preserving: bool = True


class ExpressionReport(Report):
    expr: str
    kind: str
    value: Optional[OrderListing] = None
    law: Optional[LawReport] = None


class ProofNodeModel(Report):
    address: List[int]
    rule: str
    principal: Optional[str] = None
    named: List[int]
    sequent: List[str]


class ProofReport(Report):
    formula: str
    stage: int
    depth: int
    status: str
    size: int
    open_branch: Optional[List[List[int]]] = None
    nodes: List[ProofNodeModel] = Field(default_factory=list)


class FunctorReport(Report):
    formula: str
    images: List[int]
    source_stage: int
    target_stage: int
    passed: bool
    node_map: List[Tuple[List[int], List[int]]] = Field(default_factory=list)
    violations: List[str] = Field(default_factory=list)


class AuditReport(Report):
    formula: str
    stage: int
    passed: bool
    problems: List[str] = Field(default_factory=list)


class CountermodelReport(Report):
    formula: str
    stage: int
    universe: List[int]
    relations: Dict[str, List[List[int]]] = Field(default_factory=dict)
    formula_holds: bool


class WitnessModel(Report):
    index: int
    alpha: str
    exact: bool
    chain: List[Any]


class AttemptModel(Report):
    alpha: str
    status: str
    spent: int = 0


class EntryModel(Report):
    index: int
    expr: str
    least: Optional[str] = None
    attempts: List[AttemptModel] = Field(default_factory=list)


class ProbeReportModel(Report):
    kind: str
    grid: List[str]
    verdict: str
    value: Optional[str] = None
    witness: Optional[WitnessModel] = None
    entries: List[EntryModel] = Field(default_factory=list)
    spent: int = 0


class CategoryReport(Report):
    category: str
    least: Optional[str] = None
    evidence: List[str] = Field(default_factory=list)
    probe: ProbeReportModel


class PrefixReport(Report):
    k: int
    expr: str
    entries: List[str]
    certified: bool
    value: Optional[OrderListing] = None


class RelationReport(Report):
    k: int
    argument: str
    passed: bool
    pairs_checked: int
    size: Optional[int] = None
    failure: Optional[str] = None
    blocks: List[Tuple[Any, Any]] = Field(default_factory=list)


class EpsilonRowModel(Report):
    height: int
    alpha: str
    expr: str
    status: str
    exact: Optional[bool] = None


class EpsilonReport(Report):
    expr: str
    alpha: str
    witnessed: int
    rows: List[EpsilonRowModel] = Field(default_factory=list)


SCHEMAS: Dict[str, Type[Report]] = {
    "order": OrderListing,
    "compare": CompareReport,
    "chain": ChainReport,
    "embedding": EmbeddingReport,
    "law": LawReport,
    "naturality": NaturalityReport,
    "map": MapReport,
    "expression": ExpressionReport,
    "proof": ProofReport,
    "functor": FunctorReport,
    "audit": AuditReport,
    "countermodel": CountermodelReport,
    "probe": ProbeReportModel,
    "category": CategoryReport,
    "prefix": PrefixReport,
    "relation": RelationReport,
    "epsilon": EpsilonReport,
}


# --- converters --------------------------------------------------------------


def order_listing(order: LinearOrder, limit: int, descending: bool = False) -> OrderListing:
    """The least (or greatest) `limit` elements of a finite order; for an
    infinite one the first `limit` enumerated elements, sorted"""
    if order.size is not None and order.size <= max(limit, FULL_SORT_LIMIT):
        ranked = order.sort(order.prefix(order.size))
        if descending:
            ranked.reverse()
        complete = limit >= order.size
        ranked = ranked[:limit]
    else:
        ranked = order.sort(order.prefix(limit))
        if descending:
            ranked.reverse()
        complete = False
    return OrderListing(
        expr=order.expr,
        size=order.size,
        order_type=ordinal_text(order.order_type),
        wellfounded=order.wellfounded,
        ascending=not descending,
        complete=complete,
        elements=[encode_code(x) for x in ranked],
    )


def chain_report(
    order: LinearOrder, depth: int, result: SearchResult[List[Code]]
) -> ChainReport:
    verified = None
    if result.found:
        chain = result.value
        verified = all(order.compare(x, y) is models.Cmp.GT for x, y in zip(chain, chain[1:]))
    return ChainReport(
        expr=order.expr,
        depth=depth,
        status=result.status.value,
        spent=result.spent,
        chain=[encode_code(x) for x in result.value] if result.found else None,
        verified=verified,
    )


def embedding_report(
    source: LinearOrder,
    target: LinearOrder,
    result: SearchResult[OrderEmbedding],
    sample: int,
) -> EmbeddingReport:
    pairs: List[Tuple[Any, Any]] = []
    violation = None
    if result.found:
        embedding = result.value
        pairs = [(encode_code(x), encode_code(y)) for x, y in embedding.pairs(sample)]
        bad = embedding.violation(sample)
        if bad is not None:
            violation = f"{bad[0]} vs {bad[1]}"
    return EmbeddingReport(
        source=source.expr,
        target=target.expr,
        status=result.status.value,
        spent=result.spent,
        pairs=pairs,
        violation=violation,
    )


def law_report(result: models.LawReport) -> LawReport:
    return LawReport(
        subject=result.subject,
        passed=result.passed,
        checks=result.checks,
        law=result.law,
        counterexample=result.counterexample,
    )


def naturality_report(result: models.LawReport, source: str, target: str) -> NaturalityReport:
    return NaturalityReport(
        subject=result.subject,
        passed=result.passed,
        checks=result.checks,
        law=result.law,
        counterexample=result.counterexample,
        source=source,
        target=target,
    )


def proof_report(tree: ProofTree) -> ProofReport:
    data = tree_to_json(tree)
    return ProofReport(
        formula=data["formula"],
        stage=tree.stage,
        depth=tree.depth,
        status=tree.status.value,
        size=tree.size,
        open_branch=data["open_branch"],
        nodes=[ProofNodeModel(**node) for node in data["nodes"]],
    )


def functor_report(formula: str, embedding: ProofEmbedding) -> FunctorReport:
    violations = embedding.violations()
    return FunctorReport(
        formula=formula,
        images=list(embedding.images),
        source_stage=embedding.source.stage,
        target_stage=embedding.target.stage,
        passed=not violations,
        node_map=[(list(a), list(b)) for a, b in sorted(embedding.node_map.items())],
        violations=violations,
    )


def audit_report(tree: ProofTree, audit: ProofAudit) -> AuditReport:
    return AuditReport(
        formula=str(tree.formula), stage=tree.stage, passed=audit.passed, problems=audit.problems
    )


def countermodel_report(tree: ProofTree, structure: BetaStructure) -> CountermodelReport:
    return CountermodelReport(
        formula=str(tree.formula),
        stage=tree.stage,
        universe=sorted(structure.universe),
        relations={
            name: sorted(list(t) for t in tuples) for name, tuples in sorted(structure.relations.items())
        },
        formula_holds=eval_in_structure(tree.formula, structure),
    )


def _witness_model(witness: Optional[Witness]) -> Optional[WitnessModel]:
    if witness is None:
        return None
    return WitnessModel(
        index=witness.index,
        alpha=ordinal_text(witness.alpha),
        exact=witness.exact,
        chain=[encode_code(x) for x in witness.chain],
    )


def probe_report(report: ProbeReport) -> ProbeReportModel:
    return ProbeReportModel(
        kind=report.kind,
        grid=[ordinal_text(alpha) for alpha in report.grid],
        verdict=report.verdict.value,
        value=ordinal_text(report.value),
        witness=_witness_model(report.witness),
        entries=[
            EntryModel(
                index=entry.index,
                expr=entry.expr,
                least=ordinal_text(entry.least),
                attempts=[
                    AttemptModel(alpha=ordinal_text(a.alpha), status=a.status, spent=a.spent)
                    for a in entry.attempts
                ],
            )
            for entry in report.entries
        ],
        spent=report.spent,
    )


def category_report(verdict: CategoryVerdict) -> CategoryReport:
    return CategoryReport(
        category=verdict.category.value,
        least=ordinal_text(verdict.least),
        evidence=verdict.evidence,
        probe=probe_report(verdict.probe),
    )


def relation_report(result: RelationResult, sample: int) -> RelationReport:
    blocks: List[Tuple[Any, Any]] = []
    if result.isomorphism is not None and result.passed:
        blocks = [(encode_code(x), encode_code(y)) for x, y in result.isomorphism.pairs(sample)]
    return RelationReport(
        k=result.k,
        argument=result.argument,
        passed=result.passed,
        pairs_checked=result.pairs_checked,
        size=result.size,
        failure=result.failure,
        blocks=blocks,
    )


def epsilon_report(result: EpsilonResult, alpha: Ordinal) -> EpsilonReport:
    return EpsilonReport(
        expr=result.expr,
        alpha=ordinal_text(alpha),
        witnessed=len(result.witnessed),
        rows=[
            EpsilonRowModel(
                height=row.height,
                alpha=ordinal_text(row.alpha),
                expr=row.expr,
                status=row.status,
                exact=row.exact,
            )
            for row in result.rows
        ],
    )


def map_report(
    expr: str,
    images: Sequence[int],
    source_level: int,
    target_level: int,
    pairs: Sequence[Tuple[Code, Code]],
    ok: bool,
) -> MapReport:
    return MapReport(
        expr=expr,
        images=list(images),
        source_level=source_level,
        target_level=target_level,
        pairs=[(encode_code(x), encode_code(y)) for x, y in pairs],
        order_preserving=ok,
    )
