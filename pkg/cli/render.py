"""
Report rendering
JSON output is the canonical form (sorted keys, no timestamps); the text form
is a short human summary of the same report.
"""

import json
import logging
from typing import Any, Callable, Dict, List, Type

from pydantic import BaseModel

from core import reports

logger = logging.getLogger(__name__)


def code_text(x: Any) -> str:
    return json.dumps(x, separators=(",", ":"), sort_keys=True)


def to_json(report: BaseModel) -> str:
    return json.dumps(report.model_dump(mode="json"), sort_keys=True, indent=2)


def format_order(report: reports.OrderListing) -> str:
    direction = "descending" if not report.ascending else "ascending"
    lines = [f"{report.expr}"]
    facts = []
    if report.size is not None:
        facts.append(f"size {report.size}")
    if report.order_type is not None:
        facts.append(f"type {report.order_type}")
    if report.wellfounded is not None:
        facts.append("wellfounded" if report.wellfounded else "illfounded")
    if facts:
        lines.append("  " + ", ".join(facts))
    shown = len(report.elements)
    suffix = "" if report.complete else " (partial)"
    lines.append(f"  {shown} elements, {direction}{suffix}:")
    lines.extend(f"    {code_text(x)}" for x in report.elements)
    return "\n".join(lines)


def format_compare(report: reports.CompareReport) -> str:
    return f"{code_text(report.x)} {report.result} {code_text(report.y)} in {report.expr}"


def format_chain(report: reports.ChainReport) -> str:
    lines = [f"chain of length {report.depth} in {report.expr}: {report.status}"]
    if report.chain is not None:
        lines.extend(f"  {code_text(x)}" for x in report.chain)
        lines.append(f"  verified: {report.verified}")
    lines.append(f"  work: {report.spent}")
    return "\n".join(lines)


def format_embedding(report: reports.EmbeddingReport) -> str:
    lines = [f"{report.source} -> {report.target}: {report.status}"]
    lines.extend(f"  {code_text(x)} |-> {code_text(y)}" for x, y in report.pairs)
    if report.violation:
        lines.append(f"  not order preserving at {report.violation}")
    return "\n".join(lines)


def format_law(report: reports.LawReport) -> str:
    if report.passed:
        return f"{report.subject}: passed ({report.checks} checks)"
    return f"{report.subject}: FAILED {report.law}: {report.counterexample}"


def format_map(report: reports.MapReport) -> str:
    lines = [f"{report.expr}({report.images}): level {report.source_level} -> {report.target_level}"]
    lines.extend(f"  {code_text(x)} |-> {code_text(y)}" for x, y in report.pairs)
    if not report.order_preserving:
        lines.append("  NOT order preserving")
    return "\n".join(lines)


def format_expression(report: reports.ExpressionReport) -> str:
    lines = [f"{report.kind}: {report.expr}"]
    if report.value is not None:
        lines.append(format_order(report.value))
    if report.law is not None:
        lines.append(format_law(report.law))
    return "\n".join(lines)


def format_proof(report: reports.ProofReport) -> str:
    lines = [f"{report.formula} at stage {report.stage}: {report.status} ({report.size} nodes)"]
    for node in report.nodes:
        indent = "  " * (len(node.address) + 1)
        lines.append(f"{indent}{node.rule}: {', '.join(node.sequent)}")
    return "\n".join(lines)


def format_functor(report: reports.FunctorReport) -> str:
    head = (
        f"P({report.images}) for {report.formula}: "
        f"stage {report.source_stage} -> {report.target_stage}"
    )
    lines = [head]
    lines.extend(f"  {a} |-> {b}" for a, b in report.node_map)
    lines.extend(f"  violation: {v}" for v in report.violations)
    return "\n".join(lines)


def format_audit(report: reports.AuditReport) -> str:
    if report.passed:
        return f"{report.formula} at stage {report.stage}: a proof"
    lines = [f"{report.formula} at stage {report.stage}: not a proof"]
    lines.extend(f"  {problem}" for problem in report.problems)
    return "\n".join(lines)


def format_countermodel(report: reports.CountermodelReport) -> str:
    lines = [f"countermodel for {report.formula} at stage {report.stage}"]
    lines.append(f"  universe: {report.universe}")
    for name, tuples in report.relations.items():
        lines.append(f"  {name}: {tuples}")
    lines.append(f"  formula holds: {report.formula_holds}")
    return "\n".join(lines)


def format_probe(report: reports.ProbeReportModel) -> str:
    lines = [f"{report.kind} probe: {report.verdict}" + (f" at {report.value}" if report.value else "")]
    if report.witness is not None:
        w = report.witness
        lines.append(f"  witness: entry {w.index} at {w.alpha} ({len(w.chain)} elements)")
    for entry in report.entries:
        tried = ", ".join(f"{a.alpha}={a.status}" for a in entry.attempts)
        lines.append(f"  [{entry.index}] {entry.expr}: {tried}")
    return "\n".join(lines)


def format_category(report: reports.CategoryReport) -> str:
    lines = [f"category {report.category}" + (f", least witness {report.least}" if report.least else "")]
    lines.extend(f"  {line}" for line in report.evidence)
    return "\n".join(lines)


def format_prefix(report: reports.PrefixReport) -> str:
    lines = [f"prefix {report.k}: {report.expr}"]
    lines.extend(f"  {expr}" for expr in report.entries)
    if report.value is not None:
        lines.append(format_order(report.value))
    return "\n".join(lines)


def format_relation(report: reports.RelationReport) -> str:
    status = "holds" if report.passed else f"FAILS: {report.failure}"
    return (
        f"prefix {report.k} at {report.argument} against the block sum: {status} "
        f"({report.pairs_checked} pairs)"
    )


def format_epsilon(report: reports.EpsilonReport) -> str:
    lines = [f"{report.expr} at {report.alpha}: {report.witnessed} witnessed points"]
    for row in report.rows:
        lines.append(f"  h={row.height} {row.alpha}: {row.status}")
    return "\n".join(lines)


FORMATTERS: Dict[Type[BaseModel], Callable[[Any], str]] = {
    reports.OrderListing: format_order,
    reports.CompareReport: format_compare,
    reports.ChainReport: format_chain,
    reports.EmbeddingReport: format_embedding,
    reports.NaturalityReport: format_law,
    reports.LawReport: format_law,
    reports.MapReport: format_map,
    reports.ExpressionReport: format_expression,
    reports.ProofReport: format_proof,
    reports.FunctorReport: format_functor,
    reports.AuditReport: format_audit,
    reports.CountermodelReport: format_countermodel,
    reports.ProbeReportModel: format_probe,
    reports.CategoryReport: format_category,
    reports.PrefixReport: format_prefix,
    reports.RelationReport: format_relation,
    reports.EpsilonReport: format_epsilon,
}


def to_text(report: BaseModel) -> str:
    formatter = FORMATTERS.get(type(report))
    if formatter is None:
        logger.warning(f"No text form for {type(report).__name__}, writing JSON")
        return to_json(report)
    return formatter(report)


def schema_json(name: str) -> str:
    return json.dumps(reports.SCHEMAS[name].model_json_schema(), sort_keys=True, indent=2)


def schema_names() -> List[str]:
    return sorted(reports.SCHEMAS)
