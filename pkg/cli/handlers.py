"""
Command handlers for the ptyx command line
One function per `<group> <action>`; each builds its inputs from the parsed
arguments, runs the core operation and returns an Outcome carrying the report
and the exit status.
"""

import argparse
import json
import logging
import random
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from config import (
    DEFAULT_BUDGET_DEPTH,
    DEFAULT_BUDGET_NODES,
    DEFAULT_SAMPLE,
    DEFAULT_SEED,
    PROBE_WORKERS,
)
from core import reports
from core.betaproof import (
    check_alpha_proof,
    extract_countermodel,
    proof_functor,
    proof_predilator,
    proof_search,
    tree_to_dot,
)
from core.budget import SearchBudget
from core.combinators import (
    compose,
    implication_dilator,
    recursive_copy,
    sum_systems,
)
from core.dilator import EvaluatedOrder, check_predilator, fmap
from core.errors import ExpressionSyntaxError
from core.expressions import load_stream, parse_cnf, parse_dilator, parse_grid, parse_map, parse_order
from core.formulas import parse_formula, parse_relation_decl
from core.linord import (
    DisjOrder,
    OrderEmbedding,
    embed_into_disj,
    find_descending_chain,
    find_embedding,
    finite_order,
    increasing_maps,
)
from core.models import ProofStatus, SearchStatus
from core.norms import (
    check_ordinal_relation,
    classify,
    epsilon_closure_check,
    o12_probe,
    pi12_prefix,
    s12_probe,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

FORMATS = ("text", "json", "dot")


class RunConfig(BaseModel):
    """Everything a run depends on; identical configs give identical JSON"""

    model_config = ConfigDict(frozen=True)

    command: str
    action: str
    format: str = "text"
    budget_nodes: int = Field(DEFAULT_BUDGET_NODES, gt=0)
    budget_depth: int = Field(DEFAULT_BUDGET_DEPTH, gt=0)
    budget_seconds: Optional[float] = Field(None, gt=0)
    seed: int = Field(DEFAULT_SEED, ge=0)
    grid: Optional[str] = None
    workers: int = Field(PROBE_WORKERS, gt=0)
    sample: int = Field(DEFAULT_SAMPLE, gt=0)

    @property
    def budget(self) -> SearchBudget:
        return SearchBudget(self.budget_nodes, self.budget_depth, self.budget_seconds)


@dataclass
class Outcome:
    report: BaseModel
    status: int = EXIT_OK
    dot: Optional[str] = None


Handler = Callable[[argparse.Namespace, RunConfig], Outcome]


def _file_arg(text: str) -> str:
    """Accept both @path and path"""
    return text[1:] if text.startswith("@") else text


def parse_code(text: str):
    """An element code given on the command line: JSON, or cnf:<ordinal>"""
    if text.startswith("cnf:"):
        return parse_cnf(text)
    try:
        return reports.decode_code(json.loads(text))
    except json.JSONDecodeError as e:
        raise ExpressionSyntaxError(
            "element codes are JSON values or cnf: ordinals", token=text, production="code"
        ) from e


def _grid(args: argparse.Namespace, config: RunConfig):
    text = config.grid
    if not text:
        raise ExpressionSyntaxError("this command needs --grid", token="<missing>", production="grid")
    return parse_grid(text)


def _relations(args: argparse.Namespace) -> Dict[str, int]:
    return dict(parse_relation_decl(text) for text in args.rel or [])


def _formula(args: argparse.Namespace):
    relations = _relations(args)
    return parse_formula(args.formula, relations or None, infer_relations=not relations)


def _value(system, at: Optional[str], limit: int) -> Optional[reports.OrderListing]:
    if at is None:
        return None
    return reports.order_listing(EvaluatedOrder(system, parse_order(at)), limit)


# --- ord ---------------------------------------------------------------------


def ord_eval(args: argparse.Namespace, config: RunConfig) -> Outcome:
    order = parse_order(args.order)
    return Outcome(reports.order_listing(order, args.list, descending=args.desc))


def ord_kb(args: argparse.Namespace, config: RunConfig) -> Outcome:
    tree = args.tree.strip()
    text = f"kb:{tree}" if tree.startswith("[") else f"kb:@{_file_arg(tree)}"
    return Outcome(reports.order_listing(parse_order(text), args.list, descending=args.desc))


def ord_compare(args: argparse.Namespace, config: RunConfig) -> Outcome:
    order = parse_order(args.order)
    x, y = parse_code(args.x), parse_code(args.y)
    result = order.compare(x, y)
    return Outcome(
        reports.CompareReport(
            expr=order.expr,
            x=reports.encode_code(x),
            y=reports.encode_code(y),
            result=result.value,
        )
    )


def ord_chain(args: argparse.Namespace, config: RunConfig) -> Outcome:
    order = parse_order(args.order)
    depth = args.depth or config.budget_depth
    result = find_descending_chain(order, depth, config.budget)
    report = reports.chain_report(order, depth, result)
    if result.status is SearchStatus.BUDGET_EXHAUSTED:
        return Outcome(report, EXIT_BUDGET)
    return Outcome(report, EXIT_OK if report.verified is not False else EXIT_FAILED)


def ord_embed(args: argparse.Namespace, config: RunConfig) -> Outcome:
    source, target = parse_order(args.source), parse_order(args.target)
    result = find_embedding(source, target, config.budget)
    report = reports.embedding_report(source, target, result, config.sample)
    if result.status is SearchStatus.BUDGET_EXHAUSTED:
        return Outcome(report, EXIT_BUDGET)
    return Outcome(report, EXIT_FAILED if report.violation else EXIT_OK)


def ord_disj(args: argparse.Namespace, config: RunConfig) -> Outcome:
    left, right = parse_order(args.left), parse_order(args.right)
    if not args.embed:
        return Outcome(reports.order_listing(DisjOrder(left, right), args.list))
    source_first = args.embed == "left"
    source, other = (left, right) if source_first else (right, left)
    embedding = embed_into_disj(source, other, source_first, config.budget)
    count = min(args.list, source.size) if source.size is not None else args.list
    pairs = [(x, embedding(x)) for x in source.prefix(count)]
    bad = embedding.violation(count)
    report = reports.EmbeddingReport(
        source=source.expr,
        target=embedding.target.expr,
        status=SearchStatus.FOUND.value,
        pairs=[(reports.encode_code(x), reports.encode_code(y)) for x, y in pairs],
        violation=None if bad is None else f"{bad[0]} vs {bad[1]}",
    )
    return Outcome(report, EXIT_FAILED if bad else EXIT_OK)


# --- dil ---------------------------------------------------------------------


def dil_eval(args: argparse.Namespace, config: RunConfig) -> Outcome:
    system = parse_dilator(args.dilator)
    order = EvaluatedOrder(system, parse_order(args.at))
    return Outcome(reports.order_listing(order, args.list, descending=args.desc))


def dil_check(args: argparse.Namespace, config: RunConfig) -> Outcome:
    system = parse_dilator(args.dilator)
    result = check_predilator(system, args.n_max, config.sample)
    return Outcome(reports.law_report(result), EXIT_OK if result.passed else EXIT_FAILED)


def dil_map(args: argparse.Namespace, config: RunConfig) -> Outcome:
    system = parse_dilator(args.dilator)
    images = parse_map(args.map)
    n = len(images)
    m = args.to if args.to is not None else (max(images) + 1 if images else 0)
    source, target = finite_order(n), finite_order(m)
    f = OrderEmbedding.from_mapping(source, target, dict(enumerate(images)))
    transport = fmap(system, f)
    elements = EvaluatedOrder(system, source).prefix(config.sample)
    pairs = [(d, transport(d)) for d in elements]
    image_order = EvaluatedOrder(system, target)
    ok = all(
        system.compare(d, e, source) is image_order.compare(fd, fe)
        for i, (d, fd) in enumerate(pairs)
        for e, fe in pairs[i + 1 :]
    )
    report = reports.map_report(system.expr, images, n, m, pairs, ok)
    return Outcome(report, EXIT_OK if ok else EXIT_FAILED)


def _construct(system, kind: str, args: argparse.Namespace, config: RunConfig) -> Outcome:
    law = None
    if getattr(args, "check", None):
        result = check_predilator(system, args.check, config.sample)
        law = reports.law_report(result)
    report = reports.ExpressionReport(
        expr=system.expr, kind=kind, value=_value(system, args.at, args.list), law=law
    )
    return Outcome(report, EXIT_FAILED if law is not None and not law.passed else EXIT_OK)


def dil_compose(args: argparse.Namespace, config: RunConfig) -> Outcome:
    system = compose(parse_dilator(args.outer), parse_dilator(args.inner))
    return _construct(system, "compose", args, config)


def dil_sum(args: argparse.Namespace, config: RunConfig) -> Outcome:
    system = sum_systems(parse_dilator(args.left), parse_dilator(args.right))
    return _construct(system, "sum", args, config)


def dil_impl(args: argparse.Namespace, config: RunConfig) -> Outcome:
    system = implication_dilator(parse_order(args.a), parse_order(args.b))
    return _construct(system, "implication", args, config)


def dil_rcopy(args: argparse.Namespace, config: RunConfig) -> Outcome:
    path = _file_arg(args.stream)
    stream = load_stream(path)
    system = recursive_copy(
        [(e.system, e.certificate) for e in stream.positive], label=f"rcopy(@{path})"
    )
    return _construct(system, "recursive-copy", args, config)


# --- beta --------------------------------------------------------------------


def beta_search(args: argparse.Namespace, config: RunConfig) -> Outcome:
    formula = _formula(args)
    depth = args.depth if args.depth is not None else config.budget_depth
    tree = proof_search(formula, args.stage, depth, config.budget.meter())
    status = EXIT_BUDGET if tree.status is ProofStatus.DEPTH_EXHAUSTED else EXIT_OK
    return Outcome(reports.proof_report(tree), status, dot=tree_to_dot(tree))


def _random_map(n: int, m: int, seed: int) -> Tuple[int, ...]:
    choices: List[Tuple[int, ...]] = list(increasing_maps(n, m))
    if not choices:
        raise ExpressionSyntaxError(
            f"there is no increasing map {n} -> {m}", token=str(m), production="map"
        )
    return random.Random(seed).choice(choices)


def beta_functor(args: argparse.Namespace, config: RunConfig) -> Outcome:
    formula = _formula(args)
    depth = args.depth if args.depth is not None else config.budget_depth
    images = parse_map(args.map) if args.map is not None else _random_map(args.source, args.target, config.seed)
    source = proof_search(formula, args.source, depth)
    target = proof_search(formula, args.target, depth)
    embedding = proof_functor(formula, images, source, target)
    report = reports.functor_report(str(formula), embedding)
    return Outcome(report, EXIT_OK if report.passed else EXIT_FAILED)


def beta_check(args: argparse.Namespace, config: RunConfig) -> Outcome:
    formula = _formula(args)
    depth = args.depth if args.depth is not None else config.budget_depth
    tree = proof_search(formula, args.stage, depth, config.budget.meter())
    audit = check_alpha_proof(tree)
    return Outcome(reports.audit_report(tree, audit), EXIT_OK if audit.passed else EXIT_FAILED)


def beta_countermodel(args: argparse.Namespace, config: RunConfig) -> Outcome:
    formula = _formula(args)
    depth = args.depth if args.depth is not None else config.budget_depth
    tree = proof_search(formula, args.stage, depth, config.budget.meter())
    if tree.status is ProofStatus.DEPTH_EXHAUSTED:
        return Outcome(reports.proof_report(tree), EXIT_BUDGET)
    structure = extract_countermodel(tree)
    return Outcome(reports.countermodel_report(tree, structure))


def beta_predilator(args: argparse.Namespace, config: RunConfig) -> Outcome:
    formula = _formula(args)
    system = proof_predilator(formula)
    at = f"fin:[{','.join(str(i) for i in range(args.at))}]" if args.at is not None else None
    return _construct(system, "proof", argparse.Namespace(**{**vars(args), "at": at}), config)


# --- norm --------------------------------------------------------------------


def norm_prefix(args: argparse.Namespace, config: RunConfig) -> Outcome:
    stream = load_stream(_file_arg(args.stream))
    system = pi12_prefix(stream, args.k)
    report = reports.PrefixReport(
        k=args.k,
        expr=system.expr,
        entries=[e.expr for e in stream.positive[: args.k]],
        certified=stream.certified,
        value=_value(system, args.at, args.list),
    )
    return Outcome(report)


def norm_o12(args: argparse.Namespace, config: RunConfig) -> Outcome:
    stream = load_stream(_file_arg(args.stream))
    result = o12_probe(stream, _grid(args, config), config.budget, config.workers)
    return Outcome(reports.probe_report(result))


def norm_s12(args: argparse.Namespace, config: RunConfig) -> Outcome:
    stream = load_stream(_file_arg(args.stream))
    result = s12_probe(stream, _grid(args, config), config.budget, config.workers)
    return Outcome(reports.probe_report(result))


def norm_classify(args: argparse.Namespace, config: RunConfig) -> Outcome:
    stream = load_stream(_file_arg(args.stream))
    verdict = classify(stream, _grid(args, config), config.budget, config.workers)
    return Outcome(reports.category_report(verdict))


def norm_relation(args: argparse.Namespace, config: RunConfig) -> Outcome:
    stream = load_stream(_file_arg(args.stream))
    result = check_ordinal_relation(stream, args.k, parse_order(args.at), config.sample)
    return Outcome(
        reports.relation_report(result, config.sample),
        EXIT_OK if result.passed else EXIT_FAILED,
    )


def norm_epsilon(args: argparse.Namespace, config: RunConfig) -> Outcome:
    system = parse_dilator(args.dilator)
    alpha = parse_cnf(args.alpha)
    result = epsilon_closure_check(system, alpha, config.budget, args.max_height)
    return Outcome(reports.epsilon_report(result, alpha))


# --- registration ------------------------------------------------------------


def _formula_args(parser: argparse.ArgumentParser, stage: bool = True):
    parser.add_argument("--formula", required=True, help='e.g. "all x . ~(x < c0)"')
    parser.add_argument("--rel", action="append", help="extra relation symbol, e.g. R:2")
    parser.add_argument("--depth", type=int, help="proof depth bound (default: --budget-depth)")
    if stage:
        parser.add_argument("--stage", type=int, required=True)


def _construct_args(parser: argparse.ArgumentParser):
    parser.add_argument("--at", help="order to evaluate the result at")
    parser.add_argument("--list", type=int, default=10)
    parser.add_argument("--check", type=int, metavar="N_MAX", help="also run the law check")


def setup_handlers(subparsers, common: argparse.ArgumentParser) -> Dict[Tuple[str, str], Handler]:
    """Register every subcommand; returns the (group, action) -> handler table"""
    table: Dict[Tuple[str, str], Handler] = {}

    def group(name: str, help_text: str):
        parser = subparsers.add_parser(name, help=help_text)
        return parser.add_subparsers(dest="action", required=True, metavar="ACTION")

    def action(actions, group_name: str, name: str, handler: Handler, help_text: str):
        parser = actions.add_parser(name, help=help_text, parents=[common])
        table[(group_name, name)] = handler
        return parser

    ord_actions = group("ord", "linear orders")
    p = action(ord_actions, "ord", "eval", ord_eval, "list an order")
    p.add_argument("--order", required=True)
    p.add_argument("--list", type=int, default=10)
    p.add_argument("--desc", action="store_true")
    p = action(ord_actions, "ord", "kb", ord_kb, "Kleene-Brouwer order of a tree")
    p.add_argument("--tree", required=True, help="@file.json or an inline JSON tree")
    p.add_argument("--list", type=int, default=10)
    p.add_argument("--desc", action="store_true")
    p = action(ord_actions, "ord", "compare", ord_compare, "compare two elements")
    p.add_argument("--order", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p = action(ord_actions, "ord", "chain", ord_chain, "search a descending chain")
    p.add_argument("--order", required=True)
    p.add_argument("--depth", type=int)
    p = action(ord_actions, "ord", "embed", ord_embed, "embed a finite order")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p = action(ord_actions, "ord", "disj", ord_disj, "the disjunction order")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--list", type=int, default=10)
    p.add_argument("--embed", choices=("left", "right"), help="embed this side along the other")

    dil_actions = group("dil", "dilators")
    p = action(dil_actions, "dil", "eval", dil_eval, "evaluate a dilator at an order")
    p.add_argument("--dilator", required=True)
    p.add_argument("--at", required=True)
    p.add_argument("--list", type=int, default=10)
    p.add_argument("--desc", action="store_true")
    p = action(dil_actions, "dil", "check", dil_check, "check the pre-dilator laws")
    p.add_argument("--dilator", required=True)
    p.add_argument("--n-max", type=int, default=4)
    p = action(dil_actions, "dil", "map", dil_map, "apply a dilator to an embedding n -> m")
    p.add_argument("--dilator", required=True)
    p.add_argument("--map", required=True, help="images, e.g. 1,3")
    p.add_argument("--to", type=int, help="target level (default: largest image + 1)")
    p = action(dil_actions, "dil", "compose", dil_compose, "composition D . F")
    p.add_argument("--outer", required=True)
    p.add_argument("--inner", required=True)
    _construct_args(p)
    p = action(dil_actions, "dil", "sum", dil_sum, "sum D + E")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    _construct_args(p)
    p = action(dil_actions, "dil", "impl", dil_impl, "implication dilator a -> b")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    _construct_args(p)
    p = action(dil_actions, "dil", "rcopy", dil_rcopy, "certified copy of a stream")
    p.add_argument("--stream", required=True)
    _construct_args(p)

    beta_actions = group("beta", "stage-n proof search")
    p = action(beta_actions, "beta", "search", beta_search, "search for a proof")
    _formula_args(p)
    p = action(beta_actions, "beta", "functor", beta_functor, "transport along n -> m")
    _formula_args(p, stage=False)
    p.add_argument("--from", dest="source", type=int, required=True)
    p.add_argument("--to", dest="target", type=int, required=True)
    p.add_argument("--map", help="images (default: drawn with --seed)")
    p = action(beta_actions, "beta", "check", beta_check, "audit a search tree as a proof")
    _formula_args(p)
    p = action(beta_actions, "beta", "countermodel", beta_countermodel, "read a countermodel off an open branch")
    _formula_args(p)
    p = action(beta_actions, "beta", "predilator", beta_predilator, "proof trees as a pre-dilator")
    _formula_args(p, stage=False)
    p.add_argument("--at", type=int, help="stage to list")
    p.add_argument("--list", type=int, default=10)
    p.add_argument("--check", type=int, metavar="N_MAX")

    norm_actions = group("norm", "theory stream probes")
    p = action(norm_actions, "norm", "prefix", norm_prefix, "sum of the first k claimed dilators")
    p.add_argument("--stream", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--at")
    p.add_argument("--list", type=int, default=10)
    for name, handler, help_text in (
        ("o12", norm_o12, "least grid point with an illfounded claimed dilator"),
        ("s12", norm_s12, "sup of least witnesses over claimed non-dilators"),
        ("classify", norm_classify, "category of a stream"),
    ):
        p = action(norm_actions, "norm", name, handler, help_text)
        p.add_argument("--stream", required=True)
    p = action(norm_actions, "norm", "relation", norm_relation, "prefix value against the block sum")
    p.add_argument("--stream", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--at", required=True)
    p = action(norm_actions, "norm", "epsilon", norm_epsilon, "witnesses of D composed with w-towers")
    p.add_argument("--dilator", required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--max-height", type=int, default=3)

    return table
