"""
Expression grammars and fixture loaders

Orders:    fin:[c0,c1,...] | cnf:<ordinal> | ws | sum(O,O) | disj(O,O)
           | kb:@file | kb:[[...],...] | desc(O) | eval(D,O)
Dilators:  id | expw | const(O) | impl(O,O) | sum(D,D) | comp(D,D)
           | osum(@file,k) | rcopy(@file) | table(@file) | proof("formula")
Ordinals:  sums, products and powers of w and naturals, e.g. w^w+w*2+3

File references are resolved against the directory of the referencing file,
or the working directory for command-line text.
"""

import base64
import binascii
import json
import logging
import re
from pathlib import Path
from typing import Any, List, Optional, Tuple, Union

from core.betaproof import ProofSystem
from core.combinators import (
    ComposedSystem,
    ConstantSystem,
    ExpOmegaSystem,
    IdentitySystem,
    ImplicationSystem,
    SumSystem,
    TableSystem,
    omega_sum,
    recursive_copy,
)
from core.dilator import DenotationSystem, EvaluatedOrder
from core.errors import ExpressionSyntaxError, FixtureError
from core.formulas import parse_formula
from core.linord import (
    CnfOrder,
    DescendingTree,
    DisjOrder,
    FiniteOrder,
    KbOrder,
    LinearOrder,
    OmegaStar,
    SumOrder,
)
from core.ordinals import OMEGA, Ordinal, cnf_add, cnf_mul, cnf_power
from core.streams import StreamEntry, TheoryStream
from core.trees import FiniteTree

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise FixtureError(f"cannot read {path}: {e.strerror or e}") from e
    except json.JSONDecodeError as e:
        logger.error(f"Invalid JSON in {path}: {e}")
        raise FixtureError(f"invalid JSON in {path}: {e.msg} at line {e.lineno}") from e


def _tree_nodes(data: Any) -> List[Tuple[int, ...]]:
    if not isinstance(data, list) or not all(isinstance(node, list) for node in data):
        raise ValueError("a tree is a JSON array of integer arrays")
    nodes = []
    for node in data:
        if not all(isinstance(x, int) and not isinstance(x, bool) and x >= 0 for x in node):
            raise ValueError(f"tree labels must be naturals: {node}")
        nodes.append(tuple(node))
    return nodes


def load_tree(path: PathLike, expr: Optional[str] = None) -> FiniteTree:
    data = read_json(path)
    try:
        return FiniteTree(_tree_nodes(data), expr=expr)
    except ValueError as e:
        raise FixtureError(f"invalid tree in {path}: {e}") from e


def load_table(path: PathLike, source: Optional[str] = None) -> TableSystem:
    return TableSystem.from_json(read_json(path), source=source or str(path))


def _certificate(raw: Optional[str], expr: str, where: str) -> Tuple[bytes, bool]:
    if raw is None:
        return expr.encode("utf-8"), False
    try:
        return base64.b64decode(raw, validate=True), True
    except (binascii.Error, ValueError) as e:
        raise FixtureError(f"certificate for {expr} in {where} is not base64") from e


def load_stream(path: PathLike) -> TheoryStream:
    """Read a stream file: {"positive": [...], "negative": [...]} where entries are
    dilator expressions or {"expr": ..., "certificate": base64}"""
    data = read_json(path)
    where = str(path)
    if not isinstance(data, dict):
        raise FixtureError(f"stream {where} must be a JSON object")
    base_dir = Path(path).parent
    lists = {}
    for side in ("positive", "negative"):
        items = data.get(side, [])
        if not isinstance(items, list):
            raise FixtureError(f"'{side}' in {where} must be an array")
        entries = []
        for item in items:
            if isinstance(item, str):
                expr, raw = item, None
            elif isinstance(item, dict) and isinstance(item.get("expr"), str):
                expr, raw = item["expr"], item.get("certificate")
            else:
                raise FixtureError(f"bad {side} entry in {where}: {item!r}")
            system = parse_dilator(expr, base_dir)
            certificate, certified = _certificate(raw, system.expr, where)
            entries.append(StreamEntry(system, certificate, certified))
        lists[side] = tuple(entries)
    stream = TheoryStream(lists["positive"], lists["negative"], source=where, name=data.get("name"))
    logger.info(
        f"Loaded stream {where}: {len(stream.positive)} positive, {len(stream.negative)} negative"
    )
    return stream


class ExpressionParser:
    """Recursive-descent parser over the raw text of one expression"""

    def __init__(self, text: str, base_dir: Optional[PathLike] = None):
        self.text = text
        self.pos = 0
        self.base_dir = Path(base_dir) if base_dir is not None else Path.cwd()

    # --- scanning --------------------------------------------------------

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def upcoming(self) -> str:
        self.skip()
        match = re.compile(r"[A-Za-z_][A-Za-z0-9_]*:?|\d+|.").match(self.text, self.pos)
        return match.group(0) if match else "<end>"

    def fail(self, message: str, production: str) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(
            message, token=self.upcoming(), production=production, position=self.pos
        )

    def accept(self, literal: str, word: bool = False) -> bool:
        self.skip()
        if not self.text.startswith(literal, self.pos):
            return False
        end = self.pos + len(literal)
        if word and end < len(self.text) and (self.text[end].isalnum() or self.text[end] == "_"):
            return False
        self.pos = end
        return True

    def expect(self, literal: str, production: str):
        if not self.accept(literal):
            raise self.fail(f"expected '{literal}'", production)

    def natural(self, production: str) -> int:
        self.skip()
        match = re.compile(r"\d+").match(self.text, self.pos)
        if not match:
            raise self.fail("expected a natural number", production)
        self.pos = match.end()
        return int(match.group(0))

    def file_ref(self, production: str) -> Tuple[str, Path]:
        self.expect("@", production)
        match = re.compile(r"[^,()\s]+").match(self.text, self.pos)
        if not match:
            raise self.fail("expected a file name", production)
        self.pos = match.end()
        written = match.group(0)
        return written, self.base_dir / written

    def finish(self, production: str):
        if not self.at_end():
            raise self.fail("trailing input", production)

    # --- ordinals --------------------------------------------------------

    def cnf_sum(self) -> Ordinal:
        total = self.cnf_product()
        while self.accept("+"):
            total = cnf_add(total, self.cnf_product())
        return total

    def cnf_product(self) -> Ordinal:
        total = self.cnf_power()
        while self.accept("*"):
            total = cnf_mul(total, self.cnf_power())
        return total

    def cnf_power(self) -> Ordinal:
        base = self.cnf_atom()
        if self.accept("^"):
            return cnf_power(base, self.cnf_power())
        return base

    def cnf_atom(self) -> Ordinal:
        if self.accept("("):
            value = self.cnf_sum()
            self.expect(")", "cnf")
            return value
        if self.accept("w"):
            return OMEGA
        self.skip()
        if self.pos < len(self.text) and self.text[self.pos].isdigit():
            return Ordinal.from_int(self.natural("cnf"))
        raise self.fail("expected w, a natural number or '('", "cnf")

    # --- orders ----------------------------------------------------------

    def order(self) -> LinearOrder:
        start = self.pos
        if self.accept("fin:"):
            self.expect("[", "fin")
            codes: List[int] = []
            if not self.accept("]"):
                codes.append(self.natural("fin"))
                while self.accept(","):
                    codes.append(self.natural("fin"))
                self.expect("]", "fin")
            if len(set(codes)) != len(codes):
                self.pos = start
                raise self.fail("duplicate code in finite order", "fin")
            return FiniteOrder(codes)
        if self.accept("cnf:"):
            return CnfOrder(self.cnf_sum())
        if self.accept("ws", word=True):
            return OmegaStar()
        if self.accept("kb:"):
            return self.kb_tree()
        for name in ("sum", "disj"):
            if self.accept(name + "("):
                left = self.order()
                self.expect(",", name)
                right = self.order()
                self.expect(")", name)
                return SumOrder((left, right)) if name == "sum" else DisjOrder(left, right)
        if self.accept("desc("):
            inner = self.order()
            self.expect(")", "desc")
            return KbOrder(DescendingTree(inner))
        if self.accept("eval("):
            system = self.dilator()
            self.expect(",", "eval")
            argument = self.order()
            self.expect(")", "eval")
            return EvaluatedOrder(system, argument)
        raise self.fail("expected an order expression", "order")

    def kb_tree(self) -> KbOrder:
        self.skip()
        if self.text.startswith("@", self.pos):
            written, path = self.file_ref("kb")
            return KbOrder(load_tree(path, expr=f"kb:@{written}"))
        if self.text.startswith("[", self.pos):
            try:
                data, end = json.JSONDecoder().raw_decode(self.text, self.pos)
                tree = FiniteTree(_tree_nodes(data))
            except (json.JSONDecodeError, ValueError) as e:
                raise self.fail(f"invalid inline tree: {e}", "kb") from e
            self.pos = end
            return KbOrder(tree)
        raise self.fail("expected @file or an inline JSON tree", "kb")

    # --- dilators --------------------------------------------------------

    def dilator(self) -> DenotationSystem:
        if self.accept("id", word=True):
            return IdentitySystem()
        if self.accept("expw", word=True):
            return ExpOmegaSystem()
        if self.accept("const("):
            a = self.order()
            self.expect(")", "const")
            return ConstantSystem(a)
        if self.accept("impl("):
            a = self.order()
            self.expect(",", "impl")
            b = self.order()
            self.expect(")", "impl")
            return ImplicationSystem(a, b)
        for name in ("sum", "comp"):
            if self.accept(name + "("):
                left = self.dilator()
                self.expect(",", name)
                right = self.dilator()
                self.expect(")", name)
                return SumSystem((left, right)) if name == "sum" else ComposedSystem(left, right)
        if self.accept("osum("):
            written, path = self.file_ref("osum")
            self.expect(",", "osum")
            k = self.natural("osum")
            self.expect(")", "osum")
            stream = load_stream(path)
            return omega_sum(stream.systems(), k, label=f"osum(@{written},{k})")
        if self.accept("rcopy("):
            written, path = self.file_ref("rcopy")
            self.expect(")", "rcopy")
            stream = load_stream(path)
            return recursive_copy(
                [(e.system, e.certificate) for e in stream.positive], label=f"rcopy(@{written})"
            )
        if self.accept("table("):
            written, path = self.file_ref("table")
            self.expect(")", "table")
            return load_table(path, source=written)
        if self.accept("proof("):
            self.expect('"', "proof")
            end = self.text.find('"', self.pos)
            if end < 0:
                raise self.fail("unterminated formula string", "proof")
            formula = parse_formula(self.text[self.pos : end], infer_relations=True)
            self.pos = end + 1
            self.expect(")", "proof")
            return ProofSystem(formula)
        raise self.fail("expected a dilator expression", "dilator")


def parse_order(text: str, base_dir: Optional[PathLike] = None) -> LinearOrder:
    parser = ExpressionParser(text, base_dir)
    order = parser.order()
    parser.finish("order")
    return order


def parse_dilator(text: str, base_dir: Optional[PathLike] = None) -> DenotationSystem:
    parser = ExpressionParser(text, base_dir)
    system = parser.dilator()
    parser.finish("dilator")
    return system


def parse_cnf(text: str) -> Ordinal:
    """An ordinal notation, with or without the cnf: prefix"""
    parser = ExpressionParser(text)
    parser.accept("cnf:")
    value = parser.cnf_sum()
    parser.finish("cnf")
    return value


def parse_grid(text: str) -> List[Ordinal]:
    """'cnf:w,cnf:w^2,...' as a sorted list without repeats"""
    if not text.strip():
        raise ExpressionSyntaxError("empty grid", token="<end>", production="grid", position=0)
    values = {parse_cnf(part) for part in text.split(",")}
    return sorted(values)


def parse_map(text: str) -> Tuple[int, ...]:
    """'1,3' -> (1, 3); the empty string is the empty map"""
    if not text.strip():
        return ()
    images = []
    for position, part in enumerate(text.split(",")):
        if not part.strip().isdigit():
            raise ExpressionSyntaxError(
                "map values must be naturals", token=part.strip(), production="map", position=position
            )
        images.append(int(part))
    return tuple(images)


__all__ = [
    "ExpressionParser",
    "load_stream",
    "load_table",
    "load_tree",
    "parse_cnf",
    "parse_dilator",
    "parse_grid",
    "parse_map",
    "parse_order",
    "read_json",
]
