"""
First-order formulas over < with optional extra relation symbols

Covers the ASCII formula grammar, negation normal form, constant relabeling,
substitution and brute-force truth evaluation in finite-stage structures.
"""

import logging
import re
from dataclasses import dataclass, field
from itertools import chain, combinations, product
from typing import Callable, Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple, Union

from core.errors import ExpressionSyntaxError, MalformedFormulaError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Const:
    index: int

    def __str__(self) -> str:
        return f"c{self.index}"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


Term = Union[Const, Var]


class Formula:
    """Base of the formula AST; subclasses are frozen dataclasses"""


@dataclass(frozen=True)
class Less(Formula):
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} < {self.right}"


@dataclass(frozen=True)
class LessEq(Formula):
    left: Term
    right: Term

    def __str__(self) -> str:
        return f"{self.left} <= {self.right}"


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: Tuple[Term, ...]

    def __str__(self) -> str:
        return f"{self.name}({','.join(str(t) for t in self.args)})"


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def __str__(self) -> str:
        if isinstance(self.body, (Rel, Not)):
            return f"~{self.body}"
        return f"~({self.body})"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({_operand(self.left)} & {_operand(self.right)})"


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({_operand(self.left)} | {_operand(self.right)})"


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def __str__(self) -> str:
        return f"({_operand(self.left)} -> {_operand(self.right)})"


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula

    def __str__(self) -> str:
        return f"all {self.var} . {self.body}"


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def __str__(self) -> str:
        return f"ex {self.var} . {self.body}"


ATOMS = (Less, LessEq, Rel)
QUANTIFIERS = (Forall, Exists)


def _operand(formula: Formula) -> str:
    return f"({formula})" if isinstance(formula, QUANTIFIERS) else str(formula)


def is_atom(formula: Formula) -> bool:
    return isinstance(formula, ATOMS)


def is_literal(formula: Formula) -> bool:
    return is_atom(formula) or (isinstance(formula, Not) and is_atom(formula.body))


# --- parsing -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<op><=|->|[<&|~().,])|(?P<word>[A-Za-z_][A-Za-z0-9_]*))"
)


def _tokenize(text: str) -> List[Tuple[str, int]]:
    tokens = []
    position = 0
    text = text.rstrip()
    while position < len(text):
        match = _TOKEN.match(text, position)
        if not match or match.end() == position:
            bad = text[position:].strip()[:1]
            raise ExpressionSyntaxError(
                "unexpected character", token=bad, production="formula", position=position
            )
        tokens.append((match.group("op") or match.group("word"), match.start(match.lastindex)))
        position = match.end()
    return tokens


@dataclass
class _FormulaParser:
    text: str
    relations: Dict[str, int]
    infer: bool = False
    tokens: List[Tuple[str, int]] = field(default_factory=list)
    at: int = 0

    def __post_init__(self):
        self.tokens = _tokenize(self.text)

    def peek(self) -> Optional[str]:
        return self.tokens[self.at][0] if self.at < len(self.tokens) else None

    def position(self) -> int:
        return self.tokens[self.at][1] if self.at < len(self.tokens) else len(self.text)

    def fail(self, message: str, production: str) -> ExpressionSyntaxError:
        return ExpressionSyntaxError(
            message, token=self.peek() or "<end>", production=production, position=self.position()
        )

    def take(self, expected: Optional[str] = None, production: str = "formula") -> str:
        token = self.peek()
        if token is None or (expected is not None and token != expected):
            wanted = f"expected '{expected}'" if expected else "unexpected end of input"
            raise self.fail(wanted, production)
        self.at += 1
        return token

    def parse(self) -> Formula:
        formula = self.implication()
        if self.peek() is not None:
            raise self.fail("trailing input", "formula")
        return formula

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        formula = self.conjunction()
        while self.peek() == "|":
            self.take()
            formula = Or(formula, self.conjunction())
        return formula

    def conjunction(self) -> Formula:
        formula = self.unary()
        while self.peek() == "&":
            self.take()
            formula = And(formula, self.unary())
        return formula

    def unary(self) -> Formula:
        token = self.peek()
        if token == "~":
            self.take()
            return Not(self.unary())
        if token in ("all", "ex"):
            self.take()
            var = self.peek()
            if var is None or not _is_variable(var):
                raise self.fail("expected a variable", "quantifier")
            self.take()
            self.take(".", "quantifier")
            body = self.implication()
            return Forall(var, body) if token == "all" else Exists(var, body)
        if token == "(":
            self.take()
            formula = self.implication()
            self.take(")", "formula")
            return formula
        return self.atom()

    def term(self) -> Term:
        token = self.peek()
        if token is None:
            raise self.fail("expected a term", "term")
        if re.fullmatch(r"c\d+", token):
            self.take()
            return Const(int(token[1:]))
        if _is_variable(token):
            self.take()
            return Var(token)
        raise self.fail("expected a constant or variable", "term")

    def atom(self) -> Formula:
        token = self.peek()
        if token is not None and self._next_is("(") and self.infer and _is_variable(token):
            self.relations.setdefault(token, self._count_args())
        if token is not None and token in self.relations and self._next_is("("):
            name = self.take()
            self.take("(", "atom")
            args: List[Term] = []
            if self.peek() != ")":
                args.append(self.term())
                while self.peek() == ",":
                    self.take()
                    args.append(self.term())
            self.take(")", "atom")
            if len(args) != self.relations[name]:
                self.at -= 1
                raise self.fail(f"{name} takes {self.relations[name]} arguments", "atom")
            return Rel(name, tuple(args))
        if token is not None and self._next_is("("):
            raise self.fail("undeclared relation symbol", "atom")
        left = self.term()
        op = self.peek()
        if op not in ("<", "<="):
            raise self.fail("expected '<' or '<='", "atom")
        self.take()
        right = self.term()
        return Less(left, right) if op == "<" else LessEq(left, right)

    def _count_args(self) -> int:
        """Arity of the application starting at the current token"""
        at = self.at + 2
        if at < len(self.tokens) and self.tokens[at][0] == ")":
            return 0
        arity = 1
        while at < len(self.tokens) and self.tokens[at][0] != ")":
            if self.tokens[at][0] == ",":
                arity += 1
            at += 1
        return arity

    def _next_is(self, token: str) -> bool:
        return self.at + 1 < len(self.tokens) and self.tokens[self.at + 1][0] == token


_KEYWORDS = {"all", "ex"}


def _is_variable(token: str) -> bool:
    return (
        re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token) is not None
        and token not in _KEYWORDS
        and not re.fullmatch(r"c\d+", token)
    )


def parse_formula(
    text: str,
    relations: Optional[Mapping[str, int]] = None,
    infer_relations: bool = False,
) -> Formula:
    """Parse the ASCII formula grammar.

    `relations` declares extra symbols and their arities; with infer_relations
    any NAME(...) is an extra symbol whose arity is fixed by its first use.
    """
    return _FormulaParser(text, dict(relations or {}), infer_relations).parse()


def parse_relation_decl(text: str) -> Tuple[str, int]:
    """'R2:2' -> ('R2', 2)"""
    match = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*):(\d+)", text.strip())
    if not match or match.group(1) in _KEYWORDS or re.fullmatch(r"c\d+", match.group(1)):
        raise ExpressionSyntaxError(
            "relation declarations look like NAME:ARITY", token=text, production="rel"
        )
    return match.group(1), int(match.group(2))


# --- structure of formulas ---------------------------------------------------


def _map_terms(formula: Formula, fn: Callable[[Term], Term]) -> Formula:
    if isinstance(formula, Less):
        return Less(fn(formula.left), fn(formula.right))
    if isinstance(formula, LessEq):
        return LessEq(fn(formula.left), fn(formula.right))
    if isinstance(formula, Rel):
        return Rel(formula.name, tuple(fn(t) for t in formula.args))
    if isinstance(formula, Not):
        return Not(_map_terms(formula.body, fn))
    if isinstance(formula, (And, Or, Implies)):
        return type(formula)(_map_terms(formula.left, fn), _map_terms(formula.right, fn))
    if isinstance(formula, QUANTIFIERS):
        return type(formula)(formula.var, _map_terms(formula.body, fn))
    raise MalformedFormulaError(f"not a formula: {formula!r}")


def substitute(formula: Formula, var: str, const: Const) -> Formula:
    """Replace free occurrences of var by const"""
    if isinstance(formula, QUANTIFIERS):
        if formula.var == var:
            return formula
        return type(formula)(formula.var, substitute(formula.body, var, const))
    if isinstance(formula, Not):
        return Not(substitute(formula.body, var, const))
    if isinstance(formula, (And, Or, Implies)):
        return type(formula)(
            substitute(formula.left, var, const), substitute(formula.right, var, const)
        )
    return _map_terms(formula, lambda t: const if t == Var(var) else t)


def relabel(formula: Formula, f: Callable[[int], int]) -> Formula:
    """Rename every constant c_i to c_f(i)"""
    return _map_terms(formula, lambda t: Const(f(t.index)) if isinstance(t, Const) else t)


def _terms_of(formula: Formula) -> Iterator[Term]:
    if isinstance(formula, (Less, LessEq)):
        yield formula.left
        yield formula.right
    elif isinstance(formula, Rel):
        yield from formula.args
    elif isinstance(formula, Not):
        yield from _terms_of(formula.body)
    elif isinstance(formula, (And, Or, Implies)):
        yield from _terms_of(formula.left)
        yield from _terms_of(formula.right)
    elif isinstance(formula, QUANTIFIERS):
        yield from _terms_of(formula.body)


def constants(formula: Formula) -> FrozenSet[int]:
    return frozenset(t.index for t in _terms_of(formula) if isinstance(t, Const))


def free_variables(formula: Formula) -> FrozenSet[str]:
    if isinstance(formula, QUANTIFIERS):
        return free_variables(formula.body) - {formula.var}
    if isinstance(formula, Not):
        return free_variables(formula.body)
    if isinstance(formula, (And, Or, Implies)):
        return free_variables(formula.left) | free_variables(formula.right)
    return frozenset(t.name for t in _terms_of(formula) if isinstance(t, Var))


def relation_symbols(formula: Formula) -> Dict[str, int]:
    found: Dict[str, int] = {}

    def walk(node: Formula):
        if isinstance(node, Rel):
            found[node.name] = len(node.args)
        elif isinstance(node, Not):
            walk(node.body)
        elif isinstance(node, (And, Or, Implies)):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, QUANTIFIERS):
            walk(node.body)

    walk(formula)
    return found


def is_closed(formula: Formula) -> bool:
    return not free_variables(formula)


def nnf(formula: Formula) -> Formula:
    """Negation normal form: implications removed, negations only on atoms"""
    if is_atom(formula):
        return formula
    if isinstance(formula, And):
        return And(nnf(formula.left), nnf(formula.right))
    if isinstance(formula, Or):
        return Or(nnf(formula.left), nnf(formula.right))
    if isinstance(formula, Implies):
        return Or(nnf(Not(formula.left)), nnf(formula.right))
    if isinstance(formula, Forall):
        return Forall(formula.var, nnf(formula.body))
    if isinstance(formula, Exists):
        return Exists(formula.var, nnf(formula.body))
    if isinstance(formula, Not):
        body = formula.body
        if is_atom(body):
            return formula
        if isinstance(body, Not):
            return nnf(body.body)
        if isinstance(body, And):
            return Or(nnf(Not(body.left)), nnf(Not(body.right)))
        if isinstance(body, Or):
            return And(nnf(Not(body.left)), nnf(Not(body.right)))
        if isinstance(body, Implies):
            return And(nnf(body.left), nnf(Not(body.right)))
        if isinstance(body, Forall):
            return Exists(body.var, nnf(Not(body.body)))
        if isinstance(body, Exists):
            return Forall(body.var, nnf(Not(body.body)))
    raise MalformedFormulaError(f"not a formula: {formula!r}")


def negate(formula: Formula) -> Formula:
    """Dual of an NNF formula, again in NNF"""
    return nnf(Not(formula))


# --- semantics ---------------------------------------------------------------


@dataclass(frozen=True)
class BetaStructure:
    """A stage-n structure: domain {0..n-1} with < the natural order; extra
    symbols are sets of tuples over the domain"""

    stage: int
    relations: Mapping[str, FrozenSet[Tuple[int, ...]]] = field(default_factory=dict)

    def __post_init__(self):
        if self.stage < 0:
            raise ValueError(f"stage must be non-negative, got {self.stage}")
        for name, tuples in self.relations.items():
            outside = [t for t in tuples if any(not 0 <= x < self.stage for x in t)]
            if outside:
                raise ValueError(f"{name}{outside[0]} is not within stage {self.stage}")

    @property
    def universe(self) -> range:
        return range(self.stage)

    def holds(self, name: str, args: Tuple[int, ...]) -> bool:
        return args in self.relations.get(name, frozenset())

    def describe(self) -> Dict[str, object]:
        return {
            "stage": self.stage,
            "universe": list(self.universe),
            "relations": {
                name: sorted(list(t) for t in tuples) for name, tuples in sorted(self.relations.items())
            },
        }


def _value(term: Term, env: Mapping[str, int], stage: int) -> int:
    if isinstance(term, Const):
        if term.index >= stage:
            raise MalformedFormulaError(f"{term} is not a constant of stage {stage}")
        return term.index
    if term.name not in env:
        raise MalformedFormulaError(f"free variable {term.name}")
    return env[term.name]


def eval_in_structure(
    formula: Formula, structure: BetaStructure, env: Optional[Mapping[str, int]] = None
) -> bool:
    """Truth of a formula; quantifiers range over 0..n-1"""
    env = dict(env or {})
    n = structure.stage
    if isinstance(formula, Less):
        return _value(formula.left, env, n) < _value(formula.right, env, n)
    if isinstance(formula, LessEq):
        return _value(formula.left, env, n) <= _value(formula.right, env, n)
    if isinstance(formula, Rel):
        return structure.holds(formula.name, tuple(_value(t, env, n) for t in formula.args))
    if isinstance(formula, Not):
        return not eval_in_structure(formula.body, structure, env)
    if isinstance(formula, And):
        return eval_in_structure(formula.left, structure, env) and eval_in_structure(
            formula.right, structure, env
        )
    if isinstance(formula, Or):
        return eval_in_structure(formula.left, structure, env) or eval_in_structure(
            formula.right, structure, env
        )
    if isinstance(formula, Implies):
        return not eval_in_structure(formula.left, structure, env) or eval_in_structure(
            formula.right, structure, env
        )
    if isinstance(formula, QUANTIFIERS):
        outcomes = (
            eval_in_structure(formula.body, structure, {**env, formula.var: x})
            for x in structure.universe
        )
        return all(outcomes) if isinstance(formula, Forall) else any(outcomes)
    raise MalformedFormulaError(f"not a formula: {formula!r}")


def _subsets(items: List) -> Iterator[Tuple]:
    return chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))


def stage_structures(stage: int, relations: Mapping[str, int]) -> Iterator[BetaStructure]:
    """Every interpretation of the extra symbols over the stage-n domain"""
    names = sorted(relations)
    spaces = [list(product(range(stage), repeat=relations[name])) for name in names]
    for choice in product(*(list(_subsets(space)) for space in spaces)):
        yield BetaStructure(stage, {name: frozenset(tuples) for name, tuples in zip(names, choice)})


def valid_at_stage(
    formula: Formula, stage: int, relations: Optional[Mapping[str, int]] = None
) -> bool:
    """Truth in every stage-n structure"""
    signature = dict(relation_symbols(formula))
    signature.update(relations or {})
    beyond = [c for c in constants(formula) if c >= stage]
    if beyond:
        raise MalformedFormulaError(f"{formula} names constants beyond stage {stage}")
    return all(
        eval_in_structure(formula, structure) for structure in stage_structures(stage, signature)
    )
