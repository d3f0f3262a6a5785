"""
Stage-n proof search for beta-logic

A one-sided, cut-free calculus over sequents in negation normal form. Universal
formulas are expanded by the n-rule (one premise per constant c_i, i < n) and
existentials are instantiated with every constant named so far. A sequent that
is otherwise saturated but still holds an existential is passed to the domain
rule, which names one more constant (one premise per unnamed c_i), so open
leaves are saturated over the whole domain {0..n-1}. The principal formula is
the first reducible one and premises append their new formulas at the end, so
the tree at stage m extends the constant relabeling of the tree at stage n
along any embedding n -> m.
"""

import logging
import threading
from dataclasses import dataclass, field
from itertools import count
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Hashable,
    Iterator,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from config import DEFAULT_BUDGET_DEPTH, DEFAULT_PROOF_DEPTH
from core.budget import BudgetMeter
from core.dilator import Denotation, FlatSystem, MergePattern
from core.errors import (
    ArityMismatchError,
    BranchNotSaturatedError,
    MalformedFormulaError,
    StructureMismatchError,
)
from core.formulas import (
    And,
    BetaStructure,
    Const,
    Exists,
    Forall,
    Formula,
    Less,
    LessEq,
    Not,
    Or,
    Rel,
    constants,
    eval_in_structure,
    free_variables,
    is_closed,
    is_literal,
    nnf,
    relabel,
    relation_symbols,
    stage_structures,
    substitute,
    valid_at_stage,
)
from core.linord import KbOrder
from core.models import Cmp, ProofStatus, RuleTag
from core.trees import FiniteTree, kb_compare

logger = logging.getLogger(__name__)

Address = Tuple[int, ...]

# Rules whose premises are indexed by constants
INDEXED_RULES = (RuleTag.FORALL, RuleTag.DOMAIN)


class SearchState(NamedTuple):
    sequent: Tuple[Formula, ...]
    named: FrozenSet[int]
    instantiated: FrozenSet[Tuple[Formula, int]]


@dataclass
class ProofNode:
    sequent: Tuple[Formula, ...]
    named: FrozenSet[int]
    instantiated: FrozenSet[Tuple[Formula, int]]
    rule: RuleTag
    principal: Optional[Formula] = None
    label: Optional[int] = None
    children: List["ProofNode"] = field(default_factory=list)

    @property
    def state(self) -> SearchState:
        return SearchState(self.sequent, self.named, self.instantiated)

    def child(self, label: int) -> Optional["ProofNode"]:
        for node in self.children:
            if node.label == label:
                return node
        return None


@dataclass
class ProofTree:
    """Search tree for one formula at one stage"""

    formula: Formula
    stage: int
    depth: int
    root: ProofNode
    status: ProofStatus = ProofStatus.CLOSED
    open_branch: Optional[List[Address]] = None

    def walk(self) -> Iterator[Tuple[Address, ProofNode]]:
        """Nodes in depth-first order with their addresses"""
        stack: List[Tuple[Address, ProofNode]] = [((), self.root)]
        while stack:
            address, node = stack.pop()
            yield address, node
            for child in reversed(node.children):
                stack.append((address + (child.label,), child))

    def node_at(self, address: Sequence[int]) -> Optional[ProofNode]:
        node: Optional[ProofNode] = self.root
        for label in address:
            node = node.child(label) if node else None
        return node

    @property
    def size(self) -> int:
        return sum(1 for _ in self.walk())

    def leaves(self) -> List[Tuple[Address, ProofNode]]:
        return [(a, n) for a, n in self.walk() if not n.children]

    def kb_order(self) -> KbOrder:
        return KbOrder(FiniteTree([address for address, _ in self.walk()]))


# --- rules -------------------------------------------------------------------


def _constant_pair(formula: Formula) -> Optional[Tuple[int, int]]:
    if isinstance(formula.left, Const) and isinstance(formula.right, Const):
        return formula.left.index, formula.right.index
    return None


def is_true_order_literal(formula: Formula) -> bool:
    """c_i < c_j with i < j, c_i <= c_j with i <= j, or the negation of a false one"""
    negated = isinstance(formula, Not)
    atom = formula.body if negated else formula
    if not isinstance(atom, (Less, LessEq)):
        return False
    pair = _constant_pair(atom)
    if pair is None:
        return False
    i, j = pair
    truth = i < j if isinstance(atom, Less) else i <= j
    return truth != negated


def axiom_of(sequent: Sequence[Formula]) -> Optional[Formula]:
    """The formula that closes the sequent, if any"""
    present = set(sequent)
    for formula in sequent:
        if is_true_order_literal(formula):
            return formula
        if isinstance(formula, Rel) and Not(formula) in present:
            return formula
    return None


def _used(state: SearchState, formula: Formula) -> FrozenSet[int]:
    return frozenset(c for g, c in state.instantiated if g == formula)


def is_reducible(formula: Formula, state: SearchState) -> bool:
    if is_literal(formula):
        return False
    if isinstance(formula, Exists):
        return bool(state.named - _used(state, formula))
    return True


def _extend(rest: Sequence[Formula], new: Sequence[Formula]) -> Tuple[Formula, ...]:
    sequent = list(rest)
    for formula in new:
        if formula not in sequent:
            sequent.append(formula)
    return tuple(sequent)


def apply_rule(
    state: SearchState, index: int, stage: int
) -> Tuple[RuleTag, List[Tuple[int, SearchState]]]:
    """Premises of the rule with principal formula state.sequent[index]"""
    principal = state.sequent[index]
    rest = state.sequent[:index] + state.sequent[index + 1 :]
    if isinstance(principal, And):
        return RuleTag.AND, [
            (0, state._replace(sequent=_extend(rest, [principal.left]))),
            (1, state._replace(sequent=_extend(rest, [principal.right]))),
        ]
    if isinstance(principal, Or):
        return RuleTag.OR, [
            (0, state._replace(sequent=_extend(rest, [principal.left, principal.right])))
        ]
    if isinstance(principal, Forall):
        return RuleTag.FORALL, [
            (
                i,
                state._replace(
                    sequent=_extend(rest, [substitute(principal.body, principal.var, Const(i))]),
                    named=state.named | {i},
                ),
            )
            for i in range(stage)
        ]
    if isinstance(principal, Exists):
        fresh = sorted(state.named - _used(state, principal))
        instances = [substitute(principal.body, principal.var, Const(j)) for j in fresh]
        return RuleTag.EXISTS, [
            (
                0,
                SearchState(
                    _extend(rest, instances) + (principal,),
                    state.named,
                    state.instantiated | {(principal, j) for j in fresh},
                ),
            )
        ]
    raise MalformedFormulaError(f"no rule applies to {principal}")


def expand(state: SearchState, stage: int):
    """The canonical step: (rule, principal, premises) for a search state"""
    closing = axiom_of(state.sequent)
    if closing is not None:
        return RuleTag.AXIOM, closing, []
    for index, formula in enumerate(state.sequent):
        if is_reducible(formula, state):
            rule, premises = apply_rule(state, index, stage)
            return rule, formula, premises
    unnamed = [i for i in range(stage) if i not in state.named]
    if unnamed and any(isinstance(g, Exists) for g in state.sequent):
        return RuleTag.DOMAIN, None, [
            (i, state._replace(named=state.named | {i})) for i in unnamed
        ]
    return RuleTag.OPEN, None, []


def rules_agree(source: RuleTag, target: RuleTag) -> bool:
    """Rule tags of a node and its relabeled counterpart at a larger stage.

    A leaf saturated over all n constants may still extend the domain at m > n.
    """
    if source is target:
        return True
    return source is RuleTag.OPEN and target in (RuleTag.DOMAIN, RuleTag.CUTOFF)


def _check_root(formula: Formula, stage: int):
    if stage < 0:
        raise ValueError(f"stage must be non-negative, got {stage}")
    if not is_closed(formula):
        raise MalformedFormulaError(
            f"{formula} has free variables {sorted(free_variables(formula))}"
        )
    beyond = [c for c in constants(formula) if c >= stage]
    if beyond:
        raise MalformedFormulaError(f"{formula} names c{beyond[0]} at stage {stage}")


def proof_search(
    formula: Formula,
    stage: int,
    depth: int = DEFAULT_BUDGET_DEPTH,
    meter: Optional[BudgetMeter] = None,
) -> ProofTree:
    """Build the canonical search tree for the one-formula sequent {nnf(formula)}.

    Nodes at `depth` that would need premises become cutoff leaves, as do all
    pending nodes once the meter runs out.
    """
    _check_root(formula, stage)
    if depth < 0:
        raise ValueError(f"depth must be non-negative, got {depth}")
    start = SearchState((nnf(formula),), constants(formula), frozenset())

    def build(state: SearchState, label: Optional[int], level: int) -> ProofNode:
        rule, principal, premises = expand(state, stage)
        node = ProofNode(state.sequent, state.named, state.instantiated, rule, principal, label)
        if not premises:
            return node
        if level >= depth or (meter is not None and not meter.spend()):
            node.rule, node.principal = RuleTag.CUTOFF, None
            return node
        node.children = [build(child, i, level + 1) for i, child in premises]
        return node

    tree = ProofTree(formula, stage, depth, build(start, None, 0))
    _settle_status(tree)
    logger.info(
        f"Proof search for {formula} at stage {stage}: {tree.status.value} ({tree.size} nodes)"
    )
    return tree


def _settle_status(tree: ProofTree):
    cutoff = False
    for address, node in tree.walk():
        if node.rule is RuleTag.OPEN:
            tree.status = ProofStatus.OPEN
            tree.open_branch = [address[:k] for k in range(len(address) + 1)]
            return
        if node.rule is RuleTag.CUTOFF:
            cutoff = True
    tree.status = ProofStatus.DEPTH_EXHAUSTED if cutoff else ProofStatus.CLOSED
    tree.open_branch = None


# --- functoriality -----------------------------------------------------------


def _images_of(f: Sequence[int], n: int, m: int) -> Tuple[int, ...]:
    images = tuple(f)
    if len(images) != n:
        raise ArityMismatchError(f"map has {len(images)} values, stage {n} needs {n}")
    if any(not 0 <= y < m for y in images) or any(x >= y for x, y in zip(images, images[1:])):
        raise ArityMismatchError(f"{list(images)} is not an increasing map {n} -> {m}")
    return images


def relabel_state(state: SearchState, f: Callable[[int], int]) -> SearchState:
    return SearchState(
        tuple(relabel(g, f) for g in state.sequent),
        frozenset(f(c) for c in state.named),
        frozenset((relabel(g, f), f(c)) for g, c in state.instantiated),
    )


@dataclass
class ProofEmbedding:
    """P(f): node map between the search trees at stages n and m"""

    images: Tuple[int, ...]
    source: ProofTree
    target: ProofTree
    node_map: Dict[Address, Address]

    def __call__(self, address: Address) -> Address:
        return self.node_map[address]

    def then(self, after: "ProofEmbedding") -> "ProofEmbedding":
        """after . self"""
        return ProofEmbedding(
            tuple(after.images[y] for y in self.images),
            self.source,
            after.target,
            {a: after.node_map[b] for a, b in self.node_map.items()},
        )

    def violations(self) -> List[str]:
        """Failures of: root to root, predecessor preservation, relabel-only"""
        problems = []
        if self.node_map.get(()) != ():
            problems.append("conclusion is not mapped to the conclusion")
        f = self.images.__getitem__
        for address, node in self.source.walk():
            image = self.node_map.get(address)
            if image is None:
                problems.append(f"node {list(address)} has no image")
                continue
            if address and self.node_map.get(address[:-1]) != image[:-1]:
                problems.append(f"predecessor of {list(address)} not preserved")
            target = self.target.node_at(image)
            if (
                target is None
                or target.state != relabel_state(node.state, f)
                or not rules_agree(node.rule, target.rule)
            ):
                problems.append(f"node {list(address)} is not relabeled to {list(image)}")
        return problems


def map_address(address: Address, tree: ProofTree, f: Callable[[int], int]) -> Address:
    mapped = []
    node = tree.root
    for label in address:
        mapped.append(f(label) if node.rule in INDEXED_RULES else label)
        node = node.child(label)
        if node is None:
            raise StructureMismatchError(f"{list(address)} is not a node of the stage-{tree.stage} tree")
    return tuple(mapped)


def proof_functor(
    formula: Formula, f: Sequence[int], source: ProofTree, target: ProofTree
) -> ProofEmbedding:
    """The node map induced by relabeling c_i to c_f(i)"""
    if source.formula != formula or target.formula != formula:
        raise StructureMismatchError("search trees belong to a different formula")
    images = _images_of(f, source.stage, target.stage)
    fn = images.__getitem__
    node_map: Dict[Address, Address] = {}
    for address, node in source.walk():
        image = map_address(address, source, fn)
        counterpart = target.node_at(image)
        if counterpart is None:
            raise StructureMismatchError(f"node {list(address)} has no counterpart {list(image)}")
        same_state = counterpart.state == relabel_state(node.state, fn)
        if not rules_agree(node.rule, counterpart.rule) or not same_state:
            raise StructureMismatchError(
                f"node {list(address)} ({node.rule.value}) and {list(image)} "
                f"({counterpart.rule.value}) are not related by relabeling"
            )
        node_map[address] = image
    return ProofEmbedding(images, source, target, node_map)


# --- auditing ----------------------------------------------------------------


@dataclass
class ProofAudit:
    passed: bool = True
    problems: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def flag(self, problem: str):
        self.passed = False
        self.problems.append(problem)


def check_alpha_proof(tree: ProofTree) -> ProofAudit:
    """Check that a tree is a proof: closed variable-free sequents, correct
    axioms and premises matching their rules, with every leaf closed"""
    audit = ProofAudit()
    for address, node in tree.walk():
        where = list(address)
        for formula in node.sequent:
            if not is_closed(formula):
                audit.flag(f"free variables in {formula} at {where}")
            if any(c >= tree.stage for c in constants(formula)):
                audit.flag(f"{formula} at {where} names a constant beyond stage {tree.stage}")
        if node.rule is RuleTag.AXIOM:
            if node.children or axiom_of(node.sequent) is None:
                audit.flag(f"forged axiom at {where}: [{', '.join(map(str, node.sequent))}]")
            continue
        if node.rule in (RuleTag.OPEN, RuleTag.CUTOFF):
            audit.flag(f"{node.rule.value} leaf at {where}")
            continue
        if node.rule is RuleTag.DOMAIN:
            rule, _, premises = expand(node.state, tree.stage)
            if rule is not RuleTag.DOMAIN:
                audit.flag(f"domain rule at {where}, its sequent needs {rule.value}")
                continue
            expected = dict(premises)
        else:
            if node.principal not in node.sequent:
                audit.flag(f"principal formula at {where} is not in its sequent")
                continue
            rule, premises = apply_rule(node.state, node.sequent.index(node.principal), tree.stage)
            if rule is not node.rule:
                audit.flag(f"rule at {where} is {node.rule.value}, its principal needs {rule.value}")
                continue
            expected = dict(premises)
        present = {child.label: child for child in node.children}
        for label in sorted(set(expected) - set(present)):
            name = f"i={label}" if node.rule in INDEXED_RULES else f"#{label}"
            audit.flag(f"{node.rule.value} at {where} is missing premise {name}")
        for label in sorted(set(present) - set(expected)):
            audit.flag(f"{node.rule.value} at {where} has an unexpected premise {label}")
        for label, child in present.items():
            if label in expected and child.state != expected[label]:
                audit.flag(f"premise {label} at {where} does not follow from its rule")
    return audit


# --- semantics ---------------------------------------------------------------


def extract_countermodel(tree: ProofTree, branch: Optional[Sequence[Address]] = None) -> BetaStructure:
    """Read a stage-n structure off an open saturated branch: an extra atom holds
    exactly when its negation is on the branch"""
    branch = branch if branch is not None else tree.open_branch
    if not branch:
        raise BranchNotSaturatedError(f"search tree is {tree.status.value}, there is no open branch")
    leaf = tree.node_at(branch[-1])
    if leaf is None or leaf.rule is not RuleTag.OPEN or leaf.children:
        raise BranchNotSaturatedError(f"{list(branch[-1])} is not an open saturated leaf")
    if expand(leaf.state, tree.stage)[0] is not RuleTag.OPEN:
        raise BranchNotSaturatedError(f"{list(branch[-1])} is not saturated")
    relations: Dict[str, set] = {name: set() for name in relation_symbols(tree.formula)}
    for formula in leaf.sequent:
        if isinstance(formula, Not) and isinstance(formula.body, Rel):
            atom = formula.body
            relations.setdefault(atom.name, set()).add(tuple(t.index for t in atom.args))
    structure = BetaStructure(
        tree.stage, {name: frozenset(tuples) for name, tuples in relations.items()}
    )
    logger.info(f"Countermodel for {tree.formula} at stage {tree.stage}: {structure.describe()}")
    return structure


@dataclass
class SoundnessReport:
    passed: bool = True
    checked: int = 0
    failure: Optional[str] = None


def check_soundness(tree: ProofTree, relations: Optional[Mapping[str, int]] = None) -> SoundnessReport:
    """Every sequent of a closed tree holds in every stage-n structure"""
    report = SoundnessReport()
    if tree.status is not ProofStatus.CLOSED:
        report.passed = False
        report.failure = f"tree is {tree.status.value}"
        return report
    signature = dict(relation_symbols(tree.formula))
    signature.update(relations or {})
    for address, node in tree.walk():
        for structure in stage_structures(tree.stage, signature):
            report.checked += 1
            if not any(eval_in_structure(g, structure) for g in node.sequent):
                report.passed = False
                report.failure = f"sequent at {list(address)} fails in {structure.describe()}"
                return report
    return report


def check_completeness(formula: Formula, stage: int, depth: int = DEFAULT_BUDGET_DEPTH) -> bool:
    """Search closes exactly when the formula is valid at the stage"""
    tree = proof_search(formula, stage, depth)
    if tree.status is ProofStatus.DEPTH_EXHAUSTED:
        return False
    return (tree.status is ProofStatus.CLOSED) == valid_at_stage(formula, stage)


# --- export ------------------------------------------------------------------


def tree_to_json(tree: ProofTree) -> Dict[str, object]:
    return {
        "formula": str(tree.formula),
        "stage": tree.stage,
        "depth": tree.depth,
        "status": tree.status.value,
        "open_branch": [list(a) for a in tree.open_branch] if tree.open_branch else None,
        "nodes": [
            {
                "address": list(address),
                "rule": node.rule.value,
                "principal": str(node.principal) if node.principal is not None else None,
                "named": sorted(node.named),
                "sequent": [str(g) for g in node.sequent],
            }
            for address, node in tree.walk()
        ],
    }


def _dot_id(address: Address) -> str:
    return "n" + "_".join(str(x) for x in address) if address else "root"


def tree_to_dot(tree: ProofTree) -> str:
    lines = [f'digraph proof {{', f'  label="{tree.formula} @ {tree.stage}";', "  node [shape=box];"]
    for address, node in tree.walk():
        text = " , ".join(str(g) for g in node.sequent).replace('"', '\\"')
        lines.append(f'  {_dot_id(address)} [label="{node.rule.value}: {text}"];')
        if address:
            lines.append(f'  {_dot_id(address[:-1])} -> {_dot_id(address)} [label="{address[-1]}"];')
    lines.append("}")
    return "\n".join(lines)


# --- proof pre-dilators ------------------------------------------------------


class ProofSystem(FlatSystem):
    """proof(phi): n |-> KB order of the stage-n search tree of phi.

    A node with named constants S becomes the term (|S|, address with each
    constant label replaced by its rank in S, constant-label positions) applied
    to the sorted elements of S.
    """

    def __init__(self, formula: Formula, depth: int = DEFAULT_PROOF_DEPTH):
        super().__init__()
        if not is_closed(formula) or constants(formula):
            raise MalformedFormulaError(f"proof dilators need a closed constant-free formula, got {formula}")
        self.formula = formula
        self.depth = depth
        self._trees: Dict[int, ProofTree] = {}
        self._lock = threading.Lock()

    @property
    def expr(self) -> str:
        return f'proof("{self.formula}")'

    def tree(self, stage: int) -> ProofTree:
        with self._lock:
            if stage not in self._trees:
                self._trees[stage] = proof_search(self.formula, stage, self.depth)
            return self._trees[stage]

    @staticmethod
    def _kinds(tree: ProofTree, address: Address) -> Tuple[bool, ...]:
        kinds = []
        node = tree.root
        for label in address:
            kinds.append(node.rule in INDEXED_RULES)
            node = node.child(label)
        return tuple(kinds)

    def denotation_of(self, stage: int, address: Address) -> Denotation:
        tree = self.tree(stage)
        node = tree.node_at(address)
        if node is None:
            raise ArityMismatchError(f"{list(address)} is not a node at stage {stage}")
        args = tuple(sorted(node.named))
        rank = {c: r for r, c in enumerate(args)}
        kinds = self._kinds(tree, address)
        skeleton = tuple(rank[x] if k else x for x, k in zip(address, kinds))
        return Denotation((len(args), skeleton, kinds), args)

    def address_of(self, d: Denotation) -> Address:
        _, skeleton, kinds = d.term
        return tuple(d.args[x] if k else x for x, k in zip(skeleton, kinds))

    def _enumerate_terms(self, max_arity: Optional[int]) -> Iterator[Hashable]:
        for k in count():
            if max_arity is not None and k > max_arity:
                return
            full = frozenset(range(k))
            for address, node in self.tree(k).walk():
                if node.named == full:
                    yield self.denotation_of(k, address).term

    def arity(self, term: Hashable) -> int:
        return term[0]

    def is_term(self, term: Hashable) -> bool:
        if not isinstance(term, tuple) or len(term) != 3:
            return False
        k, skeleton, kinds = term
        if not isinstance(k, int) or k < 0 or len(skeleton) != len(kinds):
            return False
        tree = self.tree(k)
        node = tree.node_at(skeleton)
        return (
            node is not None
            and node.named == frozenset(range(k))
            and self._kinds(tree, skeleton) == tuple(kinds)
        )

    def pattern_compare(self, t: Hashable, s: Hashable, pattern: MergePattern) -> Cmp:
        left = tuple(pattern.left[x] if k else x for x, k in zip(t[1], t[2]))
        right = tuple(pattern.right[x] if k else x for x, k in zip(s[1], s[2]))
        return kb_compare(left, right)

    def finitely_many_terms(self, max_arity: Optional[int]) -> bool:
        return max_arity is not None


def proof_predilator(formula: Formula, depth: int = DEFAULT_PROOF_DEPTH) -> ProofSystem:
    return ProofSystem(formula, depth)
