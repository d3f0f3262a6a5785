"""
ptyx shared models
Enums and small result records used across orders, dilators, proofs and probes
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Generic, Optional, Tuple, TypeVar

T = TypeVar("T")


class Cmp(Enum):
    LT = "LT"
    EQ = "EQ"
    GT = "GT"

    @classmethod
    def of(cls, x: Any, y: Any) -> "Cmp":
        """Comparison under Python's native ordering"""
        if x < y:
            return cls.LT
        if y < x:
            return cls.GT
        return cls.EQ

    def flip(self) -> "Cmp":
        if self is Cmp.LT:
            return Cmp.GT
        if self is Cmp.GT:
            return Cmp.LT
        return self


class SearchStatus(Enum):
    """Outcome of a bounded search"""

    FOUND = "found"
    NONE = "none"  # search space exhausted: a definite negative
    BUDGET_EXHAUSTED = "budget-exhausted"


class ProofStatus(Enum):
    CLOSED = "closed"
    OPEN = "open-branch"
    DEPTH_EXHAUSTED = "depth-exhausted"


class RuleTag(Enum):
    """Rule applied at a proof-tree node"""

    AXIOM = "axiom"
    AND = "and"
    OR = "or"
    FORALL = "n-rule"
    EXISTS = "exists"
    DOMAIN = "domain"
    OPEN = "open"  # saturated leaf
    CUTOFF = "cutoff"  # depth limit reached


class ProbeVerdict(Enum):
    WITNESS_FOUND = "witness-found"
    NO_WITNESS = "no-witness-within-budget"


class Category(Enum):
    A = "A"
    B = "B"
    C_OR_D = "C-or-D-indistinguishable"


@dataclass(frozen=True)
class SearchResult(Generic[T]):
    """Result of a bounded search: a confirmed value when status is FOUND, at
    most an unconfirmed candidate otherwise"""

    status: SearchStatus
    value: Optional[T] = None
    spent: int = 0

    @property
    def found(self) -> bool:
        return self.status is SearchStatus.FOUND


@dataclass
class LawReport:
    """Outcome of a law check: passed, or the first counterexample"""

    subject: str
    passed: bool = True
    checks: int = 0
    law: Optional[str] = None
    counterexample: Optional[str] = None
    details: Tuple[str, ...] = field(default_factory=tuple)

    def fail(self, law: str, counterexample: str) -> "LawReport":
        self.passed = False
        self.law = law
        self.counterexample = counterexample
        return self
