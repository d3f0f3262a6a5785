"""
Search budgets
A SearchBudget is the immutable allowance for one search; meter() hands out the
mutable counter that the search consumes.
"""

import logging
import time
from dataclasses import dataclass, replace
from typing import Optional

from config import DEFAULT_BUDGET_DEPTH, DEFAULT_BUDGET_NODES

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchBudget:
    """Allowance for a bounded search

    nodes bounds enumeration and comparison work, depth is the chain length or
    proof depth asked for, seconds is an optional wall-clock deadline.
    """

    nodes: int = DEFAULT_BUDGET_NODES
    depth: int = DEFAULT_BUDGET_DEPTH
    seconds: Optional[float] = None

    def __post_init__(self):
        if self.nodes <= 0:
            raise ValueError(f"budget nodes must be positive, got {self.nodes}")
        if self.depth <= 0:
            raise ValueError(f"budget depth must be positive, got {self.depth}")
        if self.seconds is not None and self.seconds <= 0:
            raise ValueError(f"budget seconds must be positive, got {self.seconds}")

    def meter(self) -> "BudgetMeter":
        return BudgetMeter(self)

    def with_depth(self, depth: int) -> "SearchBudget":
        return replace(self, depth=depth)


class BudgetMeter:
    """Per-search work counter; once exhausted it stays exhausted"""

    def __init__(self, budget: SearchBudget):
        self.budget = budget
        self.spent = 0
        self.exhausted = False
        self._deadline = (
            time.monotonic() + budget.seconds if budget.seconds is not None else None
        )

    @property
    def remaining(self) -> int:
        return max(self.budget.nodes - self.spent, 0)

    def spend(self, amount: int = 1) -> bool:
        """Consume work units.

        Returns:
            False once the node allowance or the deadline is exceeded
        """
        if self.exhausted:
            return False
        self.spent += amount
        if self.spent > self.budget.nodes:
            self._exhaust("node allowance")
        elif self._deadline is not None and time.monotonic() > self._deadline:
            self._exhaust("deadline")
        return not self.exhausted

    def _exhaust(self, reason: str):
        self.exhausted = True
        logger.warning(f"Search budget exhausted ({reason}) after {self.spent} units")


def unlimited_meter() -> BudgetMeter:
    """Meter for bookkeeping over finite objects that are enumerated completely"""
    return BudgetMeter(SearchBudget(nodes=10**12))
