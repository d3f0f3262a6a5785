"""
Cantor normal form ordinal notations below epsilon_0
"""

import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import count
from typing import Iterator, Optional, Tuple

from core.models import Cmp

logger = logging.getLogger(__name__)

Term = Tuple["Ordinal", int]


@dataclass(frozen=True)
class Ordinal:
    """An ordinal w^e1*c1 + ... + w^ek*ck with e1 > ... > ek and every ci > 0.

    Zero is the empty sum. Instances are hashable and totally ordered.
    """

    terms: Tuple[Term, ...] = ()

    def __post_init__(self):
        previous: Optional[Ordinal] = None
        for exponent, coefficient in self.terms:
            if not isinstance(exponent, Ordinal):
                raise TypeError(f"exponent must be an Ordinal, got {exponent!r}")
            if not isinstance(coefficient, int) or coefficient <= 0:
                raise ValueError(f"coefficient must be a positive int, got {coefficient!r}")
            if previous is not None and cnf_compare(exponent, previous) is not Cmp.LT:
                raise ValueError("exponents must strictly decrease")
            previous = exponent

    @classmethod
    def from_int(cls, n: int) -> "Ordinal":
        if n < 0:
            raise ValueError(f"ordinals are non-negative, got {n}")
        return cls(((ZERO, n),)) if n else cls()

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_finite(self) -> bool:
        return all(e.is_zero for e, _ in self.terms)

    @property
    def as_int(self) -> int:
        if not self.is_finite:
            raise ValueError(f"{self} is not finite")
        return self.terms[0][1] if self.terms else 0

    @property
    def is_successor(self) -> bool:
        return bool(self.terms) and self.terms[-1][0].is_zero

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and not self.terms[-1][0].is_zero

    @property
    def leading_exponent(self) -> "Ordinal":
        return self.terms[0][0] if self.terms else ZERO

    @property
    def weight(self) -> int:
        """Notation size: coefficients plus the weights of all exponents"""
        return sum(e.weight + c for e, c in self.terms)

    def __lt__(self, other: "Ordinal") -> bool:
        return cnf_compare(self, other) is Cmp.LT

    def __le__(self, other: "Ordinal") -> bool:
        return cnf_compare(self, other) is not Cmp.GT

    def __gt__(self, other: "Ordinal") -> bool:
        return cnf_compare(self, other) is Cmp.GT

    def __ge__(self, other: "Ordinal") -> bool:
        return cnf_compare(self, other) is not Cmp.LT

    def __add__(self, other: "Ordinal") -> "Ordinal":
        return cnf_add(self, other)

    def __mul__(self, other: "Ordinal") -> "Ordinal":
        return cnf_mul(self, other)

    def __pow__(self, other: "Ordinal") -> "Ordinal":
        return cnf_power(self, other)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return "+".join(_term_str(e, c) for e, c in self.terms)

    def __repr__(self) -> str:
        return f"Ordinal({self})"


def _exponent_str(e: Ordinal) -> str:
    if e.is_finite:
        return str(e.as_int)
    if len(e.terms) == 1 and e.terms[0][1] == 1:
        # w^x needs no parentheses: ^ is right associative
        return str(e)
    return f"({e})"


def _term_str(e: Ordinal, c: int) -> str:
    if e.is_zero:
        return str(c)
    base = "w" if e == ONE else f"w^{_exponent_str(e)}"
    return base if c == 1 else f"{base}*{c}"


ZERO = Ordinal()
ONE = Ordinal(((ZERO, 1),))
OMEGA = Ordinal(((ONE, 1),))


def cnf_compare(a: Ordinal, b: Ordinal) -> Cmp:
    for (ea, ca), (eb, cb) in zip(a.terms, b.terms):
        by_exponent = cnf_compare(ea, eb)
        if by_exponent is not Cmp.EQ:
            return by_exponent
        if ca != cb:
            return Cmp.LT if ca < cb else Cmp.GT
    return Cmp.of(len(a.terms), len(b.terms))


def cnf_add(a: Ordinal, b: Ordinal) -> Ordinal:
    if b.is_zero:
        return a
    lead, lead_coefficient = b.terms[0]
    kept = []
    for exponent, coefficient in a.terms:
        relation = cnf_compare(exponent, lead)
        if relation is Cmp.GT:
            kept.append((exponent, coefficient))
        elif relation is Cmp.EQ:
            merged = (exponent, coefficient + lead_coefficient)
            return Ordinal(tuple(kept) + (merged,) + b.terms[1:])
        else:
            break
    return Ordinal(tuple(kept) + b.terms)


def cnf_omega_pow(a: Ordinal) -> Ordinal:
    return Ordinal(((a, 1),))


def cnf_mul(a: Ordinal, b: Ordinal) -> Ordinal:
    if a.is_zero or b.is_zero:
        return ZERO
    lead, lead_coefficient = a.terms[0]
    result = ZERO
    for exponent, coefficient in b.terms:
        if exponent.is_zero:
            part = Ordinal(((lead, lead_coefficient * coefficient),) + a.terms[1:])
        else:
            part = Ordinal(((cnf_add(lead, exponent), coefficient),))
        result = cnf_add(result, part)
    return result


def cnf_power(a: Ordinal, b: Ordinal) -> Ordinal:
    if b.is_zero:
        return ONE
    if a.is_zero:
        return ZERO
    if a == ONE:
        return ONE
    if b.is_finite:
        result = ONE
        for _ in range(b.as_int):
            result = cnf_mul(result, a)
        return result
    if a.is_finite:
        # n^(w*g + m) = w^g * n^m
        quotient = []
        remainder = 0
        for exponent, coefficient in b.terms:
            if exponent.is_zero:
                remainder = coefficient
            elif exponent.is_finite:
                quotient.append((Ordinal.from_int(exponent.as_int - 1), coefficient))
            else:
                quotient.append((exponent, coefficient))
        return cnf_mul(
            cnf_omega_pow(Ordinal(tuple(quotient))),
            cnf_power(a, Ordinal.from_int(remainder)),
        )
    lead = a.leading_exponent
    result = ONE
    for exponent, coefficient in b.terms:
        if exponent.is_zero:
            factor = cnf_power(a, Ordinal.from_int(coefficient))
        else:
            factor = cnf_omega_pow(cnf_mul(lead, Ordinal(((exponent, coefficient),))))
        result = cnf_mul(result, factor)
    return result


def omega_tower(height: int, top: Ordinal = ONE) -> Ordinal:
    """w^w^...^top with `height` many w's"""
    result = top
    for _ in range(height):
        result = cnf_omega_pow(result)
    return result


@lru_cache(maxsize=None)
def _below(
    weight: int, bound: Optional[Ordinal], cap: Optional[Ordinal]
) -> Tuple[Ordinal, ...]:
    """Notations of exactly this weight that are < bound, with exponents < cap"""
    if bound is not None and bound.is_zero:
        return ()
    if weight == 0:
        return (ZERO,)
    found = []
    for lead_weight in range(1, weight + 1):
        rest_weight = weight - lead_weight
        for coefficient in range(1, lead_weight + 1):
            exponent_weight = lead_weight - coefficient
            if bound is None:
                for exponent in _below(exponent_weight, cap, None):
                    for rest in _below(rest_weight, None, exponent):
                        found.append(Ordinal(((exponent, coefficient),) + rest.terms))
                continue
            top, top_coefficient = bound.terms[0]
            limit = top if cap is None or top < cap else cap
            for exponent in _below(exponent_weight, limit, None):
                for rest in _below(rest_weight, None, exponent):
                    found.append(Ordinal(((exponent, coefficient),) + rest.terms))
            if (cap is None or top < cap) and top.weight == exponent_weight:
                if coefficient < top_coefficient:
                    tails = _below(rest_weight, None, top)
                elif coefficient == top_coefficient:
                    tails = _below(rest_weight, Ordinal(bound.terms[1:]), top)
                else:
                    tails = ()
                for rest in tails:
                    found.append(Ordinal(((top, coefficient),) + rest.terms))
    return tuple(sorted(found))


def notations_of_weight(weight: int) -> Tuple[Ordinal, ...]:
    return _below(weight, None, None)


def ordinals_below(bound: Ordinal) -> Iterator[Ordinal]:
    """Enumerate {x : x < bound} without repetition, by increasing weight"""
    if bound.is_finite:
        for n in range(bound.as_int):
            yield Ordinal.from_int(n)
        return
    for weight in count():
        yield from _below(weight, bound, None)


def cnf_difference(a: Ordinal, b: Ordinal) -> Ordinal:
    """The unique g with a + g = b, for a <= b"""
    if b < a:
        raise ValueError(f"{b} is below {a}")
    k = 0
    while k < len(a.terms) and k < len(b.terms) and a.terms[k] == b.terms[k]:
        k += 1
    if k == len(a.terms):
        return Ordinal(b.terms[k:])
    (ea, ca), (eb, cb) = a.terms[k], b.terms[k]
    if ea == eb:
        return Ordinal(((eb, cb - ca),) + b.terms[k + 1 :])
    return Ordinal(b.terms[k:])
