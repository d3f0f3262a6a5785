"""
Theory streams
A theory is modeled by the dilators it claims (positive entries) and the
non-dilators it claims (negative entries), each with an opaque certificate.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

from core.dilator import DenotationSystem

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StreamEntry:
    system: DenotationSystem
    certificate: bytes
    certified: bool = False  # certificate given explicitly in the stream file

    @property
    def expr(self) -> str:
        return self.system.expr


def _dedupe(entries: Iterable[StreamEntry]) -> Tuple[StreamEntry, ...]:
    """Keep the first position of each serialized system, with its least certificate"""
    kept: List[StreamEntry] = []
    position: Dict[str, int] = {}
    for entry in entries:
        if entry.expr in position:
            i = position[entry.expr]
            if entry.certificate < kept[i].certificate:
                kept[i] = StreamEntry(kept[i].system, entry.certificate, entry.certified)
            logger.debug(f"Merged repeated stream entry {entry.expr}")
            continue
        position[entry.expr] = len(kept)
        kept.append(entry)
    return tuple(kept)


@dataclass
class TheoryStream:
    positive: Tuple[StreamEntry, ...] = ()
    negative: Tuple[StreamEntry, ...] = ()
    source: Optional[str] = None
    name: Optional[str] = field(default=None)

    def __post_init__(self):
        self.positive = _dedupe(self.positive)
        self.negative = _dedupe(self.negative)

    @property
    def certified(self) -> bool:
        return any(entry.certified for entry in self.positive)

    def systems(self) -> List[DenotationSystem]:
        return [entry.system for entry in self.positive]

    def with_positive(self, entries: Iterable[StreamEntry]) -> "TheoryStream":
        return TheoryStream(tuple(entries), self.negative, None, self.name)
