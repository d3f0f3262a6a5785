"""
Thread-safe memoization of possibly infinite enumerations
"""

import threading
from typing import Callable, Dict, Generic, Hashable, Iterator, List, Optional, TypeVar

T = TypeVar("T")


class CachedEnumeration(Generic[T]):
    """Replayable prefix cache over an iterator factory.

    The factory is called once; items are pulled under a lock and kept, so every
    reader sees the same sequence regardless of interleaving.
    """

    def __init__(self, factory: Callable[[], Iterator[T]]):
        self._factory = factory
        self._iterator: Optional[Iterator[T]] = None
        self._items: List[T] = []
        self._index: Dict[Hashable, int] = {}
        self._exhausted = False
        self._lock = threading.RLock()

    @property
    def exhausted(self) -> bool:
        return self._exhausted

    def known(self) -> int:
        return len(self._items)

    def _pull(self, count: int) -> None:
        with self._lock:
            if self._iterator is None and not self._exhausted:
                self._iterator = iter(self._factory())
            while len(self._items) < count and not self._exhausted:
                try:
                    item = next(self._iterator)
                except StopIteration:
                    self._exhausted = True
                    self._iterator = None
                    break
                self._index.setdefault(item, len(self._items))
                self._items.append(item)

    def prefix(self, n: int) -> List[T]:
        """First n items, or all of them if there are fewer"""
        if len(self._items) < n and not self._exhausted:
            self._pull(n)
        return self._items[:n]

    def get(self, i: int) -> Optional[T]:
        items = self.prefix(i + 1)
        return items[i] if i < len(items) else None

    def length(self, limit: Optional[int] = None) -> Optional[int]:
        """Total length if the enumeration ends within limit items (forever if None)"""
        if limit is None:
            while not self._exhausted:
                self._pull(len(self._items) + 64)
        else:
            self._pull(limit + 1)
        return len(self._items) if self._exhausted else None

    def index_of(self, item: Hashable, limit: Optional[int] = None) -> Optional[int]:
        """Enumeration index of item, scanning at most limit items"""
        found = self._index.get(item)
        if found is not None:
            return found
        step = 64
        while not self._exhausted and (limit is None or len(self._items) < limit):
            target = len(self._items) + step
            if limit is not None:
                target = min(target, limit)
            self._pull(target)
            found = self._index.get(item)
            if found is not None:
                return found
            step *= 2
        return self._index.get(item)

    def __iter__(self) -> Iterator[T]:
        i = 0
        while True:
            if i >= len(self._items):
                self._pull(i + 1)
                if i >= len(self._items):
                    return
            yield self._items[i]
            i += 1
