"""Immutable syntax-tree base shared by formulas, concepts and FO formulas."""

from __future__ import annotations

from dataclasses import fields
from typing import Any, Iterator


class Node:
    """Frozen dataclass mixin with structural equality and a cached hash.

    Subclasses are declared with ``@dataclass(frozen=True, eq=False)`` so the
    methods below are not replaced.  Hashes are cached because closures and
    characteristic formulas put large shared trees into dicts over and over.
    """

    def _key(self) -> tuple[Any, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))  # type: ignore[arg-type]

    def __hash__(self) -> int:
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((type(self).__name__, *self._key()))
            object.__setattr__(self, "_hash", h)
        return h

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if type(self) is not type(other):
            return NotImplemented
        if hash(self) != hash(other):
            return False
        return self._key() == other._key()  # type: ignore[attr-defined]

    def __ne__(self, other: object) -> bool:
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    @property
    def children(self) -> tuple["Node", ...]:
        return tuple(v for v in self._key() if isinstance(v, Node))

    def walk(self) -> Iterator["Node"]:
        """Pre-order traversal that visits shared subtrees once."""
        seen: set[int] = set()
        stack: list[Node] = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            yield node
            stack.extend(reversed(node.children))
