"""
Finite groups given by multiplication tables
"""
import logging
import typing

import numpy as np

from .errors import UnknownReferenceError, ValidationError


logger = logging.getLogger(__name__)

IDENTITY = 0


class VertexGroup:
    """
    A finite group on the element indices 0..order-1, identity at index 0.

    table[a, b] is the index of a*b. The table is validated on construction
    (closure, identity row and column, Latin square, associativity), and the
    inverse table is derived from it.
    """

    def __init__(
        self,
        table: typing.Sequence[typing.Sequence[int]],
        names: typing.Optional[typing.Sequence[str]] = None,
        label: str = "group",
        generators: typing.Optional[typing.Sequence[int]] = None,
    ) -> None:
        self.table = np.asarray(table, dtype=np.int64)
        self.label = label
        validate_table(self.table, label)
        self.order = int(self.table.shape[0])
        # the identity column of row a sits at a's inverse
        self.inverses = np.argmax(self.table == IDENTITY, axis=1)
        if names is None:
            names = ["e"] + [f"{label}[{i}]" for i in range(1, self.order)]
        names = [str(n) for n in names]
        if len(names) != self.order:
            raise ValidationError(
                f"group {label}: {len(names)} names for {self.order} elements", dict(group=label)
            )
        if len(set(names)) != len(names):
            raise ValidationError(f"group {label}: element names are not unique", dict(group=label))
        self.names: typing.Tuple[str, ...] = tuple(names)
        self._by_name = {n: i for i, n in enumerate(self.names)}
        if generators is None:
            generators = range(1, self.order)
        self.generators: typing.Tuple[int, ...] = tuple(int(g) for g in generators)
        if self.span(self.generators) != self.order:
            raise ValidationError(f"group {label}: generators {list(self.generators)} do not generate", dict(group=label))

    def __repr__(self) -> str:
        return f"VertexGroup({self.label}, order={self.order})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexGroup):
            return NotImplemented
        return self.order == other.order and bool(np.array_equal(self.table, other.table))

    def __hash__(self) -> int:
        return hash(self.table.tobytes())

    def mul(self, a: int, b: int) -> int:
        return int(self.table[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverses[a])

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        result = IDENTITY
        for _ in range(k):
            result = self.mul(result, a)
        return result

    def name(self, a: int) -> str:
        return self.names[a]

    def index(self, element: typing.Union[int, str]) -> int:
        """
        Element index from an index or a display name
        """
        if isinstance(element, (int, np.integer)) and not isinstance(element, bool):
            if 0 <= element < self.order:
                return int(element)
            raise UnknownReferenceError(
                f"group {self.label} has no element {element}", dict(group=self.label, element=int(element))
            )
        try:
            return self._by_name[str(element)]
        except KeyError:
            raise UnknownReferenceError(
                f"group {self.label} has no element {element!r}", dict(group=self.label, element=str(element))
            )

    def span(self, generators: typing.Iterable[int]) -> int:
        """
        Order of the subgroup generated by the given elements
        """
        reached = {IDENTITY}
        frontier = [IDENTITY]
        generators = list(generators)
        while frontier:
            a = frontier.pop()
            for g in generators:
                b = self.mul(a, g)
                if b not in reached:
                    reached.add(b)
                    frontier.append(b)
        return len(reached)

    def is_trivial(self) -> bool:
        return self.order == 1


def validate_table(table: np.ndarray, label: str = "group") -> None:
    """
    Raise ValidationError unless the table is the multiplication table of a group with identity 0
    """
    if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
        raise ValidationError(f"group {label}: table must be a nonempty square", dict(group=label))
    n = table.shape[0]
    if table.min() < 0 or table.max() >= n:
        raise ValidationError(f"group {label}: table entries must lie in 0..{n - 1}", dict(group=label))
    expected = np.arange(n)
    if not (np.array_equal(table[IDENTITY], expected) and np.array_equal(table[:, IDENTITY], expected)):
        raise ValidationError(f"group {label}: index 0 is not a two-sided identity", dict(group=label))
    for axis, what in ((1, "row"), (0, "column")):
        bad = np.flatnonzero((np.sort(table, axis=axis) != expected.reshape((1, n) if axis == 1 else (n, 1))).any(axis=axis))
        if bad.size:
            raise ValidationError(
                f"group {label}: {what} {int(bad[0])} is not a permutation", dict(group=label, **{what: int(bad[0])})
            )
    # (ab)c against a(bc) for every triple at once
    left = table[table]
    right = table[:, table]
    mismatch = np.argwhere(left != right)
    if mismatch.size:
        a, b, c = (int(i) for i in mismatch[0])
        raise ValidationError(
            f"group {label}: not associative at ({a}, {b}, {c})", dict(group=label, triple=[a, b, c])
        )


def cyclic_group(n: int, generator: str = "t", label: typing.Optional[str] = None) -> VertexGroup:
    """
    Z_n with elements named e, t, t^2, ...
    """
    if n < 1:
        raise ValidationError(f"cyclic group order must be positive, got {n}", dict(order=n))
    table = np.add.outer(np.arange(n), np.arange(n)) % n
    names = ["e"] + [generator if k == 1 else f"{generator}^{k}" for k in range(1, n)]
    gens = [1] if n > 1 else []
    return VertexGroup(table, names, label=label or f"Z{n}", generators=gens)
