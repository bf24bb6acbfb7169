"""
Graph products of finite vertex groups: normal forms, group operations,
decompositions, and ball/coset enumeration.

Elements are stored in canonical normal form: a reduced sequence of
syllables, arranged as the lexicographically least shuffle with respect to
the graph's vertex order (then element index). Two elements are equal
exactly when their syllable tuples are equal.
"""
import dataclasses
import logging
import random
import threading
import typing

from .errors import ContextMismatchError, TruncationCapError, UnknownReferenceError, ValidationError
from .graph import Graph
from .vertex_group import IDENTITY, VertexGroup


logger = logging.getLogger(__name__)

DEFAULT_BALL_CAP = 10 ** 6


class Syllable(typing.NamedTuple):
    vertex: str
    element: int


@dataclasses.dataclass(frozen=True)
class GroupElement:
    """
    A graph product element in canonical normal form; the empty tuple is the identity
    """

    syllables: typing.Tuple[Syllable, ...] = ()

    def __len__(self) -> int:
        return len(self.syllables)

    def __iter__(self) -> typing.Iterator[Syllable]:
        return iter(self.syllables)

    def __str__(self) -> str:
        if not self.syllables:
            return "e"
        return " ".join(f"{v}:{a}" for v, a in self.syllables)

    @property
    def is_identity(self) -> bool:
        return not self.syllables

    @property
    def vertices(self) -> typing.FrozenSet[str]:
        return frozenset(s.vertex for s in self.syllables)


IDENTITY_ELEMENT = GroupElement(())


class GraphProduct:
    """
    The graph product of finite vertex groups over a finite simple graph.

    This object is the context every element operation needs: the graph
    decides which syllables commute, the vertex groups multiply syllables at
    the same vertex.
    """

    def __init__(self, graph: Graph, groups: typing.Mapping[str, VertexGroup], ball_cap: int = DEFAULT_BALL_CAP) -> None:
        missing = [v for v in graph.vertices if v not in groups]
        if missing:
            raise UnknownReferenceError(f"no vertex group registered for {missing}", dict(vertices=missing))
        extra = sorted(set(groups) - set(graph.vertices))
        if extra:
            raise UnknownReferenceError(f"vertex groups given for unknown vertices {extra}", dict(vertices=extra))
        self.graph = graph
        self.groups: typing.Dict[str, VertexGroup] = {v: groups[v] for v in graph.vertices}
        self.ball_cap = ball_cap
        self.identity = IDENTITY_ELEMENT
        self._balls: typing.Dict[int, typing.Tuple[GroupElement, ...]] = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        groups = ", ".join(f"{v}={g.label}" for v, g in self.groups.items())
        return f"GraphProduct({self.graph!r}, {groups})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphProduct):
            return NotImplemented
        return self.graph == other.graph and self.groups == other.groups

    def __hash__(self) -> int:
        return hash((self.graph, tuple(self.groups.values())))

    # ------------------------------------------------------------------
    # syllables and validation

    def check_syllable(self, syllable: typing.Sequence) -> Syllable:
        vertex, element = syllable
        if vertex not in self.graph:
            raise UnknownReferenceError(f"unknown vertex {vertex!r}", dict(vertex=vertex))
        group = self.groups[vertex]
        if not 0 <= element < group.order:
            raise ContextMismatchError(
                f"element {element} is not in the group {group.label} at vertex {vertex!r}",
                dict(vertex=vertex, element=element),
            )
        return Syllable(vertex, int(element))

    def check_element(self, g: GroupElement) -> GroupElement:
        """
        Make sure g is a canonical element of this product
        """
        if not isinstance(g, GroupElement):
            raise ContextMismatchError(f"{g!r} is not a group element")
        for s in g.syllables:
            self.check_syllable(s)
        if self.canonical(g.syllables) != g.syllables:
            raise ContextMismatchError(f"{g} is not in canonical form for this product", dict(element=str(g)))
        return g

    def syllable(self, vertex: str, element: int) -> GroupElement:
        s = self.check_syllable((vertex, element))
        return GroupElement((s,)) if s.element != IDENTITY else self.identity

    def letters(self) -> typing.Tuple[GroupElement, ...]:
        """
        Every single-syllable element, in vertex order then element order
        """
        return tuple(
            GroupElement((Syllable(v, a),)) for v, group in self.groups.items() for a in range(1, group.order)
        )

    def generators(self) -> typing.Tuple[GroupElement, ...]:
        """
        Single syllables built from each vertex group's generators
        """
        return tuple(GroupElement((Syllable(v, a),)) for v, group in self.groups.items() for a in group.generators)

    def sort_key(self, g: GroupElement) -> typing.Tuple:
        """
        Breadth-first canonical order: syllable length, then (vertex position, element) sequence
        """
        return (len(g.syllables), tuple((self.graph.position(v), a) for v, a in g.syllables))

    # ------------------------------------------------------------------
    # rewriting

    def _push(self, word: typing.List[Syllable], syllable: Syllable) -> None:
        """
        Multiply a reduced word on the right by one syllable, in place.

        Scans leftwards past syllables that commute with the new one; a
        syllable at the same vertex absorbs it (and vanishes on identity),
        anything else blocks and the syllable is appended.
        """
        vertex, element = syllable
        if element == IDENTITY:
            return
        link = self.graph.link(vertex)
        for i in range(len(word) - 1, -1, -1):
            u, b = word[i]
            if u == vertex:
                merged = self.groups[vertex].mul(b, element)
                if merged == IDENTITY:
                    del word[i]
                else:
                    word[i] = Syllable(vertex, merged)
                return
            if u not in link:
                break
        word.append(Syllable(vertex, element))

    def canonical(self, word: typing.Sequence[Syllable]) -> typing.Tuple[Syllable, ...]:
        """
        Least shuffle of a reduced word: repeatedly take the front-movable syllable at the earliest vertex
        """
        remaining = list(word)
        out = []
        while remaining:
            best = None
            prefix: typing.Set[str] = set()
            for j, (v, _) in enumerate(remaining):
                if prefix <= self.graph.link(v) and v not in prefix:
                    if best is None or self.graph.position(v) < self.graph.position(remaining[best].vertex):
                        best = j
                prefix.add(v)
            out.append(remaining.pop(best))
        return tuple(out)

    def reduce(self, raw: typing.Iterable[typing.Sequence]) -> GroupElement:
        """
        Canonical normal form of the product of a raw syllable sequence.

        Identity syllables are dropped; the length of the result is the
        syllable length of the element.
        """
        word: typing.List[Syllable] = []
        for s in raw:
            self._push(word, self.check_syllable(s))
        return GroupElement(self.canonical(word))

    def is_reduced(self, seq: typing.Sequence[typing.Sequence]) -> bool:
        """
        Reducedness of a syllable sequence, checked on the sequence itself.

        No identity syllables, and no two syllables at the same vertex with
        only syllables commuting with that vertex between them (so no
        shuffling brings them together).
        """
        seq = [self.check_syllable(s) for s in seq]
        for i, (v, a) in enumerate(seq):
            if a == IDENTITY:
                return False
            link = self.graph.link(v)
            for u, _ in seq[i + 1 :]:
                if u == v:
                    return False
                if u not in link:
                    break
        return True

    # ------------------------------------------------------------------
    # group operations

    def multiply(self, a: GroupElement, b: GroupElement) -> GroupElement:
        self.check_element(a)
        self.check_element(b)
        return self._times(a, b)

    def _times(self, a: GroupElement, b: GroupElement) -> GroupElement:
        word = list(a.syllables)
        for s in b.syllables:
            self._push(word, s)
        return GroupElement(self.canonical(word))

    def product(self, *elements: GroupElement) -> GroupElement:
        result = self.identity
        for g in elements:
            result = self.multiply(result, g)
        return result

    def invert(self, a: GroupElement) -> GroupElement:
        self.check_element(a)
        word = [Syllable(v, self.groups[v].inv(x)) for v, x in reversed(a.syllables)]
        return GroupElement(self.canonical(word))

    def scramble(self, g: GroupElement, rng: random.Random, moves: int = 4) -> typing.List[Syllable]:
        """
        A random raw word for g: commuting neighbours swapped, syllables split, cancelling pairs inserted
        """
        word = list(self.check_element(g).syllables)
        letters = self.letters()
        for _ in range(moves):
            move = rng.randrange(3)
            if move == 0 and len(word) > 1:
                i = rng.randrange(len(word) - 1)
                if self.graph.commute(word[i].vertex, word[i + 1].vertex):
                    word[i], word[i + 1] = word[i + 1], word[i]
            elif move == 1 and word:
                i = rng.randrange(len(word))
                v, a = word[i]
                group = self.groups[v]
                b = rng.randrange(group.order)
                word[i : i + 1] = [Syllable(v, b), Syllable(v, group.mul(group.inv(b), a))]
            elif letters:
                (v, a), = rng.choice(letters).syllables
                i = rng.randrange(len(word) + 1)
                word[i:i] = [Syllable(v, a), Syllable(v, self.groups[v].inv(a))]
        return word

    def power(self, a: GroupElement, k: int) -> GroupElement:
        if k < 0:
            a, k = self.invert(a), -k
        result = self.identity
        for _ in range(k):
            result = self.multiply(result, a)
        return result

    def syllable_length(self, g: GroupElement) -> int:
        return len(self.check_element(g).syllables)

    # ------------------------------------------------------------------
    # decompositions

    def _movable_to_end(self, syllables: typing.Sequence[Syllable], vertices: typing.AbstractSet[str]) -> typing.List[int]:
        """
        Positions of syllables at the given vertices that shuffle to the last position
        """
        found = []
        suffix: typing.Set[str] = set()
        for j in range(len(syllables) - 1, -1, -1):
            v = syllables[j].vertex
            if v in vertices and v not in suffix and suffix <= self.graph.link(v):
                found.append(j)
            suffix.add(v)
        return found

    def alh_decompose(self, g: GroupElement, vertex: str) -> typing.Tuple[GroupElement, GroupElement, GroupElement]:
        """
        Split g = a*l*h around a vertex.

        a is the syllable at the vertex that shuffles to the front (or e),
        l collects every link syllable that then shuffles to the front, and
        h is the rest, which is e or starts outside the star of the vertex.
        """
        self.check_element(g)
        link = self.graph.link(vertex)
        rest = list(g.syllables)
        a = self.identity
        prefix: typing.Set[str] = set()
        for j, (v, x) in enumerate(rest):
            if v == vertex and prefix <= link:
                a = GroupElement((rest.pop(j),))
                break
            prefix.add(v)
        l_part, h_part = [], []
        for s in rest:
            if s.vertex in link and all(self.graph.commute(u, s.vertex) for u, _ in h_part):
                l_part.append(s)
            else:
                h_part.append(s)
        return a, GroupElement(self.canonical(l_part)), GroupElement(self.canonical(h_part))

    def retraction(self, g: GroupElement, vertices: typing.AbstractSet[str]) -> GroupElement:
        """
        Image under the retraction onto the standard subgroup on the given vertices
        """
        self.check_element(g)
        return self.reduce(s for s in g.syllables if s.vertex in vertices)

    def right_coset_split(self, g: GroupElement, vertex: str) -> typing.Tuple[GroupElement, GroupElement]:
        """
        The unique (w, gamma) with g = w*gamma, gamma in the vertex group and w in W
        """
        self.check_element(g)
        self.graph.position(vertex)
        tail = self._movable_to_end(g.syllables, {vertex})
        if not tail:
            return g, self.identity
        j = tail[0]
        rest = g.syllables[:j] + g.syllables[j + 1 :]
        return GroupElement(self.canonical(rest)), GroupElement((g.syllables[j],))

    def in_w(self, g: GroupElement, vertex: str) -> bool:
        """
        No shuffling of g ends with a syllable at the vertex
        """
        return not self._movable_to_end(g.syllables, {vertex})

    def wtilde_representative(self, g: GroupElement, vertex: str) -> GroupElement:
        """
        Shortest element of g*H_lk(vertex): strip trailing link syllables until none is left
        """
        link = self.graph.link(vertex)
        syllables = list(g.syllables)
        while True:
            tail = self._movable_to_end(syllables, link)
            if not tail:
                return GroupElement(self.canonical(syllables))
            for j in sorted(tail, reverse=True):
                del syllables[j]

    def in_wtilde(self, g: GroupElement, vertex: str) -> bool:
        return self.in_w(g, vertex) and not self._movable_to_end(g.syllables, self.graph.link(vertex))

    # ------------------------------------------------------------------
    # enumeration

    def ball(self, radius: int, cap: typing.Optional[int] = None) -> typing.Tuple[GroupElement, ...]:
        """
        Every element of syllable length at most radius, in breadth-first canonical order.

        Built one syllable at a time: the elements of length k+1 are the
        products g*s of length k+1 with g of length k and s a single syllable.
        """
        if radius < 0:
            raise ValidationError(f"ball radius must be nonnegative, got {radius}", dict(radius=radius))
        cap = self.ball_cap if cap is None else cap
        with self._lock:
            cached = self._balls.get(radius)
        if cached is not None:
            if len(cached) > cap:
                raise TruncationCapError(f"ball of radius {radius} exceeds the cap of {cap}", dict(radius=radius, cap=cap))
            return cached
        letters = self.letters()
        elements = [self.identity]
        level = [self.identity]
        for k in range(radius):
            found = set()
            for g in level:
                for s in letters:
                    h = self._times(g, s)
                    if len(h.syllables) == k + 1:
                        found.add(h)
            if not found:
                break
            level = sorted(found, key=self.sort_key)
            elements.extend(level)
            logger.debug("ball level %d: %d elements", k + 1, len(level))
            if len(elements) > cap:
                raise TruncationCapError(
                    f"ball of radius {radius} exceeds the cap of {cap}", dict(radius=radius, cap=cap, reached=len(elements))
                )
        result = tuple(elements)
        with self._lock:
            self._balls[radius] = result
        logger.info("ball of radius %d holds %d elements", radius, len(result))
        return result

    def is_finite(self) -> bool:
        """
        Finite exactly when the nontrivial vertex groups pairwise commute
        """
        nontrivial = [v for v, group in self.groups.items() if not group.is_trivial()]
        return all(self.graph.commute(u, v) for i, u in enumerate(nontrivial) for v in nontrivial[i + 1 :])

    def order(self) -> int:
        if not self.is_finite():
            raise ValidationError("the graph product is infinite")
        result = 1
        for group in self.groups.values():
            result *= group.order
        return result

    def elements(self) -> typing.Tuple[GroupElement, ...]:
        """
        All elements of a finite product, in breadth-first canonical order
        """
        if not self.is_finite():
            raise ValidationError("cannot list the elements of an infinite graph product")
        return self.ball(len(self.graph.vertices))

    def coset_reps_w(self, vertex: str, radius: int) -> typing.Tuple[GroupElement, ...]:
        """
        W inside ball(radius): e and every element none of whose shufflings ends at the vertex
        """
        self.graph.position(vertex)
        return tuple(g for g in self.ball(radius) if self.in_w(g, vertex))

    def orbit_reps_wtilde(
        self, w_set: typing.Iterable[GroupElement], vertex: str, radius: int
    ) -> typing.Tuple[GroupElement, ...]:
        """
        One representative per right H_lk(vertex)-orbit of W inside ball(radius).

        Representatives are the shortest orbit members, ties broken by the
        canonical order.
        """
        orbits: typing.Dict[GroupElement, GroupElement] = {}
        for g in w_set:
            if len(g.syllables) > radius:
                continue
            key = self.wtilde_representative(g, vertex)
            best = orbits.get(key)
            if best is None or self.sort_key(g) < self.sort_key(best):
                orbits[key] = g
        return tuple(sorted(orbits.values(), key=self.sort_key))

    # ------------------------------------------------------------------
    # related products

    def vertex_subproduct(self, vertices: typing.Iterable[str]) -> "GraphProduct":
        """
        The standard subgroup on a vertex subset, as a graph product of its own
        """
        keep = set(vertices)
        for v in keep:
            self.graph.position(v)
        order = [v for v in self.graph.vertices if v in keep]
        edges = [e for e in self.graph.edge_list() if e[0] in keep and e[1] in keep]
        return GraphProduct(Graph(order, edges), {v: self.groups[v] for v in order}, self.ball_cap)

    def embed(self, g: GroupElement, source: "GraphProduct", rename: typing.Optional[typing.Mapping[str, str]] = None) -> GroupElement:
        """
        Carry an element of another product into this one, vertex by vertex
        """
        rename = rename or {}
        return self.reduce(Syllable(rename.get(v, v), a) for v, a in source.check_element(g).syllables)

    def join(self, other: "GraphProduct") -> typing.Tuple["GraphProduct", typing.Dict[str, str], typing.Dict[str, str]]:
        return join_products(self, other)


def single_vertex_product(vertex: str, group: VertexGroup, ball_cap: int = DEFAULT_BALL_CAP) -> GraphProduct:
    """
    A vertex group seen as the graph product over one vertex
    """
    return GraphProduct(Graph([vertex], []), {vertex: group}, ball_cap)


def free_product(groups: typing.Mapping[str, VertexGroup], ball_cap: int = DEFAULT_BALL_CAP) -> GraphProduct:
    return GraphProduct(Graph(list(groups), []), groups, ball_cap)


def join_products(first: GraphProduct, second: GraphProduct) -> typing.Tuple[GraphProduct, typing.Dict[str, str], typing.Dict[str, str]]:
    """
    Direct product of two graph products, as the graph product over the join.

    Vertex names that clash get a ".1"/".2" suffix; the two renaming maps
    are returned with the product.
    """
    clash = set(first.graph.vertices) & set(second.graph.vertices)
    rename_first = {v: (f"{v}.1" if v in clash else v) for v in first.graph.vertices}
    rename_second = {v: (f"{v}.2" if v in clash else v) for v in second.graph.vertices}

    def renamed(product: GraphProduct, rename: typing.Dict[str, str]) -> Graph:
        return Graph([rename[v] for v in product.graph.vertices], [(rename[u], rename[v]) for u, v in product.graph.edge_list()])

    graph = renamed(first, rename_first).join(renamed(second, rename_second))
    groups = {rename_first[v]: g for v, g in first.groups.items()}
    groups.update({rename_second[v]: g for v, g in second.groups.items()})
    return GraphProduct(graph, groups, min(first.ball_cap, second.ball_cap)), rename_first, rename_second
