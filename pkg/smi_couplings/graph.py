"""
Finite simple graphs underlying graph products
"""
import logging
import typing

import networkx as nx

from .errors import UnknownReferenceError, ValidationError


logger = logging.getLogger(__name__)

LINK = "link"
STAR = "star"


class Graph:
    """
    A finite simple graph with a fixed total order on its vertices.

    The order is the order of the vertex list and is what canonical normal
    forms sort by. Use build_graph to construct one from untrusted input.
    """

    def __init__(self, vertices: typing.Sequence[str], edges: typing.Iterable[typing.Tuple[str, str]]) -> None:
        self.vertices: typing.Tuple[str, ...] = tuple(vertices)
        self._index = {v: i for i, v in enumerate(self.vertices)}
        self._nx = nx.Graph()
        self._nx.add_nodes_from(self.vertices)
        self._nx.add_edges_from(edges)
        self.edges: typing.FrozenSet[typing.FrozenSet[str]] = frozenset(
            frozenset(edge) for edge in self._nx.edges
        )
        self._links = {v: frozenset(self._nx.neighbors(v)) for v in self.vertices}

    def __repr__(self) -> str:
        edges = sorted(tuple(sorted(e, key=self.position)) for e in self.edges)
        return f"Graph({list(self.vertices)}, {edges})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.vertices == other.vertices and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.vertices, self.edges))

    def __contains__(self, vertex: str) -> bool:
        return vertex in self._index

    def __len__(self) -> int:
        return len(self.vertices)

    def position(self, vertex: str) -> int:
        """
        Index of the vertex in the fixed order
        """
        try:
            return self._index[vertex]
        except KeyError:
            raise UnknownReferenceError(f"unknown vertex {vertex!r}", dict(vertex=vertex))

    def link(self, vertex: str) -> typing.FrozenSet[str]:
        self.position(vertex)
        return self._links[vertex]

    def star(self, vertex: str) -> typing.FrozenSet[str]:
        return self.link(vertex) | {vertex}

    def commute(self, u: str, v: str) -> bool:
        """
        Distinct vertices joined by an edge; their vertex groups commute
        """
        return v in self._links[u]

    def edge_list(self) -> typing.List[typing.Tuple[str, str]]:
        """
        Edges as pairs ordered by vertex position, sorted
        """
        pairs = [tuple(sorted(e, key=self.position)) for e in self.edges]
        return sorted(pairs, key=lambda p: (self.position(p[0]), self.position(p[1])))

    def complement(self) -> nx.Graph:
        return nx.complement(self._nx)

    def join(self, other: "Graph") -> "Graph":
        """
        Join of two vertex-disjoint graphs: every vertex of one is connected to every vertex of the other
        """
        clash = set(self.vertices) & set(other.vertices)
        if clash:
            raise ValidationError(f"join needs disjoint vertex sets, shared: {sorted(clash)}", dict(vertices=sorted(clash)))
        edges = self.edge_list() + other.edge_list()
        edges += [(u, v) for u in self.vertices for v in other.vertices]
        return Graph(self.vertices + other.vertices, edges)

    def is_complete(self) -> bool:
        n = len(self.vertices)
        return len(self.edges) == n * (n - 1) // 2


def build_graph(vertices: typing.Sequence[str], edges: typing.Iterable[typing.Sequence[str]]) -> Graph:
    """
    Validate vertices and edges and build the Graph.

    Rejects duplicate vertices, self-loops, duplicate edges (in either
    orientation) and edges with an endpoint that is not a listed vertex.
    """
    vertices = [str(v) for v in vertices]
    seen_vertices = set()
    for v in vertices:
        if v in seen_vertices:
            raise ValidationError(f"duplicate vertex {v!r}", dict(vertex=v))
        seen_vertices.add(v)
    seen_edges = set()
    checked = []
    for edge in edges:
        if len(edge) != 2:
            raise ValidationError(f"edge {list(edge)!r} does not have two endpoints", dict(edge=list(edge)))
        u, v = str(edge[0]), str(edge[1])
        for endpoint in (u, v):
            if endpoint not in seen_vertices:
                raise ValidationError(
                    f"edge ({u}, {v}) has unknown endpoint {endpoint!r}", dict(edge=[u, v], vertex=endpoint)
                )
        if u == v:
            raise ValidationError(f"self-loop at vertex {u!r}", dict(edge=[u, v]))
        key = frozenset((u, v))
        if key in seen_edges:
            raise ValidationError(f"duplicate edge ({u}, {v})", dict(edge=[u, v]))
        seen_edges.add(key)
        checked.append((u, v))
    graph = Graph(vertices, checked)
    logger.debug("built graph with %d vertices and %d edges", len(vertices), len(checked))
    return graph


def neighborhood(graph: Graph, vertex: str, kind: str = LINK) -> typing.FrozenSet[str]:
    """
    Link (adjacent vertices) or star (link plus the vertex) of a vertex
    """
    if kind == LINK:
        return graph.link(vertex)
    if kind == STAR:
        return graph.star(vertex)
    raise ValidationError(f"neighborhood kind must be {LINK!r} or {STAR!r}, not {kind!r}", dict(kind=kind))


def is_irreducible(graph: Graph) -> typing.Tuple[bool, typing.Optional[typing.Tuple[typing.FrozenSet[str], typing.FrozenSet[str]]]]:
    """
    Decide whether the graph is a join of two nonempty full subgraphs.

    A graph splits as a join exactly when its complement is disconnected; the
    witness is (smallest complement component, the rest), ties going to the
    component holding the earliest vertex.
    """
    if not graph.vertices:
        raise ValidationError("irreducibility is undefined for the empty graph")
    components = list(nx.connected_components(graph.complement()))
    if len(components) == 1:
        return True, None
    first = min(components, key=lambda c: (len(c), min(graph.position(v) for v in c)))
    rest = frozenset(graph.vertices) - first
    return False, (frozenset(first), rest)
