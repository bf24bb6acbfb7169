import itertools

import pytest

import smi_couplings.errors
import smi_couplings.graph


def test_build_graph_orders_vertices(p4):
    assert p4.vertices == ("v1", "v2", "v3", "v4")
    assert [p4.position(v) for v in p4.vertices] == [0, 1, 2, 3]
    assert p4.edge_list() == [("v1", "v2"), ("v2", "v3"), ("v3", "v4")]


@pytest.mark.parametrize(
    "vertices,edges",
    [
        # self-loop
        (["a", "b"], [("a", "a")]),
        # duplicate edge, other orientation
        (["a", "b"], [("a", "b"), ("b", "a")]),
        # unknown endpoint
        (["a", "b"], [("a", "c")]),
        # duplicate vertex
        (["a", "a"], []),
        # not a pair
        (["a", "b", "c"], [("a", "b", "c")]),
    ],
)
def test_build_graph_rejects_bad_input(vertices, edges):
    with pytest.raises(smi_couplings.errors.ValidationError):
        smi_couplings.graph.build_graph(vertices, edges)


def test_self_loop_witness_names_the_edge():
    with pytest.raises(smi_couplings.errors.ValidationError) as e:
        smi_couplings.graph.build_graph(["a", "b"], [("a", "a")])
    assert e.value.witness == dict(edge=["a", "a"])


@pytest.mark.parametrize(
    "vertex,kind,expected",
    [
        ("v1", smi_couplings.graph.LINK, {"v2"}),
        ("v2", smi_couplings.graph.LINK, {"v1", "v3"}),
        ("v2", smi_couplings.graph.STAR, {"v1", "v2", "v3"}),
        ("v4", smi_couplings.graph.STAR, {"v3", "v4"}),
    ],
)
def test_neighborhood(p4, vertex, kind, expected):
    assert smi_couplings.graph.neighborhood(p4, vertex, kind) == expected


def test_neighborhood_unknown_vertex(p4):
    with pytest.raises(smi_couplings.errors.UnknownReferenceError):
        smi_couplings.graph.neighborhood(p4, "v9")


def test_neighborhood_bad_kind(p4):
    with pytest.raises(smi_couplings.errors.ValidationError):
        smi_couplings.graph.neighborhood(p4, "v1", "ball")


def test_path_is_irreducible(p4):
    assert smi_couplings.graph.is_irreducible(p4) == (True, None)


def test_square_is_a_join():
    # the 4-cycle a-b-c-d-a is the join of {a, c} and {b, d}
    c4 = smi_couplings.graph.build_graph(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
    irreducible, witness = smi_couplings.graph.is_irreducible(c4)
    assert not irreducible
    assert witness == (frozenset({"a", "c"}), frozenset({"b", "d"}))


def test_complete_graph_splits_off_a_vertex():
    k3 = smi_couplings.graph.build_graph(["x", "y", "z"], [("x", "y"), ("y", "z"), ("x", "z")])
    assert k3.is_complete()
    irreducible, witness = smi_couplings.graph.is_irreducible(k3)
    assert not irreducible
    assert witness == (frozenset({"x"}), frozenset({"y", "z"}))


def test_edgeless_and_single_vertex_graphs_are_irreducible():
    assert smi_couplings.graph.is_irreducible(smi_couplings.graph.build_graph(["a", "b"], []))[0]
    assert smi_couplings.graph.is_irreducible(smi_couplings.graph.build_graph(["a"], []))[0]


def test_empty_graph_has_no_irreducibility():
    with pytest.raises(smi_couplings.errors.ValidationError):
        smi_couplings.graph.is_irreducible(smi_couplings.graph.build_graph([], []))


def test_join_connects_everything():
    first = smi_couplings.graph.build_graph(["a"], [])
    second = smi_couplings.graph.build_graph(["b", "c"], [])
    joined = first.join(second)
    assert joined.vertices == ("a", "b", "c")
    assert joined.edge_list() == [("a", "b"), ("a", "c")]
    assert not smi_couplings.graph.is_irreducible(joined)[0]


def test_join_needs_disjoint_vertices(p4):
    with pytest.raises(smi_couplings.errors.ValidationError):
        p4.join(p4)


def splits_as_join(vertices, edges):
    adjacent = {frozenset(e) for e in edges}
    first, others = vertices[0], vertices[1:]
    for mask in range(2 ** len(others) - 1):
        side = {first} | {v for i, v in enumerate(others) if mask >> i & 1}
        rest = set(vertices) - side
        if all(frozenset((a, b)) in adjacent for a in side for b in rest):
            return True
    return False


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_join_criterion_matches_bipartition_search(n):
    vertices = [f"x{i}" for i in range(n)]
    pairs = list(itertools.combinations(vertices, 2))
    for mask in range(2 ** len(pairs)):
        edges = [pair for i, pair in enumerate(pairs) if mask >> i & 1]
        graph = smi_couplings.graph.build_graph(vertices, edges)
        irreducible, witness = smi_couplings.graph.is_irreducible(graph)
        assert irreducible == (not splits_as_join(vertices, edges)), edges
        if witness is not None:
            side, rest = witness
            assert side and rest and side | rest == set(vertices)
            assert all(graph.commute(a, b) for a in side for b in rest)
