import collections
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import smi_couplings.errors
import smi_couplings.graph
import smi_couplings.vertex_group
import smi_couplings.words
from smi_couplings.words import GroupElement, Syllable


Z2 = smi_couplings.vertex_group.cyclic_group(2, "s", "Z2")
Z4 = smi_couplings.vertex_group.cyclic_group(4, "t", "Z4")
P4 = smi_couplings.words.GraphProduct(
    smi_couplings.graph.build_graph(["v1", "v2", "v3", "v4"], [("v1", "v2"), ("v2", "v3"), ("v3", "v4")]),
    {v: Z2 for v in ("v1", "v2", "v3", "v4")},
)
FREE = smi_couplings.words.free_product({"a": Z2, "b": Z4})


def all_syllables(product):
    return [Syllable(v, a) for v, group in product.groups.items() for a in range(group.order)]


def raw_words(product, max_size=8):
    return st.lists(st.sampled_from(all_syllables(product)), max_size=max_size)


def test_reduce_cancels_across_commuting_syllables(p4_product):
    # v1 and v2 commute, so the two v1 syllables meet and cancel
    g = p4_product.reduce([("v1", 1), ("v2", 1), ("v1", 1)])
    assert g == GroupElement((Syllable("v2", 1),))


def test_reduce_keeps_blocked_syllables(p4_product):
    g = p4_product.reduce([("v1", 1), ("v3", 1), ("v1", 1)])
    assert len(g) == 3


def test_canonical_form_is_least_shuffle(p4_product):
    # v3 v1 and v1 v3 are different elements, v2 v1 and v1 v2 are not
    assert p4_product.reduce([("v2", 1), ("v1", 1)]).syllables == (Syllable("v1", 1), Syllable("v2", 1))
    assert p4_product.reduce([("v3", 1), ("v1", 1)]).syllables == (Syllable("v3", 1), Syllable("v1", 1))


def test_swap_fixpoints_share_a_canonical_form(p4_product):
    # b3 b1 b2 and b2 b3 b1 admit no sorting swap yet are the same element
    first = p4_product.reduce([("v3", 1), ("v1", 1), ("v2", 1)])
    second = p4_product.reduce([("v2", 1), ("v3", 1), ("v1", 1)])
    assert first == second


def test_identity_syllables_vanish(free_z2_z4):
    assert free_z2_z4.reduce([("a", 0), ("b", 0)]).is_identity


def test_vertex_group_multiplication(free_z2_z4):
    g = free_z2_z4.reduce([("b", 1), ("b", 1), ("b", 3)])
    assert g == GroupElement((Syllable("b", 1),))


def test_unknown_vertex_and_bad_element(free_z2_z4):
    with pytest.raises(smi_couplings.errors.UnknownReferenceError):
        free_z2_z4.reduce([("c", 1)])
    with pytest.raises(smi_couplings.errors.ContextMismatchError):
        free_z2_z4.reduce([("a", 3)])


def test_foreign_element_is_rejected(p4_product, free_z2_z4):
    g = free_z2_z4.reduce([("b", 1)])
    with pytest.raises(smi_couplings.errors.UnknownReferenceError):
        p4_product.multiply(g, g)


def test_non_canonical_element_is_rejected(p4_product):
    g = GroupElement((Syllable("v2", 1), Syllable("v1", 1)))
    with pytest.raises(smi_couplings.errors.ContextMismatchError):
        p4_product.invert(g)


def test_ball_of_free_product(free_z2_z4):
    ball = free_z2_z4.ball(2)
    # 1 + 4 letters + 3 (a b) + 3 (b a)
    assert len(ball) == 11
    assert ball[0].is_identity
    assert [len(g) for g in ball] == sorted(len(g) for g in ball)


def test_ball_cap(free_z2_z4):
    with pytest.raises(smi_couplings.errors.TruncationCapError) as e:
        free_z2_z4.ball(3, cap=10)
    assert e.value.exit_code == 3


def test_ball_matches_brute_force(p4_product):
    found = set()
    for length in range(4):
        for raw in itertools.product([("v1", 1), ("v2", 1), ("v3", 1), ("v4", 1)], repeat=length):
            g = p4_product.reduce(raw)
            if len(g) <= 2:
                found.add(g)
    assert set(p4_product.ball(2)) == found


def test_finite_product(z2, z4):
    graph = smi_couplings.graph.build_graph(["x", "y"], [("x", "y")])
    product = smi_couplings.words.GraphProduct(graph, {"x": z2, "y": z4})
    assert product.is_finite()
    assert product.order() == 8
    assert len(product.elements()) == 8


def test_missing_vertex_group(p4, z2):
    with pytest.raises(smi_couplings.errors.UnknownReferenceError):
        smi_couplings.words.GraphProduct(p4, {"v1": z2})


def test_is_reduced_on_definition(p4_product):
    assert p4_product.is_reduced([("v1", 1), ("v3", 1), ("v1", 1)])
    assert not p4_product.is_reduced([("v1", 1), ("v2", 1), ("v1", 1)])
    assert not p4_product.is_reduced([("v1", 0)])
    assert p4_product.is_reduced([])


@pytest.mark.parametrize("product_name", ["p4_product", "free_z2_z4"])
def test_is_reduced_matches_length_exhaustively(request, product_name):
    product = request.getfixturevalue(product_name)
    syllables = all_syllables(product)
    for length in range(5):
        for raw in itertools.product(syllables, repeat=length):
            assert product.is_reduced(raw) == (len(product.reduce(raw)) == len(raw)), raw


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_multiplication_is_associative(data):
    a, b, c = (FREE.reduce(data.draw(raw_words(FREE))) for _ in range(3))
    left = FREE.multiply(FREE.multiply(a, b), c)
    right = FREE.multiply(a, FREE.multiply(b, c))
    assert left == right


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_reduce_is_a_homomorphism(data):
    first, second = data.draw(raw_words(P4)), data.draw(raw_words(P4))
    expected = P4.multiply(P4.reduce(first), P4.reduce(second))
    assert P4.reduce(first + second) == expected


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_inverse_and_length(data):
    g = P4.reduce(data.draw(raw_words(P4)))
    inverse = P4.invert(g)
    assert P4.multiply(g, inverse).is_identity
    assert P4.syllable_length(inverse) == P4.syllable_length(g)
    assert P4.reduce(g.syllables) == g


def test_scrambled_words_reduce_to_the_same_element(p4_product, free_z2_z4):
    rng = random.Random(7)
    for product in (p4_product, free_z2_z4):
        ball = product.ball(3)
        for _ in range(300):
            g = rng.choice(ball)
            assert product.reduce(product.scramble(g, rng, moves=6)) == g


def test_power(free_z2_z4):
    b = free_z2_z4.syllable("b", 1)
    assert free_z2_z4.power(b, 4).is_identity
    assert free_z2_z4.power(b, -1) == free_z2_z4.syllable("b", 3)


def test_alh_decompose(p4_product):
    g = p4_product.reduce([("v1", 1), ("v2", 1), ("v3", 1)])
    a, l, h = p4_product.alh_decompose(g, "v1")
    assert a == p4_product.syllable("v1", 1)
    assert l == p4_product.syllable("v2", 1)
    assert h == p4_product.syllable("v3", 1)
    assert p4_product.product(a, l, h) == g


def test_alh_decompose_without_front_syllable(p4_product):
    # v3 blocks v1 from the front
    g = p4_product.reduce([("v3", 1), ("v1", 1)])
    a, l, h = p4_product.alh_decompose(g, "v1")
    assert a.is_identity and l.is_identity and h == g


@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_alh_decompose_multiplies_back(data):
    g = P4.reduce(data.draw(raw_words(P4)))
    a, l, h = P4.alh_decompose(g, "v2")
    assert P4.product(a, l, h) == g
    assert l.vertices <= P4.graph.link("v2")


def test_retraction(p4_product):
    g = p4_product.reduce([("v1", 1), ("v3", 1), ("v1", 1), ("v2", 1)])
    assert p4_product.retraction(g, {"v1"}).is_identity
    assert p4_product.retraction(g, {"v2", "v3"}) == p4_product.reduce([("v3", 1), ("v2", 1)])


@settings(max_examples=1000, deadline=None)
@given(data=st.data())
def test_retraction_is_a_homomorphism(data):
    a, b = (P4.reduce(data.draw(raw_words(P4))) for _ in range(2))
    vertices = data.draw(st.frozensets(st.sampled_from(P4.graph.vertices)))
    expected = P4.multiply(P4.retraction(a, vertices), P4.retraction(b, vertices))
    assert P4.retraction(P4.multiply(a, b), vertices) == expected
    assert P4.retraction(a, vertices).vertices <= vertices


def test_right_coset_split(free_z2_z4):
    g = free_z2_z4.reduce([("a", 1), ("b", 2)])
    w, gamma = free_z2_z4.right_coset_split(g, "b")
    assert w == free_z2_z4.syllable("a", 1)
    assert gamma == free_z2_z4.syllable("b", 2)
    assert free_z2_z4.in_w(w, "b")
    assert not free_z2_z4.in_w(g, "b")


@pytest.mark.parametrize("radius,expected", [(0, 1), (1, 2), (2, 5), (3, 8)])
def test_coset_reps_w_counts(free_z2_z4, radius, expected):
    reps = free_z2_z4.coset_reps_w("b", radius)
    assert len(reps) == expected
    brute = [g for g in free_z2_z4.ball(radius) if g.is_identity or g.syllables[-1].vertex != "b"]
    assert set(reps) == set(brute)


def test_wtilde_strips_link_syllables(p4_product):
    # v2 is in the link of v1: v3 v2 and v3 lie in the same orbit
    g = p4_product.reduce([("v3", 1), ("v2", 1)])
    assert p4_product.in_w(g, "v1")
    assert not p4_product.in_wtilde(g, "v1")
    assert p4_product.wtilde_representative(g, "v1") == p4_product.syllable("v3", 1)
    reps = p4_product.orbit_reps_wtilde(p4_product.coset_reps_w("v1", 2), "v1", 2)
    assert all(p4_product.in_wtilde(r, "v1") for r in reps)
    assert p4_product.syllable("v2", 1) not in reps
    assert p4_product.identity in reps


def test_vertex_subproduct_and_embed(p4_product):
    sub = p4_product.vertex_subproduct(["v3", "v1"])
    assert sub.graph.vertices == ("v1", "v3")
    assert not sub.is_finite()
    g = sub.reduce([("v3", 1), ("v1", 1)])
    assert p4_product.embed(g, sub) == p4_product.reduce([("v3", 1), ("v1", 1)])


def test_join_renames_clashing_vertices(free_z2_z4):
    product, first, second = free_z2_z4.join(free_z2_z4)
    assert first == {"a": "a.1", "b": "b.1"}
    assert second == {"a": "a.2", "b": "b.2"}
    assert product.graph.commute("a.1", "b.2")
    assert not product.graph.commute("a.1", "b.1")


@pytest.mark.parametrize("product,vertex", [(FREE, "b"), (P4, "v1"), (P4, "v2")])
def test_every_element_splits_once_over_w_and_the_vertex_group(product, vertex):
    radius = 4
    gammas = [product.syllable(vertex, a) for a in range(product.groups[vertex].order)]
    hits = collections.Counter(product.multiply(w, gamma) for w in product.coset_reps_w(vertex, radius) for gamma in gammas)
    for g in product.ball(radius - 1):
        assert hits[g] == 1, g
        w, gamma = product.right_coset_split(g, vertex)
        assert product.in_w(w, vertex)
        assert product.multiply(w, gamma) == g


def meetable(product, word):
    """two syllables at one vertex with only commuting syllables between them"""
    for i, (v, _) in enumerate(word):
        for u, _ in word[i + 1 :]:
            if u == v:
                return True
            if not product.graph.commute(u, v):
                break
    return False


def rewrite(product, raw, rng):
    """apply merges, cancellations and commuting swaps in random order until no merge can ever apply"""
    word = [Syllable(v, a) for v, a in raw]
    while True:
        shrinking, swaps = [], []
        for i, (v, a) in enumerate(word):
            if a == 0:
                shrinking.append(("cancel", i))
            if i + 1 < len(word):
                u = word[i + 1].vertex
                if u == v:
                    shrinking.append(("merge", i))
                elif product.graph.commute(u, v):
                    swaps.append(("swap", i))
        if not shrinking and not meetable(product, word):
            return word
        moves = shrinking if shrinking and rng.random() < 0.5 else shrinking + swaps
        kind, i = rng.choice(moves)
        if kind == "cancel":
            del word[i]
        elif kind == "merge":
            v = word[i].vertex
            word[i : i + 2] = [Syllable(v, product.groups[v].mul(word[i].element, word[i + 1].element))]
        else:
            word[i], word[i + 1] = word[i + 1], word[i]


def least_shuffle(product, word):
    seen = {tuple(word)}
    frontier = [tuple(word)]
    while frontier:
        current = frontier.pop()
        for i in range(len(current) - 1):
            u, v = current[i].vertex, current[i + 1].vertex
            if u != v and product.graph.commute(u, v):
                swapped = current[:i] + (current[i + 1], current[i]) + current[i + 2 :]
                if swapped not in seen:
                    seen.add(swapped)
                    frontier.append(swapped)
    return min(seen, key=lambda w: [(product.graph.position(v), a) for v, a in w])


@pytest.mark.parametrize("product", [P4, FREE])
def test_rewriting_in_any_order_reaches_the_normal_form(product):
    rng = random.Random(11)
    syllables = all_syllables(product)
    for _ in range(1000):
        raw = [rng.choice(syllables) for _ in range(rng.randrange(13))]
        rewritten = rewrite(product, raw, rng)
        assert product.is_reduced(rewritten)
        assert least_shuffle(product, rewritten) == product.reduce(raw).syllables, raw
