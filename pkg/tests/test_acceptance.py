"""
End-to-end checks with exact expected values for the small cases worked out by hand
"""
import itertools
import random

import pytest

import smi_couplings.coupling
import smi_couplings.errors
import smi_couplings.extension
import smi_couplings.graph
import smi_couplings.measure
import smi_couplings.randomorphism
import smi_couplings.vertex_group
import smi_couplings.words
from smi_couplings.extension import GRAPH_CASES, YTilde
from smi_couplings.measure import Fraction


def random_raw_word(product, rng, max_length=10):
    letters = [s.syllables[0] for s in product.letters()]
    return [rng.choice(letters) for _ in range(rng.randrange(max_length + 1))]


def shuffle_commuting(product, raw, rng, moves=20):
    word = list(raw)
    for _ in range(moves):
        if len(word) < 2:
            break
        i = rng.randrange(len(word) - 1)
        if product.graph.commute(word[i].vertex, word[i + 1].vertex):
            word[i], word[i + 1] = word[i + 1], word[i]
    return word


def test_identity_base_keeps_index_one(free_identity):
    growth = smi_couplings.extension.index_growth(free_identity, [0, 2, 4, 6])
    assert growth.partials == (Fraction(1),) * 4
    assert growth.classification == smi_couplings.coupling.CONSTANT_ONE
    report = smi_couplings.extension.verify_disjointness(free_identity, 6, 6)
    assert report.passed
    assert report.counts["words"] == 12


def test_index_two_base_grows_like_w(free_double):
    radii = [0, 1, 2, 3]
    growth = smi_couplings.extension.index_growth(free_double, radii)
    target = free_double.target
    # W in a free product: e and the words not ending at the base vertex
    brute = [
        sum(1 for g in target.ball(r) if g.is_identity or g.syllables[-1].vertex != free_double.vertex) for r in radii
    ]
    assert list(growth.partials) == [1 + w for w in brute]
    assert growth.classification == smi_couplings.coupling.GROWING


def test_graph_product_construction(p4_double):
    ytilde = YTilde(p4_double)
    disjointness = smi_couplings.extension.verify_disjointness(p4_double, 3, 5, ytilde=ytilde)
    assert disjointness.passed
    assert all(disjointness.cases[case] > 0 for case in GRAPH_CASES)
    coverage = smi_couplings.extension.verify_coverage(p4_double, 1, 3, ytilde=ytilde)
    assert coverage.coverage == 1


def test_composition_multiplies_indices(double, double_again):
    composed = smi_couplings.measure.compose(double, double_again)
    view = smi_couplings.coupling.omega_coupling(composed, 1)
    assert smi_couplings.coupling.greedy_fundamental_domain(view).measure == 4
    product = smi_couplings.measure.direct_product(double, double_again)
    view = smi_couplings.coupling.omega_coupling(product, 2)
    assert view.exact
    assert smi_couplings.coupling.coupling_index(view) == 4


def test_union_formula_and_nesting(z2, z3):
    lam = smi_couplings.words.single_vertex_product("Z3", z3)
    gam = smi_couplings.words.single_vertex_product("Z2", z2)
    thirds = smi_couplings.coupling.translation_coupling(lam, gam)
    c = smi_couplings.coupling.coupling_index(thirds)
    assert c == Fraction(2, 3)
    for a in (Fraction(1), Fraction(2), Fraction(1, 2)):
        union = smi_couplings.coupling.disjoint_union(thirds, thirds, a)
        assert smi_couplings.coupling.coupling_index(union) == (a * c + c) / (a + 1) == Fraction(2, 3)
    nesting = smi_couplings.coupling.attempt_nested_domains(thirds)
    assert not nesting.success
    assert nesting.kind == "cardinality"


@pytest.mark.parametrize("product_name", ["p4_product", "free_z2_z4"])
def test_normal_form_engine(request, product_name):
    product = request.getfixturevalue(product_name)
    rng = random.Random(2024)
    for _ in range(10000):
        raw = random_raw_word(product, rng)
        g = product.reduce(raw)
        assert product.reduce(shuffle_commuting(product, raw, rng)) == g
        k = rng.randrange(len(raw) + 1)
        assert product.multiply(product.reduce(raw[:k]), product.reduce(raw[k:])) == g
    for _ in range(1000):
        a, b, c = (product.reduce(random_raw_word(product, rng)) for _ in range(3))
        assert product.multiply(product.multiply(a, b), c) == product.multiply(a, product.multiply(b, c))
    for _ in range(1000):
        g = product.reduce(random_raw_word(product, rng))
        assert product.syllable_length(product.invert(g)) == product.syllable_length(g)
    syllables = [s.syllables[0] for s in product.letters()]
    for length in range(5):
        for raw in itertools.product(syllables, repeat=length):
            assert product.is_reduced(raw) == (len(product.reduce(raw)) == length)


def test_randomorphism_correspondence(double):
    measure = smi_couplings.randomorphism.randembedding_from_cocycle(double)
    assert smi_couplings.randomorphism.check_invariance(measure).invariant
    recovered = smi_couplings.randomorphism.cocycle_from_randembedding(measure)
    assert smi_couplings.randomorphism.randembedding_from_cocycle(recovered).as_dict() == measure.as_dict()
    (s,) = double.source.generators()
    collapsed = smi_couplings.randomorphism.make_germ(double.source, double.target, {s: double.target.identity})
    bad = smi_couplings.randomorphism.GermMeasure(double.source, double.target, (collapsed,), (Fraction(1),))
    with pytest.raises(smi_couplings.errors.ValidationError):
        smi_couplings.randomorphism.cocycle_from_randembedding(bad)


def test_negative_controls(free_double):
    zero = smi_couplings.measure.certify(
        smi_couplings.measure.homomorphism_cocycle(
            free_double.base.source,
            free_double.base.target,
            {s: free_double.base.target.identity for s in free_double.base.source.generators()},
        ),
        "zero",
    )
    broken = smi_couplings.extension.verify_disjointness(free_double.with_base(zero), 2, 4)
    assert not broken.passed
    assert broken.witness is not None
    smaller = YTilde(free_double).without((free_double.target.identity, 0))
    coverage = smi_couplings.extension.verify_coverage(free_double, 1, 3, ytilde=smaller)
    assert coverage.coverage < 1


def test_pipeline(p4, p4_groups, double):
    identity = smi_couplings.extension.theorem_b_pipeline(p4, {}, [0, 1, 2], source_groups=p4_groups)
    assert identity.classification == smi_couplings.coupling.CONSTANT_ONE
    grown = smi_couplings.extension.theorem_b_pipeline(p4, {"v1": double}, [0, 1, 2], source_groups=p4_groups)
    assert grown.classification == smi_couplings.coupling.GROWING
    summary = grown.to_dict()
    assert [step["vertex"] for step in summary["steps"]] == list(p4.vertices)
    assert summary["compositions"] == 3
