import pytest

import smi_couplings.errors
import smi_couplings.measure
import smi_couplings.words
from smi_couplings.measure import Fraction


@pytest.fixture
def lam(z2):
    return smi_couplings.words.single_vertex_product("Z2", z2)


@pytest.fixture
def gam(z4):
    return smi_couplings.words.single_vertex_product("Z4", z4)


@pytest.fixture
def two_points():
    return smi_couplings.measure.make_space(["1/2", "1/2"], ["p", "q"])


def s_of(product):
    (s,) = product.generators()
    return s


def test_make_space_is_exact():
    space = smi_couplings.measure.make_space(["1/3", "2/3"])
    assert space.points == ("x0", "x1")
    assert space.weights == (Fraction(1, 3), Fraction(2, 3))
    assert space.measure([0, 1]) == 1


@pytest.mark.parametrize(
    "weights",
    [
        [],
        ["1/2", "1/3"],
        ["3/2", "-1/2"],
        ["1", "0"],
        ["half", "1/2"],
    ],
)
def test_make_space_rejects_bad_weights(weights):
    with pytest.raises(smi_couplings.errors.ValidationError):
        smi_couplings.measure.make_space(weights)


def test_product_space_indices():
    first = smi_couplings.measure.make_space(["1/2", "1/2"], ["a", "b"])
    second = smi_couplings.measure.make_space(["1/3", "2/3"], ["x", "y"])
    product = smi_couplings.measure.product_space(first, second)
    assert product.points[1 * 2 + 0] == "(b,x)"
    assert product.weight(3) == Fraction(1, 3)


def test_make_action_swaps_points(lam, two_points):
    s = s_of(lam)
    action = smi_couplings.measure.make_action(lam, two_points, {s: [1, 0]})
    assert action.act(s, 0) == 1
    assert action.act(lam.identity, 1) == 1


def test_action_must_preserve_weights(lam):
    space = smi_couplings.measure.make_space(["1/3", "2/3"])
    with pytest.raises(smi_couplings.errors.ValidationError) as e:
        smi_couplings.measure.make_action(lam, space, {s_of(lam): [1, 0]})
    assert e.value.witness["point"] == 0


def test_action_must_respect_relations(gam):
    # t of order 4 cannot act as a 3-cycle
    space = smi_couplings.measure.make_space(["1/3", "1/3", "1/3"])
    with pytest.raises(smi_couplings.errors.ValidationError) as e:
        smi_couplings.measure.make_action(gam, space, {s_of(gam): [1, 2, 0]})
    assert "relation" in e.value.witness


def test_cocycle_identity_is_checked(lam, gam, two_points):
    # s swaps the points; s -> t at p and e at q gives alpha(s^2, p) = t != e
    s, t = s_of(lam), s_of(gam)
    action = smi_couplings.measure.make_action(lam, two_points, {s: [1, 0]})
    with pytest.raises(smi_couplings.errors.ValidationError) as e:
        smi_couplings.measure.make_cocycle(action, gam, {s: [t, gam.identity]})
    assert "not well defined" in e.value.message
    assert e.value.witness["point"] in (0, 1)


def test_cocycle_value_must_be_in_target(lam, gam, two_points, free_z2_z4):
    s = s_of(lam)
    action = smi_couplings.measure.trivial_action(lam, two_points)
    foreign = free_z2_z4.syllable("a", 1)
    with pytest.raises(smi_couplings.errors.ValidationError):
        smi_couplings.measure.make_cocycle(action, gam, {s: [foreign, foreign]})


def test_twisted_cocycle_is_smi(lam, gam, two_points):
    # s swaps p and q with values t and t^3: alpha(s^2, x) = t^3 t = e, consistent
    s, t = s_of(lam), s_of(gam)
    action = smi_couplings.measure.make_action(lam, two_points, {s: [1, 0]})
    cocycle = smi_couplings.measure.make_cocycle(action, gam, {s: [t, gam.power(t, 3)]})
    assert cocycle.value(s, 0) == t
    assert smi_couplings.measure.check_cocycle_identity(cocycle) is None
    system = smi_couplings.measure.certify(cocycle, "twisted")
    assert system.smi_certified
    assert system.certificate.exhaustive
    assert system.certificate.checked == 4


def test_trivial_cocycle_is_not_smi(lam, gam):
    cocycle = smi_couplings.measure.homomorphism_cocycle(lam, gam, {s_of(lam): gam.identity})
    certificate = smi_couplings.measure.is_smi_cocycle(cocycle)
    assert not certificate.smi
    assert certificate.counterexample == dict(element="Z2:s", point=0)
    system = smi_couplings.measure.certify(cocycle, "zero")
    with pytest.raises(smi_couplings.errors.NotCertifiedError):
        smi_couplings.measure.require_certified(system)


def test_compose(double, double_again):
    composed = smi_couplings.measure.compose(double, double_again)
    s = s_of(double.source)
    assert composed.value(s, 0) == double_again.target.syllable("Z8", 4)
    assert composed.smi_certified
    assert composed.name == "double;double-again"


def test_compose_needs_matching_groups(double):
    with pytest.raises(smi_couplings.errors.ContextMismatchError):
        smi_couplings.measure.compose(double, double)


def test_direct_product(double, double_again):
    product = smi_couplings.measure.direct_product(double, double_again)
    assert product.source.graph.vertices == ("Z2", "Z4")
    assert product.target.graph.vertices == ("Z4", "Z8")
    assert product.source.order() == 8
    assert product.smi_certified
    assert smi_couplings.measure.check_cocycle_identity(product.cocycle) is None


def test_displacement(double):
    assert double.cocycle.displacement() == 1
