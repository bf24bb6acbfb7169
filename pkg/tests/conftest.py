import pathlib

import pytest

import smi_couplings.extension
import smi_couplings.graph
import smi_couplings.measure
import smi_couplings.vertex_group
import smi_couplings.words


CONFIGS = pathlib.Path(__file__).parent / "configs"


@pytest.fixture
def z2():
    return smi_couplings.vertex_group.cyclic_group(2, "s", "Z2")


@pytest.fixture
def z3():
    return smi_couplings.vertex_group.cyclic_group(3, "r", "Z3")


@pytest.fixture
def z4():
    return smi_couplings.vertex_group.cyclic_group(4, "t", "Z4")


@pytest.fixture
def z8():
    return smi_couplings.vertex_group.cyclic_group(8, "u", "Z8")


@pytest.fixture
def p4():
    """path v1 - v2 - v3 - v4"""
    return smi_couplings.graph.build_graph(["v1", "v2", "v3", "v4"], [("v1", "v2"), ("v2", "v3"), ("v3", "v4")])


@pytest.fixture
def p4_groups(p4, z2):
    return {v: z2 for v in p4.vertices}


@pytest.fixture
def p4_product(p4, p4_groups):
    return smi_couplings.words.GraphProduct(p4, p4_groups)


@pytest.fixture
def free_z2_z4(z2, z4):
    return smi_couplings.words.free_product({"a": z2, "b": z4})


def embedding_system(source_group, target_group, image, name):
    """the homomorphism sending the source generator to image, over one point"""
    source = smi_couplings.words.single_vertex_product(source_group.label, source_group)
    target = smi_couplings.words.single_vertex_product(target_group.label, target_group)
    (s,) = source.generators()
    cocycle = smi_couplings.measure.homomorphism_cocycle(
        source, target, {s: target.syllable(target_group.label, target_group.index(image))}
    )
    return smi_couplings.measure.certify(cocycle, name)


@pytest.fixture
def double(z2, z4):
    """Z2 -> Z4, s -> t^2: an SMI system of index 2"""
    return embedding_system(z2, z4, "t^2", "double")


@pytest.fixture
def double_again(z4, z8):
    """Z4 -> Z8, t -> u^2: index 2"""
    return embedding_system(z4, z8, "u^2", "double-again")


@pytest.fixture
def identity_z2(z2):
    return embedding_system(z2, z2, "s", "identity")


@pytest.fixture
def free_double(double, z2):
    return smi_couplings.extension.extend_free(double, z2)


@pytest.fixture
def free_identity(identity_z2, z2):
    return smi_couplings.extension.extend_free(identity_z2, z2)


@pytest.fixture
def p4_double(p4, p4_groups, z4, double):
    """P4 with Z2 everywhere in H, Z4 at v1 in G"""
    target_groups = dict(p4_groups)
    target_groups["v1"] = z4
    return smi_couplings.extension.extend_graph(p4, p4_groups, target_groups, "v1", double)


@pytest.fixture
def config_text():
    """reads a config document from tests/configs"""

    def read(name):
        return (CONFIGS / name).read_text(encoding="utf-8")

    return read
