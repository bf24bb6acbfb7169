"""
Extending an SMI cocycle across a free product or a graph product, the
claimed fundamental domain of the extended coupling, and the sweeps that
check it: disjointness of translates, coverage of orbits, index growth.
"""
import dataclasses
import logging
import random
import time
import typing

from .coupling import (
    CONSTANT,
    CONSTANT_ONE,
    GROWING,
    UNDETERMINED,
    CouplingView,
    FundamentalDomain,
    IndexGrowth,
    greedy_fundamental_domain,
    omega_coupling,
)
from .errors import ContextMismatchError, MarginError, UnknownReferenceError, ValidationError, ViewTooSmallError
from .graph import Graph, is_irreducible
from .measure import (
    CocycleBase,
    Fraction,
    SmiCertificate,
    SmiCocycleSystem,
    compose,
    homomorphism_cocycle,
    is_smi_cocycle,
    require_certified,
)
from .stats import SweepStats
from .sweep import run_chunks
from .vertex_group import IDENTITY, VertexGroup
from .word_parse import format_word
from .words import DEFAULT_BALL_CAP, GraphProduct, GroupElement, Syllable, single_vertex_product


logger = logging.getLogger(__name__)

FREE_CASES = ("case-1", "case-2", "case-3")
GRAPH_CASES = ("case-1", "case-2", "case-3", "case-4", "case-5", "case-6", "case-7")

# (a, l, h) nontriviality pattern of the a*l*h decomposition -> case name
GRAPH_CASE_PATTERNS = {
    (True, True, True): "case-1",
    (False, True, True): "case-2",
    (True, False, True): "case-3",
    (True, True, False): "case-4",
    (False, False, True): "case-5",
    (True, False, False): "case-6",
    (False, True, False): "case-7",
}

DEFAULT_SMI_RADIUS = 2


class ExtendedCocycle(CocycleBase):
    """
    The base cocycle at vertex w extended to the whole graph product.

    Syllables at w act on X through the base action and contribute their
    base cocycle value; every other syllable acts trivially and maps to
    itself. Values on longer words follow from the cocycle identity, read
    from the right.
    """

    def __init__(self, base: CocycleBase, source: GraphProduct, target: GraphProduct, vertex: str) -> None:
        self.base = base
        self.source = source
        self.target = target
        self.space = base.space
        self.vertex = vertex
        self._base_source_vertex = base.source.graph.vertices[0]
        self._base_target_vertex = base.target.graph.vertices[0]

    def _base_element(self, element: int) -> GroupElement:
        return GroupElement((Syllable(self._base_source_vertex, element),))

    def _lift(self, value: GroupElement) -> GroupElement:
        return self.target.reduce((self.vertex, e) for _, e in value.syllables)

    def retract(self, h: GroupElement) -> GroupElement:
        """
        The retraction onto the base vertex group, as an element of the base source
        """
        return self.base.source.reduce((self._base_source_vertex, e) for v, e in h.syllables if v == self.vertex)

    def act(self, h: GroupElement, x: int) -> int:
        return self.base.act(self.retract(h), x)

    def value(self, h: GroupElement, x: int) -> GroupElement:
        return self.evaluate_word(h.syllables, x)

    def evaluate_word(self, syllables: typing.Sequence[typing.Sequence], x: int) -> GroupElement:
        """
        The cocycle on any word for an element, reduced or not
        """
        result, point = self.target.identity, x
        for vertex, element in reversed([self.source.check_syllable(s) for s in syllables]):
            if element == IDENTITY:
                continue
            if vertex == self.vertex:
                b = self._base_element(element)
                step = self._lift(self.base.value(b, point))
                point = self.base.act(b, point)
            else:
                step = self.target.reduce([(vertex, element)])
            result = self.target.multiply(step, result)
        return result


@dataclasses.dataclass
class ExtendedSystem:
    """
    An SMI system H -> G built from a base system at one vertex, with the base fundamental domain
    """

    graph: Graph
    vertex: str
    source: GraphProduct
    target: GraphProduct
    base: SmiCocycleSystem
    system: SmiCocycleSystem
    free: bool
    irreducible: bool
    join_witness: typing.Optional[typing.Tuple[typing.FrozenSet[str], typing.FrozenSet[str]]]
    base_view: CouplingView
    base_domain: FundamentalDomain
    trivial_factor: bool = False

    @property
    def base_index(self) -> Fraction:
        return self.base_domain.measure

    @property
    def regime(self) -> str:
        return "irreducible" if self.irreducible else "reducible"

    @property
    def case_names(self) -> typing.Tuple[str, ...]:
        return FREE_CASES if self.free else GRAPH_CASES

    def to_base_gamma(self, gamma: GroupElement) -> GroupElement:
        """
        A syllable of G at the base vertex as an element of the base target
        """
        vertex = self.base.target.graph.vertices[0]
        return self.base.target.reduce((vertex, e) for _, e in gamma.syllables)

    def with_base(self, base: SmiCocycleSystem) -> "ExtendedSystem":
        """
        The same claimed domain with the cocycle rebuilt from another base system
        """
        cocycle = ExtendedCocycle(base.cocycle, self.source, self.target, self.vertex)
        system = SmiCocycleSystem(cocycle, base.smi_certified, self.system.certificate, f"{base.name}~")
        return dataclasses.replace(self, base=base, system=system)

    def describe(self) -> typing.Dict:
        return dict(
            vertex=self.vertex,
            free=self.free,
            regime=self.regime,
            join_witness=None if self.join_witness is None else [sorted(part) for part in self.join_witness],
            base_index=self.base_index,
            smi=self.system.certificate.to_dict(),
            trivial_factor=self.trivial_factor,
        )


def extend_graph(
    graph: Graph,
    source_groups: typing.Mapping[str, VertexGroup],
    target_groups: typing.Mapping[str, VertexGroup],
    vertex: str,
    base: SmiCocycleSystem,
    smi_radius: int = DEFAULT_SMI_RADIUS,
    ball_cap: int = DEFAULT_BALL_CAP,
    free: typing.Optional[bool] = None,
) -> ExtendedSystem:
    """
    Replace the vertex group at w by the base target and extend the base cocycle.

    Requires H_v = G_v away from w, H_w the base source and G_w the base
    target. Reducible graphs are accepted and flagged.
    """
    require_certified(base, "extend_graph")
    if vertex not in graph:
        raise UnknownReferenceError(f"unknown base vertex {vertex!r}", dict(vertex=vertex))
    for role, product in (("source", base.source), ("target", base.target)):
        if len(product.graph) != 1:
            raise ValidationError(
                f"the base {role} must be a single vertex group, {base.name!r} has {len(product.graph)} vertices",
                dict(system=base.name, role=role),
            )
    if source_groups.get(vertex) != next(iter(base.source.groups.values())):
        raise ContextMismatchError(f"H at {vertex!r} is not the source group of {base.name!r}", dict(vertex=vertex))
    if target_groups.get(vertex) != next(iter(base.target.groups.values())):
        raise ContextMismatchError(f"G at {vertex!r} is not the target group of {base.name!r}", dict(vertex=vertex))
    for v in graph.vertices:
        if v != vertex and source_groups.get(v) != target_groups.get(v):
            raise ContextMismatchError(f"vertex groups of H and G differ at {v!r}", dict(vertex=v))
    irreducible, witness = is_irreducible(graph)
    if not irreducible:
        logger.warning("graph is a join %s; extending in the reducible regime", [sorted(p) for p in witness])
    source = GraphProduct(graph, source_groups, ball_cap)
    target = GraphProduct(graph, target_groups, ball_cap)
    cocycle = ExtendedCocycle(base.cocycle, source, target, vertex)
    certificate = is_smi_cocycle(cocycle, smi_radius)
    system = SmiCocycleSystem(cocycle, certificate.smi and certificate.injective, certificate, f"{base.name}@{vertex}")
    base_view = omega_coupling(base, len(base.target.graph))
    base_domain = greedy_fundamental_domain(base_view)
    if free is None:
        free = len(graph) == 2 and not graph.edges
    trivial = all(target.groups[v].is_trivial() for v in graph.vertices if v != vertex)
    if trivial:
        logger.warning("the groups away from %r are trivial; the index claim needs a nontrivial factor", vertex)
    logger.info("extended %s at %s: base index %s, %s regime", base.name, vertex, base_domain.measure, "irreducible" if irreducible else "reducible")
    return ExtendedSystem(
        graph, vertex, source, target, base, system, free, irreducible, witness, base_view, base_domain, trivial
    )


def extend_free(
    base: SmiCocycleSystem,
    free_group: VertexGroup,
    smi_radius: int = DEFAULT_SMI_RADIUS,
    ball_cap: int = DEFAULT_BALL_CAP,
    free_vertex: str = "g",
    base_vertex: str = "w",
) -> ExtendedSystem:
    """
    The system G*L -> G*Gamma, with the free factor G mapped identically
    """
    require_certified(base, "extend_free")
    if free_vertex == base_vertex:
        raise ValidationError("the free factor and the base need different vertex names")
    graph = Graph([free_vertex, base_vertex], [])
    source_group = next(iter(base.source.groups.values()))
    target_group = next(iter(base.target.groups.values()))
    return extend_graph(
        graph,
        {free_vertex: free_group, base_vertex: source_group},
        {free_vertex: free_group, base_vertex: target_group},
        base_vertex,
        base,
        smi_radius,
        ball_cap,
        free=True,
    )


class YTilde:
    """
    Membership oracle for the claimed fundamental domain of the extended coupling.

    (g, x) is in it when g = e, or when g = w * gamma with w a shortest
    representative of its coset modulo the link subgroup, no syllable of w
    at the base vertex movable to the end, gamma != e, and (gamma, x) in the
    base domain.
    """

    def __init__(self, ext: ExtendedSystem, removed: typing.AbstractSet[typing.Tuple[GroupElement, int]] = frozenset()) -> None:
        self.ext = ext
        self.removed = frozenset(removed)
        view = ext.base_view
        base_points = [view.point(p) for p in ext.base_domain.points]
        self._base = frozenset(base_points)
        self._tail = tuple((g, x) for g, x in base_points if not g.is_identity)

    def __contains__(self, point: typing.Tuple[GroupElement, int]) -> bool:
        g, x = point
        if point in self.removed:
            return False
        if g.is_identity:
            return True
        target, vertex = self.ext.target, self.ext.vertex
        w, gamma = target.right_coset_split(g, vertex)
        if gamma.is_identity or not target.in_wtilde(w, vertex):
            return False
        return (self.ext.to_base_gamma(gamma), x) in self._base

    def without(self, point: typing.Tuple[GroupElement, int]) -> "YTilde":
        return YTilde(self.ext, self.removed | {point})

    def coset_reps(self, radius: int) -> typing.Tuple[GroupElement, ...]:
        target = self.ext.target
        return target.orbit_reps_wtilde(target.coset_reps_w(self.ext.vertex, radius), self.ext.vertex, radius)

    def points(self, radius: int) -> typing.List[typing.Tuple[GroupElement, int]]:
        """
        The points whose W-coordinate has syllable length at most radius
        """
        target, n = self.ext.target, len(self.ext.base.space)
        found = [(target.identity, x) for x in range(n)]
        for w in self.coset_reps(radius):
            for gamma, x in self._tail:
                g = target.multiply(w, target.reduce((self.ext.vertex, e) for _, e in gamma.syllables))
                found.append((g, x))
        return [p for p in found if p not in self.removed]

    def measure(self, radius: int) -> Fraction:
        space = self.ext.base.space
        return sum((space.weight(x) for _, x in self.points(radius)), Fraction(0))


def build_ytilde(ext: ExtendedSystem, radius: int) -> typing.List[typing.Tuple[GroupElement, int]]:
    return YTilde(ext).points(radius)


@dataclasses.dataclass
class VerificationReport:
    """
    Result of one verification sweep; a failure carries a witness
    """

    kind: str
    passed: bool
    radii: typing.Dict[str, int]
    checks: int = 0
    cases: typing.Dict[str, int] = dataclasses.field(default_factory=dict)
    witness: typing.Optional[typing.Dict] = None
    coverage: typing.Optional[Fraction] = None
    missed: typing.List[typing.Dict] = dataclasses.field(default_factory=list)
    counts: typing.Dict[str, int] = dataclasses.field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self, timing: bool = False) -> typing.Dict:
        result = dict(
            kind=self.kind,
            passed=self.passed,
            radii=self.radii,
            checks=self.checks,
            cases=self.cases,
            witness=self.witness,
            coverage=self.coverage,
            missed=self.missed,
            counts=self.counts,
        )
        if timing:
            result["seconds"] = round(self.seconds, 6)
        return result


def classify_case(ext: ExtendedSystem, h: GroupElement) -> str:
    """
    Proof case of a nontrivial word, from the nontriviality of its a*l*h parts at the base vertex
    """
    a, l, rest = ext.source.alh_decompose(h, ext.vertex)
    if ext.free:
        if a.is_identity:
            return "case-2"
        return "case-3" if rest.is_identity else "case-1"
    return GRAPH_CASE_PATTERNS[(not a.is_identity, not l.is_identity, not rest.is_identity)]


def _coordinates(ext: ExtendedSystem, point: typing.Tuple[GroupElement, int]) -> typing.Dict:
    g, x = point
    w, gamma = ext.target.right_coset_split(g, ext.vertex)
    return dict(w=format_word(w, ext.target), gamma=format_word(gamma, ext.target), x=ext.base.space.points[x])


def translate(ext: ExtendedSystem, h: GroupElement, point: typing.Tuple[GroupElement, int]) -> typing.Tuple[GroupElement, int]:
    """
    h . (g, x) = (g * alpha(h, x)^-1, h.x)
    """
    g, x = point
    target = ext.target
    return target.multiply(g, target.invert(ext.system.value(h, x))), ext.system.act(h, x)


def verify_disjointness(
    ext: ExtendedSystem,
    r_words: int,
    r_view: int,
    jobs: int = 1,
    ytilde: typing.Optional[YTilde] = None,
) -> VerificationReport:
    """
    Check that no nontrivial word of length <= r_words moves a sampled point of the domain back into it.

    The sample holds the domain points of length <= r_view - r_words * D,
    D the displacement of the cocycle, so every translate stays inside the
    view of radius r_view.
    """
    started = time.monotonic()
    ytilde = ytilde or YTilde(ext)
    displacement = ext.system.cocycle.displacement()
    sample_radius = r_view - r_words * displacement
    if sample_radius < 0:
        raise ViewTooSmallError(
            f"a view of radius {r_view} cannot hold translates by words of length {r_words} (displacement {displacement})",
            dict(r_view=r_view, r_words=r_words, displacement=displacement, needed=r_words * displacement),
        )
    sample = [p for p in ytilde.points(max(sample_radius - 1, 0)) if len(p[0]) <= sample_radius]
    words = [h for h in ext.source.ball(r_words) if not h.is_identity]
    stats = SweepStats()

    def work(chunk: typing.Sequence[GroupElement]) -> typing.Optional[typing.Dict]:
        witness = None
        for h in chunk:
            case = classify_case(ext, h)
            for point in sample:
                image = translate(ext, h, point)
                stats.add_checks()
                stats.tally_case(case)
                if image in ytilde:
                    stats.increment_violations()
                    if witness is None:
                        witness = dict(
                            word=format_word(h, ext.source), case=case, point=_coordinates(ext, point), image=_coordinates(ext, image)
                        )
        return witness

    witnesses = run_chunks(work, words, jobs, stats=stats)
    witness = next((w for w in witnesses if w is not None), None)
    cases = dict.fromkeys(ext.case_names, 0)
    cases.update(stats.cases)
    report = VerificationReport(
        kind="disjointness",
        passed=witness is None,
        radii=dict(words=r_words, view=r_view, sample=sample_radius),
        checks=stats.checks,
        cases=cases,
        witness=witness,
        counts=dict(words=len(words), sample=len(sample), violations=stats.violations),
        seconds=time.monotonic() - started,
    )
    logger.info("disjointness: %d checks, passed=%s", report.checks, report.passed)
    return report


def verify_coverage(
    ext: ExtendedSystem,
    r_interior: int,
    r_search: int,
    jobs: int = 1,
    ytilde: typing.Optional[YTilde] = None,
) -> VerificationReport:
    """
    Check that every point (g, x) with g in the interior ball reaches the domain by some word of length <= r_search
    """
    started = time.monotonic()
    ytilde = ytilde or YTilde(ext)
    displacement = ext.system.cocycle.displacement()
    margin = r_interior + (displacement + 1) * r_interior
    if r_search < margin:
        raise MarginError(
            f"search radius {r_search} is below the margin {margin} for interior radius {r_interior}",
            dict(r_interior=r_interior, r_search=r_search, needed=margin),
        )
    n = len(ext.base.space)
    interior = [(g, x) for g in ext.target.ball(r_interior) for x in range(n)]
    words = ext.source.ball(r_search)
    stats = SweepStats()

    def work(chunk: typing.Sequence[typing.Tuple[GroupElement, int]]) -> typing.List[typing.Tuple[GroupElement, int]]:
        missed = []
        for point in chunk:
            for h in words:
                stats.add_checks()
                if translate(ext, h, point) in ytilde:
                    break
            else:
                stats.increment_violations()
                missed.append(point)
        return missed

    missed = [p for chunk in run_chunks(work, interior, jobs, stats=stats) for p in chunk]
    coverage = Fraction(len(interior) - len(missed), len(interior))
    report = VerificationReport(
        kind="coverage",
        passed=coverage == 1,
        radii=dict(interior=r_interior, search=r_search),
        checks=stats.checks,
        coverage=coverage,
        missed=[_coordinates(ext, p) for p in missed],
        counts=dict(interior=len(interior), words=len(words)),
        seconds=time.monotonic() - started,
    )
    if missed:
        logger.warning("coverage %s: %d interior points never reach the domain", coverage, len(missed))
    return report


def index_growth(ext: ExtendedSystem, radii: typing.Sequence[int], ytilde: typing.Optional[YTilde] = None) -> IndexGrowth:
    """
    Partial measures 1 + |W~ in ball(R)| * (mu(Y) - 1), classified
    """
    ytilde = ytilde or YTilde(ext)
    partials = tuple(ytilde.measure(r) for r in radii)
    target = ext.target
    collapsed = not any(target.in_wtilde(s, ext.vertex) for s in target.letters())
    if all(p == 1 for p in partials):
        return IndexGrowth(tuple(radii), partials, CONSTANT_ONE, Fraction(1))
    if collapsed:
        return IndexGrowth(
            tuple(radii), partials, CONSTANT, ext.base_index, note="the graph is the star of the base vertex; W~ = {e}"
        )
    if len(partials) > 1 and all(a < b for a, b in zip(partials, partials[1:])):
        return IndexGrowth(tuple(radii), partials, GROWING)
    logger.warning("index growth undetermined at radii %s", list(radii))
    return IndexGrowth(tuple(radii), partials, UNDETERMINED, note="W~ in the tested balls is still {e}; use larger radii")


def check_well_defined(ext: ExtendedSystem, rng: random.Random, samples: int = 200, radius: int = 3) -> VerificationReport:
    """
    Evaluate the extended cocycle on scrambled words for random elements and compare with the reduced word
    """
    started = time.monotonic()
    cocycle = ext.system.cocycle
    elements = ext.source.ball(radius)
    n = len(ext.base.space)
    witness = None
    checks = 0
    for _ in range(samples):
        h = rng.choice(elements)
        x = rng.randrange(n)
        raw = ext.source.scramble(h, rng)
        checks += 1
        expected = cocycle.value(h, x)
        found = cocycle.evaluate_word(raw, x)
        if found != expected:
            witness = dict(
                word=format_word(h, ext.source),
                raw=" ".join(f"{v}:{ext.source.groups[v].name(a)}" for v, a in raw),
                point=ext.base.space.points[x],
                reduced_value=format_word(expected, ext.target),
                raw_value=format_word(found, ext.target),
            )
            break
    return VerificationReport(
        kind="well-defined",
        passed=witness is None,
        radii=dict(words=radius),
        checks=checks,
        witness=witness,
        counts=dict(samples=samples),
        seconds=time.monotonic() - started,
    )


def identity_system(product: GraphProduct, name: str = "identity") -> SmiCocycleSystem:
    """
    The identity cocycle of a finite group over the one-point space
    """
    cocycle = homomorphism_cocycle(product, product, {s: s for s in product.generators()})
    certificate = is_smi_cocycle(cocycle)
    return SmiCocycleSystem(cocycle, certificate.smi and certificate.injective, certificate, name)


@dataclasses.dataclass
class PipelineStep:
    vertex: str
    extension: ExtendedSystem
    growth: IndexGrowth
    composed: SmiCocycleSystem

    def to_dict(self) -> typing.Dict:
        return dict(
            vertex=self.vertex,
            extension=self.extension.describe(),
            growth=self.growth.to_dict(),
            composition=dict(
                name=self.composed.name,
                points=len(self.composed.space),
                certified=self.composed.smi_certified,
            ),
        )


@dataclasses.dataclass
class PipelineReport:
    steps: typing.List[PipelineStep]
    system: SmiCocycleSystem
    classification: str
    value: typing.Optional[Fraction]

    def to_dict(self) -> typing.Dict:
        return dict(
            steps=[step.to_dict() for step in self.steps],
            extensions=len(self.steps),
            compositions=max(len(self.steps) - 1, 0),
            classification=self.classification,
            value=self.value,
            certified=self.system.smi_certified,
        )


def theorem_b_pipeline(
    graph: Graph,
    bases: typing.Mapping[str, SmiCocycleSystem],
    radii: typing.Sequence[int],
    smi_radius: int = DEFAULT_SMI_RADIUS,
    ball_cap: int = DEFAULT_BALL_CAP,
    source_groups: typing.Optional[typing.Mapping[str, VertexGroup]] = None,
) -> PipelineReport:
    """
    Swap the vertex groups of H for those of G one vertex at a time and compose the steps.

    Vertices without a base keep their group through an identity base,
    which needs source_groups to name that group.
    """
    unknown = sorted(set(bases) - set(graph.vertices))
    if unknown:
        raise UnknownReferenceError(f"bases given for unknown vertices {unknown}", dict(vertices=unknown))
    systems = {}
    for v in graph.vertices:
        if v in bases:
            systems[v] = bases[v]
        elif source_groups is not None and v in source_groups:
            systems[v] = identity_system(single_vertex_product(v, source_groups[v], ball_cap), f"id-{v}")
        else:
            raise UnknownReferenceError(f"no base system or vertex group for {v!r}", dict(vertex=v))
        require_certified(systems[v], "theorem_b_pipeline")
    current = {v: next(iter(systems[v].source.groups.values())) for v in graph.vertices}
    steps: typing.List[PipelineStep] = []
    cumulative: typing.Optional[SmiCocycleSystem] = None
    for v in graph.vertices:
        following = dict(current)
        following[v] = next(iter(systems[v].target.groups.values()))
        ext = extend_graph(graph, current, following, v, systems[v], smi_radius, ball_cap)
        growth = index_growth(ext, radii)
        cumulative = ext.system if cumulative is None else compose(cumulative, ext.system)
        steps.append(PipelineStep(v, ext, growth, cumulative))
        logger.info("pipeline step at %s: %s", v, growth.classification)
        current = following
    classes = [step.growth.classification for step in steps]
    if all(c == CONSTANT_ONE for c in classes):
        classification, value = CONSTANT_ONE, Fraction(1)
    elif GROWING in classes:
        classification, value = GROWING, None
    elif UNDETERMINED in classes:
        classification, value = UNDETERMINED, None
    else:
        classification, value = CONSTANT, Fraction(1)
        for step in steps:
            value *= step.growth.value
    return PipelineReport(steps, cumulative, classification, value)


def theorem_a_pipeline(
    first: SmiCocycleSystem,
    second: SmiCocycleSystem,
    radii: typing.Sequence[int],
    smi_radius: int = DEFAULT_SMI_RADIUS,
    ball_cap: int = DEFAULT_BALL_CAP,
) -> PipelineReport:
    """
    L1*L2 -> G1*L2 -> G1*G2: the pipeline over two vertices without an edge
    """
    graph = Graph(["v1", "v2"], [])
    return theorem_b_pipeline(graph, {"v1": first, "v2": second}, radii, smi_radius, ball_cap)
