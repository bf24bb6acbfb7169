"""
Couplings: the truncated view of Gamma x X built from an SMI cocycle, greedy
fundamental domains, indices, and explicitly tabulated finite couplings.
"""
import dataclasses
import logging
import typing

import networkx as nx
from networkx.algorithms import bipartite

from .errors import ContextMismatchError, ValidationError
from .measure import (
    Fraction,
    Permutation,
    SmiCocycleSystem,
    extend_permutations,
    homomorphism_cocycle,
    is_smi_cocycle,
    require_certified,
)
from .word_parse import format_word
from .words import GraphProduct, GroupElement


logger = logging.getLogger(__name__)

CONSTANT_ONE = "constant-1"
CONSTANT = "constant"
GROWING = "growing"
UNDETERMINED = "undetermined"


@dataclasses.dataclass
class CouplingView:
    """
    The coupling Gamma x X restricted to gamma in ball(radius).

    Point (gamma_index, x) has index gamma_index * len(X) + x. Gamma acts by
    left multiplication, Lambda by (g, x) -> (g * alpha(l, x)^-1, l.x);
    translates leaving the view are recorded as None.
    """

    system: SmiCocycleSystem
    radius: int
    gammas: typing.Tuple[GroupElement, ...]
    lambdas: typing.Tuple[GroupElement, ...]
    lambda_table: typing.Dict[GroupElement, typing.List[typing.Optional[int]]]
    gamma_table: typing.Dict[GroupElement, typing.List[typing.Optional[int]]]
    exact: bool

    @property
    def width(self) -> int:
        return len(self.system.space)

    def __len__(self) -> int:
        return len(self.gammas) * self.width

    def point(self, index: int) -> typing.Tuple[GroupElement, int]:
        g, x = divmod(index, self.width)
        return self.gammas[g], x

    def weight(self, index: int) -> Fraction:
        return self.system.space.weight(index % self.width)

    @property
    def x_domain(self) -> typing.Tuple[int, ...]:
        return tuple(range(self.width))

    def describe(self, index: int) -> typing.Dict:
        g, x = self.point(index)
        return dict(gamma=format_word(g, self.system.target), point=self.system.space.points[x])


@dataclasses.dataclass(frozen=True)
class FundamentalDomain:
    points: typing.Tuple[int, ...]
    boundary: typing.Tuple[int, ...]
    measure: Fraction


@dataclasses.dataclass(frozen=True)
class IndexGrowth:
    """
    Partial measures of a fundamental domain over growing radii, and their classification
    """

    radii: typing.Tuple[int, ...]
    partials: typing.Tuple[Fraction, ...]
    classification: str
    value: typing.Optional[Fraction] = None
    note: typing.Optional[str] = None

    def to_dict(self) -> typing.Dict:
        return dict(
            radii=list(self.radii),
            partials=list(self.partials),
            classification=self.classification,
            value=self.value,
            note=self.note,
        )


def classify_partials(partials: typing.Sequence[Fraction], exact: bool = False) -> typing.Tuple[str, typing.Optional[Fraction]]:
    """
    constant-1 when every partial measure is 1; constant when the last one is exact;
    growing when strictly increasing; undetermined otherwise
    """
    if all(p == 1 for p in partials):
        return CONSTANT_ONE, Fraction(1)
    if exact:
        return CONSTANT, partials[-1]
    if len(partials) > 1 and all(a < b for a, b in zip(partials, partials[1:])):
        return GROWING, None
    return UNDETERMINED, None


def omega_coupling(system: SmiCocycleSystem, radius: int) -> CouplingView:
    """
    Materialize both actions on ball(radius) x X and check that they commute and are free
    """
    require_certified(system, "omega_coupling")
    source, target, n = system.source, system.target, len(system.space)
    gammas = target.ball(radius)
    position = {g: i for i, g in enumerate(gammas)}
    lambdas = system.cocycle.source_elements(radius)
    exact = target.is_finite() and len(gammas) == target.order()

    def index_of(g: GroupElement, x: int) -> typing.Optional[int]:
        i = position.get(g)
        return None if i is None else i * n + x

    lambda_table = {}
    for l in lambdas:
        row = []
        for g in gammas:
            for x in range(n):
                shifted = target.multiply(g, target.invert(system.value(l, x)))
                row.append(index_of(shifted, system.act(l, x)))
        lambda_table[l] = row
    gamma_table = {}
    for s in target.generators():
        gamma_table[s] = [index_of(target.multiply(s, g), x) for g in gammas for x in range(n)]
    view = CouplingView(system, radius, gammas, lambdas, lambda_table, gamma_table, exact)
    _check_view_actions(view)
    logger.info("coupling view of %s at radius %d: %d points", system.name, radius, len(view))
    return view


def _check_view_actions(view: CouplingView) -> None:
    for l, row in view.lambda_table.items():
        if l.is_identity:
            continue
        for p, q in enumerate(row):
            if q == p:
                raise ValidationError(
                    f"{format_word(l, view.system.source)} fixes a point of the view",
                    dict(element=format_word(l, view.system.source), **view.describe(p)),
                )
        for s, srow in view.gamma_table.items():
            for p in range(len(view)):
                a, b = row[p], srow[p]
                if a is None or b is None or srow[a] is None or row[b] is None:
                    continue
                if srow[a] != row[b]:
                    raise ValidationError(
                        "the two actions do not commute",
                        dict(
                            lambda_element=format_word(l, view.system.source),
                            gamma_element=format_word(s, view.system.target),
                            **view.describe(p),
                        ),
                    )


def greedy_fundamental_domain(view: CouplingView) -> FundamentalDomain:
    """
    Walk the view in breadth-first order of Gamma and keep every point not yet covered by a Lambda-translate.

    For an infinite source only the Lambda elements of ball(radius) are tried, so the
    domain is exact only inside the view: points whose orbits leave it land in boundary.
    """
    covered = [False] * len(view)
    chosen, boundary = [], []
    for p in range(len(view)):
        if covered[p]:
            continue
        chosen.append(p)
        leaves = False
        for row in view.lambda_table.values():
            q = row[p]
            if q is None:
                leaves = True
            else:
                covered[q] = True
        if leaves:
            boundary.append(p)
    measure = sum((view.weight(p) for p in chosen), Fraction(0))
    if boundary:
        logger.warning("%d fundamental domain points have orbits leaving the view", len(boundary))
    logger.debug("greedy domain: %d points, measure %s", len(chosen), measure)
    return FundamentalDomain(tuple(chosen), tuple(boundary), measure)


def read_back_cocycle(view: CouplingView) -> typing.Dict[typing.Tuple[GroupElement, int], typing.Optional[GroupElement]]:
    """
    Recover alpha(l, x) from l acting on (e, x): the Gamma coordinate of the translate is alpha(l, x)^-1
    """
    target = view.system.target
    result = {}
    for l, row in view.lambda_table.items():
        for x in range(view.width):
            q = row[x]
            result[(l, x)] = None if q is None else target.invert(view.point(q)[0])
    return result


@dataclasses.dataclass
class FiniteCoupling:
    """
    Two commuting actions of finite groups on a finite weighted set, given on generators
    """

    lambda_group: GraphProduct
    gamma_group: GraphProduct
    points: typing.Tuple[str, ...]
    weights: typing.Tuple[Fraction, ...]
    lambda_table: typing.Dict[GroupElement, Permutation]
    gamma_table: typing.Dict[GroupElement, Permutation]
    name: str = "coupling"

    def __len__(self) -> int:
        return len(self.points)


@dataclasses.dataclass(frozen=True)
class FiniteCouplingReport:
    x_domain: typing.Tuple[int, ...]
    y_domain: typing.Tuple[int, ...]
    x_measure: Fraction
    y_measure: Fraction
    index: Fraction
    gamma_orbits: typing.Tuple[typing.Tuple[int, ...], ...]
    lambda_orbits: typing.Tuple[typing.Tuple[int, ...], ...]

    def to_dict(self) -> typing.Dict:
        return dict(
            x_domain=list(self.x_domain),
            y_domain=list(self.y_domain),
            x_measure=self.x_measure,
            y_measure=self.y_measure,
            index=self.index,
        )


def orbits(size: int, permutations: typing.Iterable[Permutation]) -> typing.Tuple[typing.Tuple[int, ...], ...]:
    """
    Orbits of the group generated by the permutations, each sorted, ordered by least point
    """
    graph = nx.Graph()
    graph.add_nodes_from(range(size))
    for perm in permutations:
        graph.add_edges_from((p, q) for p, q in enumerate(perm) if p != q)
    return tuple(sorted((tuple(sorted(c)) for c in nx.connected_components(graph)), key=lambda c: c[0]))


def validate_finite_coupling(fc: FiniteCoupling) -> FiniteCouplingReport:
    """
    Check weights, action laws, commutation and freeness, then compute greedy domains and the index
    """
    n = len(fc.points)
    if len(fc.weights) != n or any(w <= 0 for w in fc.weights):
        raise ValidationError(f"coupling {fc.name!r}: every point needs a positive weight")
    actions = {}
    for label, group, table in (("lambda", fc.lambda_group, fc.lambda_table), ("gamma", fc.gamma_group, fc.gamma_table)):
        for g, perm in table.items():
            if sorted(perm) != list(range(n)):
                raise ValidationError(
                    f"{format_word(g, group)} does not permute the coupling points", dict(action=label, element=format_word(g, group))
                )
            for p, q in enumerate(perm):
                if fc.weights[p] != fc.weights[q]:
                    raise ValidationError(
                        f"{format_word(g, group)} is not weight-preserving",
                        dict(action=label, element=format_word(g, group), point=fc.points[p]),
                    )
        actions[label] = extend_permutations(group, table, n, f"{label} action")
    for s, ps in fc.lambda_table.items():
        for t, pt in fc.gamma_table.items():
            for p in range(n):
                if ps[pt[p]] != pt[ps[p]]:
                    raise ValidationError(
                        "the two actions do not commute",
                        dict(
                            lambda_element=format_word(s, fc.lambda_group),
                            gamma_element=format_word(t, fc.gamma_group),
                            point=fc.points[p],
                        ),
                    )
    for label, group in (("lambda", fc.lambda_group), ("gamma", fc.gamma_group)):
        for g, perm in actions[label].items():
            if g.is_identity:
                continue
            fixed = [p for p in range(n) if perm[p] == p]
            if fixed:
                raise ValidationError(
                    f"the {label} action is not free: {format_word(g, group)} fixes {fc.points[fixed[0]]}",
                    dict(action=label, element=format_word(g, group), point=fc.points[fixed[0]]),
                )
    gamma_orbits = orbits(n, fc.gamma_table.values())
    lambda_orbits = orbits(n, fc.lambda_table.values())
    x_domain = tuple(o[0] for o in gamma_orbits)
    y_domain = tuple(o[0] for o in lambda_orbits)
    x_measure = sum((fc.weights[p] for p in x_domain), Fraction(0))
    y_measure = sum((fc.weights[p] for p in y_domain), Fraction(0))
    report = FiniteCouplingReport(x_domain, y_domain, x_measure, y_measure, y_measure / x_measure, gamma_orbits, lambda_orbits)
    logger.info("coupling %s: index %s", fc.name, report.index)
    return report


def coupling_index(obj: typing.Union[FiniteCoupling, CouplingView]) -> Fraction:
    """
    mu(Y) / mu(X); on a truncated view this is the partial measure of Y inside the view
    """
    if isinstance(obj, FiniteCoupling):
        return validate_finite_coupling(obj).index
    if isinstance(obj, CouplingView):
        return greedy_fundamental_domain(obj).measure / obj.system.space.measure(obj.x_domain)
    raise ValidationError(f"no fundamental domains can be computed for {type(obj).__name__}")


def view_index_growth(system: SmiCocycleSystem, radii: typing.Sequence[int]) -> IndexGrowth:
    partials, exact = [], False
    for radius in radii:
        view = omega_coupling(system, radius)
        partials.append(coupling_index(view))
        exact = view.exact
    classification, value = classify_partials(partials, exact)
    return IndexGrowth(tuple(radii), tuple(partials), classification, value)


def coupling_from_view(view: CouplingView, name: typing.Optional[str] = None) -> FiniteCoupling:
    """
    A view over a whole finite target group is a finite coupling in its own right
    """
    if not view.exact or not view.system.source.is_finite():
        raise ValidationError("only a view covering a finite target group is a finite coupling")
    source, target = view.system.source, view.system.target
    points = tuple(f"({format_word(g, target)},{view.system.space.points[x]})" for g in view.gammas for x in range(view.width))
    weights = tuple(view.weight(p) for p in range(len(view)))
    lambda_table = {s: tuple(view.lambda_table[s]) for s in source.generators()}
    gamma_table = {s: tuple(row) for s, row in view.gamma_table.items()}
    return FiniteCoupling(source, target, points, weights, lambda_table, gamma_table, name or view.system.name)


def translation_coupling(lambda_group: GraphProduct, gamma_group: GraphProduct, name: str = "translation") -> FiniteCoupling:
    """
    Lambda x Gamma with counting measure, each group translating its own factor
    """
    lam, gam = lambda_group.elements(), gamma_group.elements()
    index = {(a, b): i * len(gam) + j for i, a in enumerate(lam) for j, b in enumerate(gam)}
    points = tuple(f"({format_word(a, lambda_group)},{format_word(b, gamma_group)})" for a in lam for b in gam)
    lambda_table = {
        s: tuple(index[(lambda_group.multiply(s, a), b)] for a in lam for b in gam) for s in lambda_group.generators()
    }
    gamma_table = {
        s: tuple(index[(a, gamma_group.multiply(s, b))] for a in lam for b in gam) for s in gamma_group.generators()
    }
    return FiniteCoupling(lambda_group, gamma_group, points, (Fraction(1),) * len(points), lambda_table, gamma_table, name)


def subgroup_coupling(
    gamma_group: GraphProduct,
    lambda_group: GraphProduct,
    embedding: typing.Mapping[GroupElement, GroupElement],
    name: str = "subgroup",
) -> FiniteCoupling:
    """
    Gamma with counting measure: Gamma by left multiplication, Lambda by right multiplication with phi(l)^-1
    """
    phi = homomorphism_cocycle(lambda_group, gamma_group, embedding)
    certificate = is_smi_cocycle(phi)
    if not certificate.injective:
        raise ValidationError("the embedding is not injective", certificate.counterexample)
    elements = gamma_group.elements()
    index = {g: i for i, g in enumerate(elements)}
    points = tuple(format_word(g, gamma_group) for g in elements)
    gamma_table = {s: tuple(index[gamma_group.multiply(s, g)] for g in elements) for s in gamma_group.generators()}
    lambda_table = {
        s: tuple(index[gamma_group.multiply(g, gamma_group.invert(phi.value(s, 0)))] for g in elements)
        for s in lambda_group.generators()
    }
    return FiniteCoupling(lambda_group, gamma_group, points, (Fraction(1),) * len(points), lambda_table, gamma_table, name)


def disjoint_union(first: FiniteCoupling, second: FiniteCoupling, a: Fraction, name: str = "union") -> FiniteCoupling:
    """
    Union of two couplings of the same pair, rescaled so that mu(X1) = 1 and mu(X2) = a.

    The index of the union is (a * c2 + c1) / (a + 1).
    """
    a = Fraction(a)
    if a <= 0:
        raise ValidationError(f"the weight of the second coupling must be positive, got {a}", dict(a=str(a)))
    if first.lambda_group != second.lambda_group or first.gamma_group != second.gamma_group:
        raise ContextMismatchError(
            f"cannot unite {first.name!r} and {second.name!r}: they couple different groups",
            dict(first=first.name, second=second.name),
        )
    scale_first = 1 / validate_finite_coupling(first).x_measure
    scale_second = a / validate_finite_coupling(second).x_measure
    offset = len(first)
    points = tuple(f"1:{p}" for p in first.points) + tuple(f"2:{p}" for p in second.points)
    weights = tuple(w * scale_first for w in first.weights) + tuple(w * scale_second for w in second.weights)

    def merged(t1: typing.Dict[GroupElement, Permutation], t2: typing.Dict[GroupElement, Permutation]) -> typing.Dict:
        table = {}
        for s in set(t1) | set(t2):
            left = t1.get(s, tuple(range(len(first))))
            right = t2.get(s, tuple(range(len(second))))
            table[s] = tuple(left) + tuple(q + offset for q in right)
        return table

    return FiniteCoupling(
        first.lambda_group,
        first.gamma_group,
        points,
        weights,
        merged(first.lambda_table, second.lambda_table),
        merged(first.gamma_table, second.gamma_table),
        name,
    )


@dataclasses.dataclass(frozen=True)
class NestingResult:
    """
    Outcome of the search for a Gamma-domain X inside a Lambda-domain Y
    """

    success: bool
    x_domain: typing.Tuple[int, ...] = ()
    y_domain: typing.Tuple[int, ...] = ()
    method: typing.Optional[str] = None
    kind: typing.Optional[str] = None
    gamma_orbit_count: int = 0
    lambda_orbit_count: int = 0
    matching_size: int = 0

    def to_dict(self) -> typing.Dict:
        return dataclasses.asdict(self)


def attempt_nested_domains(fc: FiniteCoupling) -> NestingResult:
    """
    Choose one point per Gamma-orbit so that no two choices share a Lambda-orbit.

    The greedy pass over orbits in point order is tried first; if it gets
    stuck the choice is a maximum bipartite matching between Gamma-orbits
    and the Lambda-orbits they meet.
    """
    report = validate_finite_coupling(fc)
    gamma_orbits, lambda_orbits = report.gamma_orbits, report.lambda_orbits
    lambda_of = {p: j for j, orbit in enumerate(lambda_orbits) for p in orbit}
    counts = dict(gamma_orbit_count=len(gamma_orbits), lambda_orbit_count=len(lambda_orbits))
    if len(lambda_orbits) < len(gamma_orbits):
        logger.info("nesting impossible in %s: %d Lambda-orbits for %d Gamma-orbits", fc.name, len(lambda_orbits), len(gamma_orbits))
        return NestingResult(False, kind="cardinality", **counts)

    def complete(chosen: typing.Dict[int, int]) -> typing.Tuple[typing.Tuple[int, ...], typing.Tuple[int, ...]]:
        used = {lambda_of[p] for p in chosen.values()}
        x_domain = tuple(sorted(chosen.values()))
        extra = [orbit[0] for j, orbit in enumerate(lambda_orbits) if j not in used]
        return x_domain, tuple(sorted(x_domain + tuple(extra)))

    chosen: typing.Dict[int, int] = {}
    used: typing.Set[int] = set()
    for i, orbit in enumerate(gamma_orbits):
        p = next((p for p in orbit if lambda_of[p] not in used), None)
        if p is None:
            break
        chosen[i] = p
        used.add(lambda_of[p])
    else:
        x_domain, y_domain = complete(chosen)
        return NestingResult(True, x_domain, y_domain, "greedy", matching_size=len(chosen), **counts)

    graph = nx.Graph()
    top = [("gamma", i) for i in range(len(gamma_orbits))]
    graph.add_nodes_from(top)
    graph.add_nodes_from(("lambda", j) for j in range(len(lambda_orbits)))
    for i, orbit in enumerate(gamma_orbits):
        graph.add_edges_from((("gamma", i), ("lambda", lambda_of[p])) for p in orbit)
    matching = bipartite.hopcroft_karp_matching(graph, top_nodes=top)
    matched = {i: matching[("gamma", i)][1] for i in range(len(gamma_orbits)) if ("gamma", i) in matching}
    if len(matched) < len(gamma_orbits):
        return NestingResult(False, method="matching", kind="matching", matching_size=len(matched), **counts)
    chosen = {i: min(p for p in gamma_orbits[i] if lambda_of[p] == j) for i, j in matched.items()}
    x_domain, y_domain = complete(chosen)
    return NestingResult(True, x_domain, y_domain, "matching", matching_size=len(matched), **counts)
