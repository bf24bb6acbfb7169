"""
Exact finite measured data: probability spaces, group actions on them,
cocycles, and SMI cocycle systems with composition and direct products.

All weights are fractions.Fraction; nothing here uses floating point.
"""
import dataclasses
import fractions
import logging
import typing

from .errors import ContextMismatchError, NotCertifiedError, ValidationError
from .word_parse import format_word
from .words import GraphProduct, GroupElement, join_products


logger = logging.getLogger(__name__)

Fraction = fractions.Fraction
Permutation = typing.Tuple[int, ...]


@dataclasses.dataclass(frozen=True)
class ProbSpace:
    """
    A finite probability space; points are referred to by index
    """

    points: typing.Tuple[str, ...]
    weights: typing.Tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.points)

    def weight(self, x: int) -> Fraction:
        return self.weights[x]

    def measure(self, indices: typing.Iterable[int]) -> Fraction:
        return sum((self.weights[x] for x in indices), Fraction(0))

    def index(self, point: typing.Union[int, str]) -> int:
        if isinstance(point, int) and 0 <= point < len(self.points):
            return point
        try:
            return self.points.index(str(point))
        except ValueError:
            raise ValidationError(f"space has no point {point!r}", dict(point=str(point)))


def make_space(
    weights: typing.Sequence[typing.Union[Fraction, int, str]], names: typing.Optional[typing.Sequence[str]] = None
) -> ProbSpace:
    """
    Validate exact weights (positive, summing to 1) and build the space
    """
    if not weights:
        raise ValidationError("a probability space needs at least one point")
    if names is None:
        names = [f"x{i}" for i in range(len(weights))]
    names = [str(n) for n in names]
    if len(names) != len(weights):
        raise ValidationError(f"{len(names)} point names for {len(weights)} weights")
    if len(set(names)) != len(names):
        raise ValidationError("point names are not unique", dict(points=names))
    exact = []
    for name, w in zip(names, weights):
        try:
            w = Fraction(w)
        except (TypeError, ValueError, ZeroDivisionError):
            raise ValidationError(f"weight of point {name!r} is not a rational number: {w!r}", dict(point=name))
        if w <= 0:
            raise ValidationError(f"weight of point {name!r} must be positive, got {w}", dict(point=name, weight=str(w)))
        exact.append(w)
    total = sum(exact, Fraction(0))
    if total != 1:
        raise ValidationError(f"weights sum to {total}, not 1", dict(total=str(total)))
    return ProbSpace(tuple(names), tuple(exact))


def one_point_space() -> ProbSpace:
    return make_space([Fraction(1)])


def product_space(first: ProbSpace, second: ProbSpace) -> ProbSpace:
    """
    Product measure; the pair (x1, x2) has index x1 * len(second) + x2
    """
    names = [f"({a},{b})" for a in first.points for b in second.points]
    weights = [u * v for u in first.weights for v in second.weights]
    return ProbSpace(tuple(names), tuple(weights))


def extend_permutations(
    group: GraphProduct, table: typing.Mapping[GroupElement, typing.Sequence[int]], size: int, label: str = "action"
) -> typing.Dict[GroupElement, Permutation]:
    """
    Extend permutations given on generators to a homomorphism of a finite group.

    Breadth-first over left multiplication by the table's elements, using
    perm(s*g) = perm(s) o perm(g). Reaching an element twice with different
    permutations means the table violates a group relation.
    """
    if not group.is_finite():
        raise ValidationError(f"{label}: tables are only accepted for finite groups")
    generators = [(group.check_element(s), tuple(p)) for s, p in table.items()]
    perms: typing.Dict[GroupElement, Permutation] = {group.identity: tuple(range(size))}
    frontier = [group.identity]
    while frontier:
        next_frontier = []
        for g in frontier:
            pg = perms[g]
            for s, ps in generators:
                sg = group.multiply(s, g)
                composed = tuple(ps[pg[x]] for x in range(size))
                known = perms.get(sg)
                if known is None:
                    perms[sg] = composed
                    next_frontier.append(sg)
                elif known != composed:
                    x = next(i for i in range(size) if known[i] != composed[i])
                    relation = f"{format_word(s, group)} * {format_word(g, group)} = {format_word(sg, group)}"
                    raise ValidationError(
                        f"{label}: action law fails for {relation} at point {x}",
                        dict(relation=relation, generator=format_word(s, group), element=format_word(g, group), point=x),
                    )
        frontier = next_frontier
    if len(perms) != group.order():
        raise ValidationError(f"{label}: table entries do not generate the group", dict(reached=len(perms)))
    return perms


class GroupAction:
    """
    A measure-preserving action of a finite group on a probability space, stored for every element
    """

    def __init__(self, group: GraphProduct, space: ProbSpace, permutations: typing.Dict[GroupElement, Permutation]) -> None:
        self.group = group
        self.space = space
        self._perms = permutations

    def act(self, g: GroupElement, x: int) -> int:
        try:
            return self._perms[g][x]
        except KeyError:
            raise ContextMismatchError(f"{g} is not an element of the acting group", dict(element=str(g)))

    def permutation(self, g: GroupElement) -> Permutation:
        return self._perms[g]


def make_action(
    group: GraphProduct, space: ProbSpace, table: typing.Mapping[GroupElement, typing.Sequence[int]]
) -> GroupAction:
    """
    Validate generator permutations (bijective, weight-preserving) and extend them to the whole group
    """
    n = len(space)
    for g, perm in table.items():
        perm = list(perm)
        if sorted(perm) != list(range(n)):
            raise ValidationError(
                f"{format_word(g, group)} does not act as a permutation of the {n} points",
                dict(element=format_word(g, group), image=perm),
            )
        for x, y in enumerate(perm):
            if space.weights[x] != space.weights[y]:
                raise ValidationError(
                    f"{format_word(g, group)} is not weight-preserving: point {x} has weight {space.weights[x]}"
                    f" but its image {y} has weight {space.weights[y]}",
                    dict(element=format_word(g, group), point=x, image=y),
                )
    perms = extend_permutations(group, table, n)
    logger.debug("extended an action to %d group elements", len(perms))
    return GroupAction(group, space, perms)


def trivial_action(group: GraphProduct, space: ProbSpace) -> GroupAction:
    return make_action(group, space, {s: range(len(space)) for s in group.generators()})


class CocycleBase:
    """
    Anything that can act on a space and evaluate a cocycle: act(h, x) and value(h, x).

    Subclasses keep source, target and space as attributes; tables for
    finite sources, lazy evaluation for extensions and composites.
    """

    source: GraphProduct
    target: GraphProduct
    space: ProbSpace

    def act(self, h: GroupElement, x: int) -> int:
        raise NotImplementedError

    def value(self, h: GroupElement, x: int) -> GroupElement:
        raise NotImplementedError

    def source_elements(self, radius: typing.Optional[int] = None) -> typing.Tuple[GroupElement, ...]:
        """
        The whole source when it is finite, otherwise its ball of the given radius
        """
        if self.source.is_finite():
            return self.source.elements()
        if radius is None:
            raise ValidationError("the source group is infinite; a radius is required")
        return self.source.ball(radius)

    def displacement(self) -> int:
        """
        Largest syllable length of a cocycle value on a single syllable
        """
        lengths = [len(self.value(s, x)) for s in self.source.letters() for x in range(len(self.space))]
        return max(lengths, default=0)


class Cocycle(CocycleBase):
    """
    A cocycle of a finite source group, tabulated on every element
    """

    def __init__(
        self,
        action: GroupAction,
        target: GraphProduct,
        values: typing.Dict[GroupElement, typing.Tuple[GroupElement, ...]],
    ) -> None:
        self.action = action
        self.source = action.group
        self.space = action.space
        self.target = target
        self._values = values

    def act(self, h: GroupElement, x: int) -> int:
        return self.action.act(h, x)

    def value(self, h: GroupElement, x: int) -> GroupElement:
        try:
            return self._values[h][x]
        except KeyError:
            raise ContextMismatchError(f"{h} is not an element of the source group", dict(element=str(h)))


def make_cocycle(
    action: GroupAction,
    target: GraphProduct,
    table: typing.Mapping[GroupElement, typing.Sequence[GroupElement]],
) -> Cocycle:
    """
    Extend a cocycle given on generators through the cocycle identity.

    alpha(s*g, x) = alpha(s, g.x) * alpha(g, x), breadth-first from the
    identity. A relation of the source group that the table does not
    respect shows up as an element reached with two different values.
    """
    source, n = action.group, len(action.space)
    generators = []
    for s, column in table.items():
        source.check_element(s)
        column = list(column)
        if len(column) != n:
            raise ValidationError(
                f"cocycle column for {format_word(s, source)} has {len(column)} entries for {n} points",
                dict(element=format_word(s, source)),
            )
        for x, value in enumerate(column):
            try:
                target.check_element(value)
            except ValidationError:
                raise ValidationError(
                    f"cocycle value at ({format_word(s, source)}, {x}) is not in the target group",
                    dict(element=format_word(s, source), point=x, value=str(value)),
                )
        generators.append((s, tuple(column)))
    values: typing.Dict[GroupElement, typing.Tuple[GroupElement, ...]] = {source.identity: (target.identity,) * n}
    frontier = [source.identity]
    while frontier:
        next_frontier = []
        for g in frontier:
            vg = values[g]
            for s, vs in generators:
                sg = source.multiply(s, g)
                extended = tuple(target.multiply(vs[action.act(g, x)], vg[x]) for x in range(n))
                known = values.get(sg)
                if known is None:
                    values[sg] = extended
                    next_frontier.append(sg)
                elif known != extended:
                    x = next(i for i in range(n) if known[i] != extended[i])
                    relation = f"{format_word(s, source)} * {format_word(g, source)} = {format_word(sg, source)}"
                    found, expected = format_word(extended[x], target), format_word(known[x], target)
                    raise ValidationError(
                        f"cocycle is not well defined: {relation} maps to {found} != {expected} at point {x}",
                        dict(relation=relation, point=x, expected=expected, found=found),
                    )
        frontier = next_frontier
    if len(values) != source.order():
        raise ValidationError("cocycle table entries do not generate the source group", dict(reached=len(values)))
    logger.debug("extended a cocycle to %d source elements", len(values))
    return Cocycle(action, target, values)


def homomorphism_cocycle(
    source: GraphProduct, target: GraphProduct, images: typing.Mapping[GroupElement, GroupElement]
) -> Cocycle:
    """
    A homomorphism seen as a cocycle over the one-point space
    """
    space = one_point_space()
    action = trivial_action(source, space)
    return make_cocycle(action, target, {s: [v] for s, v in images.items()})


def check_cocycle_identity(cocycle: CocycleBase, radius: typing.Optional[int] = None) -> typing.Optional[typing.Dict]:
    """
    Look for a pair (g, h) and point x breaking the action law or the cocycle identity; None when there is none
    """
    source, target = cocycle.source, cocycle.target
    elements = cocycle.source_elements(radius)
    for x in range(len(cocycle.space)):
        if cocycle.act(source.identity, x) != x or not cocycle.value(source.identity, x).is_identity:
            return dict(law="identity", point=x)
    for g in elements:
        for h in elements:
            gh = source.multiply(g, h)
            for x in range(len(cocycle.space)):
                hx = cocycle.act(h, x)
                if cocycle.act(gh, x) != cocycle.act(g, hx):
                    return dict(law="action", g=format_word(g, source), h=format_word(h, source), point=x)
                if cocycle.value(gh, x) != target.multiply(cocycle.value(g, hx), cocycle.value(h, x)):
                    return dict(law="cocycle", g=format_word(g, source), h=format_word(h, source), point=x)
    return None


@dataclasses.dataclass(frozen=True)
class SmiCertificate:
    """
    Outcome of the SMI test on a cocycle.

    smi: alpha(l, x) != e whenever l != e. injective: l -> alpha(l, x) is
    injective for every x. exhaustive is False when only a ball was checked
    or the certificate was derived from the inputs of a construction.
    """

    smi: bool
    injective: bool
    exhaustive: bool
    radius: typing.Optional[int] = None
    checked: int = 0
    counterexample: typing.Optional[typing.Dict] = None

    def to_dict(self) -> typing.Dict:
        return dataclasses.asdict(self)


def is_smi_cocycle(cocycle: CocycleBase, radius: typing.Optional[int] = None) -> SmiCertificate:
    """
    Check alpha(l, x) = e only for l = e, and injectivity of l -> alpha(l, x), point by point
    """
    source, target = cocycle.source, cocycle.target
    exhaustive = source.is_finite()
    elements = cocycle.source_elements(radius)
    smi, injective, counterexample = True, True, None
    for x in range(len(cocycle.space)):
        seen: typing.Dict[GroupElement, GroupElement] = {}
        for g in elements:
            value = cocycle.value(g, x)
            if value.is_identity and not g.is_identity and smi:
                smi = False
                counterexample = dict(element=format_word(g, source), point=x)
            other = seen.get(value)
            if other is not None and injective:
                injective = False
                counterexample = counterexample or dict(
                    element=format_word(g, source), other=format_word(other, source), point=x,
                    value=format_word(value, target),
                )
            seen.setdefault(value, g)
    certificate = SmiCertificate(
        smi=smi,
        injective=injective,
        exhaustive=exhaustive,
        radius=None if exhaustive else radius,
        checked=len(elements) * len(cocycle.space),
        counterexample=counterexample,
    )
    logger.info("SMI check over %d pairs: smi=%s injective=%s", certificate.checked, smi, injective)
    return certificate


@dataclasses.dataclass
class SmiCocycleSystem:
    """
    A cocycle together with the verdict of the SMI test on it
    """

    cocycle: CocycleBase
    smi_certified: bool
    certificate: SmiCertificate
    name: str = "system"

    @property
    def source(self) -> GraphProduct:
        return self.cocycle.source

    @property
    def target(self) -> GraphProduct:
        return self.cocycle.target

    @property
    def space(self) -> ProbSpace:
        return self.cocycle.space

    def act(self, h: GroupElement, x: int) -> int:
        return self.cocycle.act(h, x)

    def value(self, h: GroupElement, x: int) -> GroupElement:
        return self.cocycle.value(h, x)


def certify(cocycle: CocycleBase, name: str = "system", radius: typing.Optional[int] = None) -> SmiCocycleSystem:
    certificate = is_smi_cocycle(cocycle, radius)
    return SmiCocycleSystem(cocycle, certificate.smi and certificate.injective, certificate, name)


def require_certified(system: SmiCocycleSystem, what: str = "this operation") -> SmiCocycleSystem:
    if not system.smi_certified:
        raise NotCertifiedError(
            f"{what} needs an SMI-certified system, {system.name!r} is not",
            dict(system=system.name, counterexample=system.certificate.counterexample),
        )
    return system


def derived_certificate(*systems: SmiCocycleSystem) -> SmiCertificate:
    ok = all(s.smi_certified for s in systems)
    return SmiCertificate(smi=ok, injective=ok, exhaustive=False)


class ComposedCocycle(CocycleBase):
    """
    The composite of L -> D over X1 and D -> G over X2, acting on X1 x X2
    """

    def __init__(self, first: CocycleBase, second: CocycleBase) -> None:
        self.first = first
        self.second = second
        self.source = first.source
        self.target = second.target
        self.space = product_space(first.space, second.space)
        self._width = len(second.space)

    def act(self, h: GroupElement, x: int) -> int:
        x1, x2 = divmod(x, self._width)
        y1 = self.first.act(h, x1)
        y2 = self.second.act(self.first.value(h, x1), x2)
        return y1 * self._width + y2

    def value(self, h: GroupElement, x: int) -> GroupElement:
        x1, x2 = divmod(x, self._width)
        return self.second.value(self.first.value(h, x1), x2)


def compose(first: SmiCocycleSystem, second: SmiCocycleSystem, name: typing.Optional[str] = None) -> SmiCocycleSystem:
    """
    Compose two systems; the target of the first must be the source of the second.

    The composite is certified when both inputs are. Finite sources are
    re-checked exhaustively.
    """
    if first.target != second.source:
        raise ContextMismatchError(
            f"cannot compose {first.name!r} with {second.name!r}: target and source differ",
            dict(first=first.name, second=second.name),
        )
    cocycle = ComposedCocycle(first.cocycle, second.cocycle)
    name = name or f"{first.name};{second.name}"
    if cocycle.source.is_finite():
        system = certify(cocycle, name)
    else:
        system = SmiCocycleSystem(cocycle, first.smi_certified and second.smi_certified, derived_certificate(first, second), name)
    logger.info("composed %s: %d points, certified=%s", name, len(cocycle.space), system.smi_certified)
    return system


class ProductCocycle(CocycleBase):
    """
    Componentwise action and cocycle of two systems, into the product of the targets
    """

    def __init__(self, first: CocycleBase, second: CocycleBase) -> None:
        self.first = first
        self.second = second
        self.source, self._source_first, self._source_second = join_products(first.source, second.source)
        self.target, self._target_first, self._target_second = join_products(first.target, second.target)
        self.space = product_space(first.space, second.space)
        self._width = len(second.space)
        self._back_first = {v: u for u, v in self._source_first.items()}
        self._back_second = {v: u for u, v in self._source_second.items()}

    def split(self, h: GroupElement) -> typing.Tuple[GroupElement, GroupElement]:
        self.source.check_element(h)
        a = self.first.source.reduce((self._back_first[v], e) for v, e in h.syllables if v in self._back_first)
        b = self.second.source.reduce((self._back_second[v], e) for v, e in h.syllables if v in self._back_second)
        return a, b

    def act(self, h: GroupElement, x: int) -> int:
        a, b = self.split(h)
        x1, x2 = divmod(x, self._width)
        return self.first.act(a, x1) * self._width + self.second.act(b, x2)

    def value(self, h: GroupElement, x: int) -> GroupElement:
        a, b = self.split(h)
        x1, x2 = divmod(x, self._width)
        u, v = self.first.value(a, x1), self.second.value(b, x2)
        return self.target.reduce(
            [(self._target_first[s], e) for s, e in u.syllables] + [(self._target_second[s], e) for s, e in v.syllables]
        )


def direct_product(first: SmiCocycleSystem, second: SmiCocycleSystem, name: typing.Optional[str] = None) -> SmiCocycleSystem:
    """
    The product system L1 x L2 -> G1 x G2 on X1 x X2
    """
    cocycle = ProductCocycle(first.cocycle, second.cocycle)
    name = name or f"{first.name}x{second.name}"
    if cocycle.source.is_finite():
        return certify(cocycle, name)
    return SmiCocycleSystem(cocycle, first.smi_certified and second.smi_certified, derived_certificate(first, second), name)
