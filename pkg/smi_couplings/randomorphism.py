"""
Map germs f: L -> G with f(e) = e, the L-action on them, and finitely
supported invariant measures on germs (randembeddings), converted to and
from SMI cocycle systems.
"""
import collections
import dataclasses
import logging
import typing

from .errors import DomainTooSmallError, NotCertifiedError, ValidationError
from .measure import (
    Fraction,
    SmiCocycleSystem,
    certify,
    make_action,
    make_cocycle,
    make_space,
)
from .sweep import run_chunks
from .word_parse import format_word
from .words import GraphProduct, GroupElement


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class MapGerm:
    """
    A map from a finite set of source elements to the target; pairs are kept in source order
    """

    pairs: typing.Tuple[typing.Tuple[GroupElement, GroupElement], ...]

    @property
    def domain(self) -> typing.FrozenSet[GroupElement]:
        return frozenset(a for a, _ in self.pairs)

    def __call__(self, a: GroupElement) -> GroupElement:
        for b, value in self.pairs:
            if b == a:
                return value
        raise DomainTooSmallError(f"{a} is outside the germ's domain", dict(element=str(a)))

    def as_dict(self) -> typing.Dict[GroupElement, GroupElement]:
        return dict(self.pairs)

    @property
    def fixes_identity(self) -> bool:
        return all(value.is_identity for a, value in self.pairs if a.is_identity)

    @property
    def injective(self) -> bool:
        values = [value for _, value in self.pairs]
        return len(set(values)) == len(values)

    def restrict(self, domain: typing.AbstractSet[GroupElement]) -> "MapGerm":
        return MapGerm(tuple((a, v) for a, v in self.pairs if a in domain))

    def render(self, source: GraphProduct, target: GraphProduct) -> typing.Dict[str, str]:
        return {format_word(a, source): format_word(v, target) for a, v in self.pairs}


def make_germ(source: GraphProduct, target: GraphProduct, assignment: typing.Mapping[GroupElement, GroupElement]) -> MapGerm:
    """
    Build a germ with its pairs in breadth-first source order; e maps to e
    """
    assignment = dict(assignment)
    assignment.setdefault(source.identity, target.identity)
    for a, v in assignment.items():
        source.check_element(a)
        target.check_element(v)
    germ = MapGerm(tuple(sorted(assignment.items(), key=lambda pair: source.sort_key(pair[0]))))
    if not germ.fixes_identity:
        raise ValidationError("a germ must send e to e", dict(value=str(assignment[source.identity])))
    return germ


@dataclasses.dataclass(frozen=True)
class GermMeasure:
    source: GraphProduct
    target: GraphProduct
    support: typing.Tuple[MapGerm, ...]
    weights: typing.Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.support) != len(self.weights) or not self.support:
            raise ValidationError("a germ measure needs one weight per support germ")
        if any(w <= 0 for w in self.weights) or sum(self.weights, Fraction(0)) != 1:
            raise ValidationError("germ weights must be positive and sum to 1")

    @property
    def is_randembedding(self) -> bool:
        return all(f.injective for f in self.support)

    def as_dict(self) -> typing.Dict[MapGerm, Fraction]:
        return dict(zip(self.support, self.weights))

    def to_dict(self) -> typing.Dict:
        return dict(
            support=[f.render(self.source, self.target) for f in self.support],
            weights=list(self.weights),
            randembedding=self.is_randembedding,
        )


def merge(weighted: typing.Iterable[typing.Tuple[MapGerm, Fraction]]) -> "collections.OrderedDict[MapGerm, Fraction]":
    merged: "collections.OrderedDict[MapGerm, Fraction]" = collections.OrderedDict()
    for f, w in weighted:
        merged[f] = merged.get(f, Fraction(0)) + w
    return merged


def germ_act(l: GroupElement, f: MapGerm, source: GraphProduct, target: GraphProduct) -> MapGerm:
    """
    (l.f)(a) = f(a l) f(l)^-1 on the shrunken domain {a : a l in dom(f)}
    """
    domain = f.domain
    if l not in domain:
        raise DomainTooSmallError(
            f"{format_word(l, source)} is outside the germ's domain; use a larger radius", dict(element=format_word(l, source))
        )
    values = f.as_dict()
    shift = target.invert(values[l])
    pairs = []
    for a, _ in f.pairs:
        al = source.multiply(a, l)
        if al in domain:
            pairs.append((a, target.multiply(values[al], shift)))
    return MapGerm(tuple(pairs))


def randembedding_from_cocycle(system: SmiCocycleSystem, radius: typing.Optional[int] = None) -> GermMeasure:
    """
    Push the measure on X forward along x -> (l -> alpha(l, x)), merging equal germs
    """
    if not system.smi_certified:
        raise NotCertifiedError(f"{system.name!r} is not SMI-certified", dict(system=system.name))
    source, target = system.source, system.target
    domain = system.cocycle.source_elements(radius)
    germs = []
    for x in range(len(system.space)):
        f = MapGerm(tuple((a, system.value(a, x)) for a in domain))
        if not f.injective:
            raise ValidationError(
                f"germ at point {system.space.points[x]} is not injective", dict(point=system.space.points[x])
            )
        germs.append((f, system.space.weight(x)))
    merged = merge(germs)
    logger.info("randembedding of %s: %d germs", system.name, len(merged))
    return GermMeasure(source, target, tuple(merged), tuple(merged.values()))


@dataclasses.dataclass(frozen=True)
class InvarianceReport:
    invariant: bool
    checked: typing.Tuple[str, ...]
    violations: typing.Tuple[typing.Dict, ...]

    def to_dict(self) -> typing.Dict:
        return dict(invariant=self.invariant, checked=list(self.checked), violations=list(self.violations))


def _compare(measure: GermMeasure, l: GroupElement) -> typing.Optional[Fraction]:
    source, target = measure.source, measure.target
    pushed = [(germ_act(l, f, source, target), w) for f, w in zip(measure.support, measure.weights)]
    common = frozenset.intersection(*(g.domain for g, _ in pushed), *(f.domain for f in measure.support))
    after = merge((g.restrict(common), w) for g, w in pushed)
    before = merge((f.restrict(common), w) for f, w in zip(measure.support, measure.weights))
    gap = sum((abs(after.get(f, Fraction(0)) - before.get(f, Fraction(0))) for f in set(after) | set(before)), Fraction(0)) / 2
    return gap or None


def check_invariance(
    measure: GermMeasure, lambdas: typing.Optional[typing.Sequence[GroupElement]] = None, jobs: int = 1
) -> InvarianceReport:
    """
    Compare the pushforward under each l with the measure itself, on common shrunken domains.

    A violation lists l and the total variation gap. Defaults to every
    element of a finite source.
    """
    source = measure.source
    if lambdas is None:
        lambdas = source.elements()

    def work(chunk: typing.Sequence[GroupElement]) -> typing.List[typing.Dict]:
        found = []
        for l in chunk:
            gap = _compare(measure, l)
            if gap is not None:
                found.append(dict(element=format_word(l, source), gap=gap))
        return found

    violations = [v for chunk in run_chunks(work, list(lambdas), jobs) for v in chunk]
    report = InvarianceReport(not violations, tuple(format_word(l, source) for l in lambdas), tuple(violations))
    logger.info("invariance over %d elements: %s", len(lambdas), report.invariant)
    return report


def cocycle_from_randembedding(measure: GermMeasure, name: str = "randembedding") -> SmiCocycleSystem:
    """
    X = the support, L acting by germ_act, alpha(l, f) = f(l)
    """
    source, target = measure.source, measure.target
    if not source.is_finite():
        raise DomainTooSmallError("germs over an infinite source cannot have full domains")
    everything = frozenset(source.elements())
    for i, f in enumerate(measure.support):
        if f.domain != everything:
            raise DomainTooSmallError(f"germ {i} is not defined on the whole source group", dict(germ=i))
        if not f.injective:
            raise ValidationError(f"germ {i} is not injective, so this is not a randembedding", dict(germ=f.render(source, target)))
    report = check_invariance(measure)
    if not report.invariant:
        raise ValidationError("the germ measure is not invariant", dict(violation=report.violations[0]))
    position = {f: i for i, f in enumerate(measure.support)}
    space = make_space(list(measure.weights), [f"f{i}" for i in range(len(measure.support))])
    permutations = {}
    for s in source.generators():
        image = []
        for f in measure.support:
            moved = germ_act(s, f, source, target)
            if moved not in position:
                raise ValidationError(
                    f"{format_word(s, source)} moves a support germ outside the support",
                    dict(element=format_word(s, source), germ=f.render(source, target)),
                )
            image.append(position[moved])
        permutations[s] = image
    action = make_action(source, space, permutations)
    cocycle = make_cocycle(action, target, {s: [f(s) for f in measure.support] for s in source.generators()})
    system = certify(cocycle, name)
    if not system.smi_certified:
        raise ValidationError("the recovered cocycle is not SMI", system.certificate.counterexample)
    return system
