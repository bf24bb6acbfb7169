"""
Command-line entry point: read a config, run one command, write a JSON report
"""
import argparse
import logging
import random
import sys
import time
import typing

from . import config as config_module
from . import report as report_module
from .coupling import (
    attempt_nested_domains,
    coupling_index,
    disjoint_union,
    greedy_fundamental_domain,
    omega_coupling,
    read_back_cocycle,
    validate_finite_coupling,
    view_index_growth,
)
from .errors import ConfigError, SmiError
from .extension import (
    ExtendedSystem,
    YTilde,
    check_well_defined,
    extend_free,
    extend_graph,
    index_growth,
    theorem_b_pipeline,
    verify_coverage,
    verify_disjointness,
)
from .graph import is_irreducible
from .measure import Fraction, SmiCocycleSystem, check_cocycle_identity, compose, direct_product
from .randomorphism import check_invariance, cocycle_from_randembedding, randembedding_from_cocycle
from .word_parse import format_word, parse_syllables


logger = logging.getLogger(__name__)

COMMANDS = (
    "graph-check",
    "reduce",
    "verify-base",
    "omega",
    "compose",
    "product",
    "extend-free",
    "extend-graph",
    "verify-coupling",
    "index-growth",
    "random-check",
    "theorem-b",
    "finite-coupling",
)

EXIT_PASS = 0
EXIT_FAIL = 1


def radii_list(text: str) -> typing.List[int]:
    try:
        radii = [int(r) for r in text.split(",") if r.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")
    if not radii or any(r < 0 for r in radii):
        raise argparse.ArgumentTypeError(f"radii must be nonnegative integers, got {text!r}")
    return radii


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smi_couplings", description="Build and verify SMI couplings of graph products of finite groups"
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path of the JSON config document")
    parser.add_argument("--output", default=None, help="report path (default: stdout)")
    parser.add_argument("--radius", type=int, help="ball radius for coupling views and germ domains")
    parser.add_argument("--words", type=int, help="longest source word checked for disjointness")
    parser.add_argument("--view", type=int, help="radius of the target view for disjointness")
    parser.add_argument("--interior", type=int, help="interior radius for coverage")
    parser.add_argument("--search", type=int, help="longest source word tried for coverage")
    parser.add_argument("--radii", type=radii_list, help="comma-separated radii for index growth")
    parser.add_argument("--ball-cap", dest="ball_cap", type=int, help="largest ball an enumeration may build")
    parser.add_argument("--smi-radius", dest="smi_radius", type=int, help="ball radius for SMI checks on infinite sources")
    parser.add_argument("--seed", type=int, help="seed for randomized checks")
    parser.add_argument("--jobs", type=int, help="worker threads for verification sweeps")
    parser.add_argument("--timing", action="store_true", help="include wall-clock seconds in the report")
    parser.add_argument("--log-level", dest="log_level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    return parser


def configure_logging(level: typing.Optional[str]) -> None:
    level = (level or config_module.environment_defaults()["log_level"]).upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


# ----------------------------------------------------------------------
# shared pieces


def _base(config: config_module.Config) -> typing.Tuple[str, SmiCocycleSystem]:
    config.require("base")
    base = config.document["base"]
    return base["vertex"], config.system(base["system"], "base.system")


def _source_groups(config: config_module.Config, vertex: str, base: SmiCocycleSystem) -> typing.Dict:
    if "source_vertex_groups" in config.document:
        return config.vertex_groups("source_vertex_groups")
    groups = config.vertex_groups("vertex_groups")
    groups[vertex] = next(iter(base.source.groups.values()))
    return groups


def _extension(config: config_module.Config, params: typing.Dict, free: typing.Optional[bool] = None) -> ExtendedSystem:
    """
    The free extension when the config names a free factor, the graph extension otherwise
    """
    vertex, base = _base(config)
    if free is None:
        free = "free_factor" in config.document
    if free:
        config.require("free_factor")
        factor = config.group(config.document["free_factor"], "free_factor")
        free_vertex = "g" if vertex != "g" else "h"
        return extend_free(base, factor, params["smi_radius"], params["ball_cap"], free_vertex=free_vertex, base_vertex=vertex)
    config.require("graph", "vertex_groups")
    return extend_graph(
        config.graph,
        _source_groups(config, vertex, base),
        config.vertex_groups("vertex_groups"),
        vertex,
        base,
        params["smi_radius"],
        params["ball_cap"],
    )


def _index_record(system: SmiCocycleSystem, params: typing.Dict) -> typing.Dict:
    target = system.target
    if target.is_finite():
        view = omega_coupling(system, len(target.graph))
        return dict(index=coupling_index(view), exact=view.exact)
    growth = view_index_growth(system, params["radii"])
    return dict(index=growth.value, exact=False, growth=growth.to_dict())


def _system_summary(system: SmiCocycleSystem) -> typing.Dict:
    return dict(
        name=system.name,
        source=repr(system.source),
        target=repr(system.target),
        points=len(system.space),
        certified=system.smi_certified,
        certificate=system.certificate.to_dict(),
    )


# ----------------------------------------------------------------------
# commands; each returns (passed, payload)


def graph_check(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    config.require("graph")
    irreducible, witness = is_irreducible(config.graph)
    return True, dict(
        vertices=list(config.graph.vertices),
        edges=[list(e) for e in config.graph.edge_list()],
        irreducible=irreducible,
        join_witness=None if witness is None else [sorted(part) for part in witness],
    )


def reduce_word(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    config.require("word")
    product = config.target
    raw = parse_syllables(config.document["word"], product)
    g = config.word
    return True, dict(
        input=config.document["word"],
        input_reduced=product.is_reduced(raw),
        normal_form=format_word(g, product),
        syllables=[[v, product.groups[v].name(a)] for v, a in g.syllables],
        syllable_length=product.syllable_length(g),
        inverse=format_word(product.invert(g), product),
    )


def verify_base(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    if not config.systems:
        raise ConfigError("verify-base needs at least one entry in 'systems'", dict(path="systems"))
    systems = {}
    for name, system in sorted(config.systems.items()):
        witness = check_cocycle_identity(system.cocycle, params["smi_radius"])
        summary = _system_summary(system)
        summary.update(cocycle_identity=witness is None, identity_witness=witness)
        systems[name] = summary
    passed = all(s["certified"] and s["cocycle_identity"] for s in systems.values())
    return passed, dict(systems=systems)


def omega(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    _, system = _base(config)
    view = omega_coupling(system, params["radius"])
    domain = greedy_fundamental_domain(view)
    read_back = read_back_cocycle(view)
    mismatches = [
        dict(element=format_word(l, system.source), point=system.space.points[x])
        for (l, x), value in read_back.items()
        if value is not None and value != system.value(l, x)
    ]
    return not mismatches, dict(
        system=system.name,
        radius=view.radius,
        points=len(view),
        exact=view.exact,
        domain=[view.describe(p) for p in domain.points],
        boundary=[view.describe(p) for p in domain.boundary],
        measure=domain.measure,
        index=coupling_index(view),
        read_back_mismatches=mismatches,
    )


def compose_systems(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    config.require("compose")
    first, second = (config.system(name, f"compose[{i}]") for i, name in enumerate(config.document["compose"]))
    system = compose(first, second)
    payload = _system_summary(system)
    payload.update(_index_record(system, params))
    payload["factors"] = {first.name: _index_record(first, params)["index"], second.name: _index_record(second, params)["index"]}
    return system.smi_certified, payload


def product_systems(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    config.require("product")
    first, second = (config.system(name, f"product[{i}]") for i, name in enumerate(config.document["product"]))
    system = direct_product(first, second)
    payload = _system_summary(system)
    payload.update(_index_record(system, params))
    return system.smi_certified, payload


def extend(config: config_module.Config, params: typing.Dict, free: bool) -> typing.Tuple[bool, typing.Dict]:
    ext = _extension(config, params, free)
    growth = index_growth(ext, params["radii"])
    payload = ext.describe()
    payload.update(system=ext.system.name, growth=growth.to_dict())
    return ext.system.smi_certified, payload


def verify_coupling(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    ext = _extension(config, params)
    displacement = ext.system.cocycle.displacement()
    words, interior = params["words"], params["interior"]
    view = params["view"] if params["view"] is not None else words * displacement + params["radius"]
    search = params["search"] if params["search"] is not None else interior + (displacement + 1) * interior
    ytilde = YTilde(ext)
    disjointness = verify_disjointness(ext, words, view, params["jobs"], ytilde)
    coverage = verify_coverage(ext, interior, search, params["jobs"], ytilde)
    well_defined = check_well_defined(ext, random.Random(params["seed"]), radius=words)
    growth = index_growth(ext, params["radii"], ytilde)
    timing = params.get("timing", False)
    passed = disjointness.passed and coverage.passed and well_defined.passed
    return passed, dict(
        extension=ext.describe(),
        displacement=displacement,
        disjointness=disjointness.to_dict(timing),
        coverage=coverage.to_dict(timing),
        well_defined=well_defined.to_dict(timing),
        growth=growth.to_dict(),
    )


def growth_of_index(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    ext = _extension(config, params)
    growth = index_growth(ext, params["radii"])
    return True, dict(
        radii=list(growth.radii),
        partials=list(growth.partials),
        value=growth.value,
        note=growth.note,
        base_index=ext.base_index,
        **{"class": growth.classification},
    )


def random_check(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    _, system = _base(config)
    measure = randembedding_from_cocycle(system, params["radius"])
    payload = dict(system=system.name, measure=measure.to_dict())
    round_trip = None
    if system.source.is_finite():
        invariance = check_invariance(measure, jobs=params["jobs"])
        recovered = cocycle_from_randembedding(measure, f"{system.name}'")
        again = randembedding_from_cocycle(recovered)
        round_trip = again.as_dict() == measure.as_dict()
        payload.update(invariance=invariance.to_dict(), round_trip=round_trip)
    else:
        invariance = check_invariance(measure, system.source.ball(1), params["jobs"])
        payload.update(invariance=invariance.to_dict())
    passed = measure.is_randembedding and invariance.invariant and round_trip is not False
    if "free_factor" in config.document or "graph" in config.document:
        ext = _extension(config, params)
        extended = randembedding_from_cocycle(ext.system, params["radius"])
        payload["extension"] = dict(system=ext.system.name, germs=len(extended.support), randembedding=extended.is_randembedding)
        passed = passed and extended.is_randembedding
    return passed, payload


def theorem_b(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    config.require("graph")
    bases = {v: config.system(name, f"bases.{v}") for v, name in config.document.get("bases", {}).items()}
    source_groups = None
    if "source_vertex_groups" in config.document or "vertex_groups" in config.document:
        source_groups = config.vertex_groups("source_vertex_groups")
    pipeline = theorem_b_pipeline(config.graph, bases, params["radii"], params["smi_radius"], params["ball_cap"], source_groups)
    payload = pipeline.to_dict()
    payload["class"] = pipeline.classification
    return pipeline.system.smi_certified, payload


def finite_coupling(config: config_module.Config, params: typing.Dict) -> typing.Tuple[bool, typing.Dict]:
    config.require("finite_coupling")
    spec = config.document["finite_coupling"]
    if "coupling" not in spec:
        raise ConfigError("finite_coupling.coupling: missing", dict(path="finite_coupling.coupling"))
    fc = config.couplings[spec["coupling"]]
    validation = validate_finite_coupling(fc)
    nesting = attempt_nested_domains(fc)
    payload = dict(coupling=fc.name, points=len(fc), validation=validation.to_dict(), nesting=nesting.to_dict())
    if "union_with" in spec:
        other = config.couplings[spec["union_with"]]
        unions = []
        for a in spec.get("weights", ["1"]):
            union = disjoint_union(fc, other, Fraction(a))
            unions.append(dict(a=Fraction(a), index=coupling_index(union)))
        payload["unions"] = unions
    return True, payload


DISPATCH: typing.Dict[str, typing.Callable[[config_module.Config, typing.Dict], typing.Tuple[bool, typing.Dict]]] = {
    "graph-check": graph_check,
    "reduce": reduce_word,
    "verify-base": verify_base,
    "omega": omega,
    "compose": compose_systems,
    "product": product_systems,
    "extend-free": lambda config, params: extend(config, params, True),
    "extend-graph": lambda config, params: extend(config, params, False),
    "verify-coupling": verify_coupling,
    "index-growth": growth_of_index,
    "random-check": random_check,
    "theorem-b": theorem_b,
    "finite-coupling": finite_coupling,
}


def run(command: str, config: config_module.Config, flags: typing.Optional[typing.Mapping] = None) -> typing.Tuple[typing.Dict, int]:
    """
    Run one command and return its report with the exit code: 0 pass, 1 fail, the error's own code on error
    """
    flags = dict(flags or {})
    started = time.monotonic()
    try:
        if command not in DISPATCH:
            raise ConfigError(f"unknown command {command!r}", dict(command=command))
        params = config_module.resolve_parameters(config.document, flags)
        params["timing"] = bool(flags.get("timing"))
        passed, payload = DISPATCH[command](config, params)
    except SmiError as e:
        logger.error("%s failed: %s", command, e.message)
        return report_module.error_report(command, e), e.exit_code
    if flags.get("timing"):
        payload["seconds"] = round(time.monotonic() - started, 6)
    logger.info("%s finished in %.3fs: %s", command, time.monotonic() - started, "pass" if passed else "fail")
    status = report_module.PASS if passed else report_module.FAIL
    return report_module.make_report(command, status, payload), EXIT_PASS if passed else EXIT_FAIL


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "output", "log_level")}
    try:
        config = config_module.load_config(args.config, args.ball_cap)
    except SmiError as e:
        logger.error("cannot load %s: %s", args.config, e.message)
        report, code = report_module.error_report(args.command, e), e.exit_code
    else:
        report, code = run(args.command, config, flags)
    report_module.write_report(report, args.output)
    return code


if __name__ == "__main__":
    sys.exit(main())
