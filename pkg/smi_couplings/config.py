"""
Run configuration: environment defaults and the JSON config document

The document names groups once and refers to them everywhere else by name:

    {
      "graph": {"vertices": ["v1", "v2"], "edges": [["v1", "v2"]]},
      "groups": {"Z2": {"cyclic": 2, "generator": "s"}, "Z4": {"cyclic": 4, "generator": "t"}},
      "vertex_groups": {"v1": "Z4", "v2": "Z2"},
      "systems": {"double": {"source": "Z2", "target": "Z4", "cocycle": {"s": ["t^2"]}}},
      "base": {"vertex": "v1", "system": "double"},
      "parameters": {"radius": 2}
    }

See README.md for every section.
"""
import dataclasses
import json
import logging
import os
import typing

from .coupling import FiniteCoupling, coupling_from_view, omega_coupling, subgroup_coupling, translation_coupling
from .errors import ConfigError, SmiError
from .graph import Graph, build_graph
from .measure import Fraction, SmiCocycleSystem, certify, make_action, make_cocycle, make_space, one_point_space, trivial_action
from .vertex_group import VertexGroup, cyclic_group
from .word_parse import parse_word
from .words import DEFAULT_BALL_CAP, GraphProduct, GroupElement, single_vertex_product


logger = logging.getLogger(__name__)

SECTIONS = (
    "graph",
    "groups",
    "vertex_groups",
    "source_vertex_groups",
    "systems",
    "base",
    "free_factor",
    "bases",
    "word",
    "compose",
    "product",
    "couplings",
    "finite_coupling",
    "parameters",
)

PARAMETERS = ("radius", "words", "view", "interior", "search", "radii", "ball_cap", "seed", "jobs", "smi_radius")

DEFAULT_PARAMETERS = dict(radius=2, words=3, view=None, interior=1, search=None, radii=[0, 1, 2, 3], smi_radius=2)


def environment_defaults() -> typing.Dict[str, typing.Any]:
    """
    Process-wide defaults from SMI_* environment variables
    """
    values = {}
    for key, variable, default in (
        ("ball_cap", "SMI_BALL_CAP", DEFAULT_BALL_CAP),
        ("jobs", "SMI_JOBS", 1),
        ("seed", "SMI_SEED", 0),
    ):
        raw = os.environ.get(variable, default)
        try:
            values[key] = int(raw)
        except ValueError:
            raise ConfigError(f"{variable} must be an integer, got {raw!r}", dict(variable=variable))
    values["log_level"] = os.environ.get("SMI_LOG_LEVEL", "WARNING").upper()
    return values


def resolve_parameters(document: typing.Mapping, flags: typing.Mapping[str, typing.Any]) -> typing.Dict[str, typing.Any]:
    """
    Flags beat the document's parameters, which beat the environment, which beats the built-in defaults
    """
    resolved = dict(DEFAULT_PARAMETERS)
    resolved.update({k: v for k, v in environment_defaults().items() if k in PARAMETERS})
    resolved.update(document.get("parameters", {}))
    resolved.update({k: v for k, v in flags.items() if k in PARAMETERS and v is not None})
    return resolved


@dataclasses.dataclass
class Config:
    """
    A parsed config document with every name resolved to built objects.

    Equality is equality of the normalized documents.
    """

    document: typing.Dict
    groups: typing.Dict[str, VertexGroup] = dataclasses.field(default_factory=dict, compare=False)
    graph: typing.Optional[Graph] = dataclasses.field(default=None, compare=False)
    target: typing.Optional[GraphProduct] = dataclasses.field(default=None, compare=False)
    source: typing.Optional[GraphProduct] = dataclasses.field(default=None, compare=False)
    systems: typing.Dict[str, SmiCocycleSystem] = dataclasses.field(default_factory=dict, compare=False)
    couplings: typing.Dict[str, FiniteCoupling] = dataclasses.field(default_factory=dict, compare=False)
    word: typing.Optional[GroupElement] = dataclasses.field(default=None, compare=False)

    @property
    def parameters(self) -> typing.Dict:
        return self.document.get("parameters", {})

    def system(self, name: str, path: str) -> SmiCocycleSystem:
        try:
            return self.systems[name]
        except KeyError:
            raise ConfigError(f"{path}: unknown system {name!r}", dict(path=path, name=name))

    def group(self, name: str, path: str) -> VertexGroup:
        try:
            return self.groups[name]
        except KeyError:
            raise ConfigError(f"{path}: unknown group {name!r}", dict(path=path, name=name))

    def vertex_groups(self, key: str = "vertex_groups") -> typing.Dict[str, VertexGroup]:
        names = self.document.get(key) or self.document.get("vertex_groups", {})
        return {v: self.groups[g] for v, g in names.items()}

    def require(self, *sections: str) -> None:
        for section in sections:
            if section not in self.document:
                raise ConfigError(f"this command needs the {section!r} section", dict(path=section))


def _expect(value: typing.Any, kind: typing.Union[type, typing.Tuple[type, ...]], path: str) -> typing.Any:
    if isinstance(value, bool) or not isinstance(value, kind):
        names = kind.__name__ if isinstance(kind, type) else " or ".join(k.__name__ for k in kind)
        raise ConfigError(f"{path}: expected {names}, got {type(value).__name__}", dict(path=path))
    return value


def _element(group: VertexGroup, value: typing.Any, path: str) -> int:
    try:
        return group.index(_expect(value, (str, int), path))
    except SmiError:
        raise ConfigError(f"{path}: {value!r} is not an element of {group.label}", dict(path=path, element=str(value)))


def _rational(value: typing.Any, path: str) -> Fraction:
    try:
        result = Fraction(_expect(value, (str, int), path))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{path}: {value!r} is not an exact rational", dict(path=path))
    return result


def _build_group(name: str, spec: typing.Any, path: str) -> VertexGroup:
    spec = _expect(spec, dict, path)
    if "cyclic" in spec:
        order = _expect(spec["cyclic"], int, f"{path}.cyclic")
        return cyclic_group(order, str(spec.get("generator", "t")), label=name)
    if "table" in spec:
        table = _expect(spec["table"], list, f"{path}.table")
        names = spec.get("names")
        generators = spec.get("generators")
        group = VertexGroup(table, names, label=name)
        if generators is not None:
            generators = [_element(group, g, f"{path}.generators[{i}]") for i, g in enumerate(generators)]
            group = VertexGroup(table, names, label=name, generators=generators)
        return group
    raise ConfigError(f"{path}: a group needs 'cyclic' or 'table'", dict(path=path))


def _build_system(config: Config, name: str, spec: typing.Any, path: str, ball_cap: int) -> SmiCocycleSystem:
    spec = _expect(spec, dict, path)
    if "identity" in spec:
        group_name = _expect(spec["identity"], str, f"{path}.identity")
        product = single_vertex_product(group_name, config.group(group_name, f"{path}.identity"), ball_cap)
        images = {s: [s] for s in product.generators()}
        space = one_point_space()
        return certify(make_cocycle(trivial_action(product, space), product, images), name)
    source_name = _expect(spec.get("source"), str, f"{path}.source")
    target_name = _expect(spec.get("target"), str, f"{path}.target")
    source_group = config.group(source_name, f"{path}.source")
    target_group = config.group(target_name, f"{path}.target")
    source = single_vertex_product(source_name, source_group, ball_cap)
    target = single_vertex_product(target_name, target_group, ball_cap)
    space_spec = _expect(spec.get("space", {"weights": ["1"]}), dict, f"{path}.space")
    weights = [_rational(w, f"{path}.space.weights[{i}]") for i, w in enumerate(_expect(space_spec.get("weights"), list, f"{path}.space.weights"))]
    space = make_space(weights, space_spec.get("points"))

    def source_element(key: str, where: str) -> GroupElement:
        return source.syllable(source_name, _element(source_group, key, where))

    action_spec = _expect(spec.get("action", {}), dict, f"{path}.action")
    if action_spec:
        table = {}
        for key, image in action_spec.items():
            where = f"{path}.action.{key}"
            image = [space.index(p) for p in _expect(image, list, where)]
            table[source_element(key, where)] = image
        action = make_action(source, space, table)
    else:
        action = trivial_action(source, space)
    cocycle_spec = _expect(spec.get("cocycle"), dict, f"{path}.cocycle")
    values = {}
    for key, column in cocycle_spec.items():
        where = f"{path}.cocycle.{key}"
        column = _expect(column, list, where)
        values[source_element(key, where)] = [
            target.syllable(target_name, _element(target_group, v, f"{where}[{i}]")) for i, v in enumerate(column)
        ]
    return certify(make_cocycle(action, target, values), name)


def _build_coupling(config: Config, name: str, spec: typing.Any, path: str, ball_cap: int) -> FiniteCoupling:
    spec = _expect(spec, dict, path)
    kind = spec.get("kind")
    if kind == "system":
        system = config.system(_expect(spec.get("system"), str, f"{path}.system"), f"{path}.system")
        return coupling_from_view(omega_coupling(system, len(system.target.graph)), name)
    lambda_name = _expect(spec.get("lambda"), str, f"{path}.lambda")
    gamma_name = _expect(spec.get("gamma"), str, f"{path}.gamma")
    lam = single_vertex_product(lambda_name, config.group(lambda_name, f"{path}.lambda"), ball_cap)
    gam = single_vertex_product(gamma_name, config.group(gamma_name, f"{path}.gamma"), ball_cap)
    if kind == "translation":
        return translation_coupling(lam, gam, name)
    if kind == "subgroup":
        embedding = {}
        for key, value in _expect(spec.get("embedding"), dict, f"{path}.embedding").items():
            where = f"{path}.embedding.{key}"
            s = lam.syllable(lambda_name, _element(lam.groups[lambda_name], key, where))
            embedding[s] = gam.syllable(gamma_name, _element(gam.groups[gamma_name], value, where))
        return subgroup_coupling(gam, lam, embedding, name)
    raise ConfigError(f"{path}.kind: expected 'translation', 'subgroup' or 'system', got {kind!r}", dict(path=f"{path}.kind"))


def _check_parameters(raw: typing.Any) -> typing.Dict:
    raw = _expect(raw, dict, "parameters")
    for key, value in raw.items():
        path = f"parameters.{key}"
        if key not in PARAMETERS:
            raise ConfigError(f"{path}: unknown parameter", dict(path=path))
        if key == "radii":
            for i, r in enumerate(_expect(value, list, path)):
                if _expect(r, int, f"{path}[{i}]") < 0:
                    raise ConfigError(f"{path}[{i}]: radii must be nonnegative", dict(path=f"{path}[{i}]"))
        elif value is not None and _expect(value, int, path) < 0:
            raise ConfigError(f"{path}: must be nonnegative", dict(path=path))
    return raw


def _names(config: Config, mapping: typing.Any, path: str, vertices: typing.Sequence[str]) -> typing.Dict[str, str]:
    mapping = _expect(mapping, dict, path)
    for v, group_name in mapping.items():
        if v not in vertices:
            raise ConfigError(f"{path}: unknown vertex {v!r}", dict(path=f"{path}.{v}", name=v))
        config.group(_expect(group_name, str, f"{path}.{v}"), f"{path}.{v}")
    missing = [v for v in vertices if v not in mapping]
    if missing:
        raise ConfigError(f"{path}: no group for vertices {missing}", dict(path=path, vertices=missing))
    return mapping


def parse_config(text: str, ball_cap: typing.Optional[int] = None) -> Config:
    """
    Parse and validate a config document, building every group, system and coupling it names
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}", dict(line=e.lineno, column=e.colno))
    document = _expect(document, dict, "$")
    unknown = sorted(set(document) - set(SECTIONS))
    if unknown:
        raise ConfigError(f"unknown sections {unknown}", dict(path=unknown[0]))
    parameters = _check_parameters(document.get("parameters", {}))
    if ball_cap is None:
        ball_cap = parameters.get("ball_cap") or environment_defaults()["ball_cap"]
    config = Config(document)

    for name, spec in _expect(document.get("groups", {}), dict, "groups").items():
        try:
            config.groups[name] = _build_group(name, spec, f"groups.{name}")
        except ConfigError:
            raise
        except SmiError as e:
            raise ConfigError(f"groups.{name}: {e.message}", dict(path=f"groups.{name}", **e.witness))

    if "graph" in document:
        spec = _expect(document["graph"], dict, "graph")
        vertices = _expect(spec.get("vertices"), list, "graph.vertices")
        edges = _expect(spec.get("edges", []), list, "graph.edges")
        try:
            config.graph = build_graph(vertices, edges)
        except SmiError as e:
            raise ConfigError(f"graph: {e.message}", dict(path="graph", **e.witness))
        for key in ("vertex_groups", "source_vertex_groups"):
            if key in document:
                _names(config, document[key], key, config.graph.vertices)
        if "vertex_groups" in document:
            config.target = GraphProduct(config.graph, config.vertex_groups("vertex_groups"), ball_cap)
            config.source = GraphProduct(config.graph, config.vertex_groups("source_vertex_groups"), ball_cap)

    for name, spec in _expect(document.get("systems", {}), dict, "systems").items():
        try:
            config.systems[name] = _build_system(config, name, spec, f"systems.{name}", ball_cap)
        except ConfigError:
            raise
        except SmiError as e:
            e.witness.setdefault("path", f"systems.{name}")
            raise

    for name, spec in _expect(document.get("couplings", {}), dict, "couplings").items():
        try:
            config.couplings[name] = _build_coupling(config, name, spec, f"couplings.{name}", ball_cap)
        except ConfigError:
            raise
        except SmiError as e:
            e.witness.setdefault("path", f"couplings.{name}")
            raise

    _check_references(config)
    if "word" in document:
        if config.target is None:
            raise ConfigError("word: needs 'graph' and 'vertex_groups'", dict(path="word"))
        try:
            config.word = parse_word(_expect(document["word"], str, "word"), config.target)
        except SmiError as e:
            raise ConfigError(f"word: {e.message}", dict(path="word", **e.witness))
    logger.info("parsed config with %d groups and %d systems", len(config.groups), len(config.systems))
    return config


def _check_references(config: Config) -> None:
    document = config.document
    vertices = config.graph.vertices if config.graph is not None else ()
    if "base" in document:
        base = _expect(document["base"], dict, "base")
        vertex = _expect(base.get("vertex"), str, "base.vertex")
        if config.graph is not None and vertex not in vertices:
            raise ConfigError(f"base.vertex: unknown vertex {vertex!r}", dict(path="base.vertex", name=vertex))
        config.system(_expect(base.get("system"), str, "base.system"), "base.system")
    if "free_factor" in document:
        config.group(_expect(document["free_factor"], str, "free_factor"), "free_factor")
    for v, name in _expect(document.get("bases", {}), dict, "bases").items():
        if config.graph is not None and v not in vertices:
            raise ConfigError(f"bases: unknown vertex {v!r}", dict(path=f"bases.{v}", name=v))
        config.system(_expect(name, str, f"bases.{v}"), f"bases.{v}")
    for key in ("compose", "product"):
        if key in document:
            pair = _expect(document[key], list, key)
            if len(pair) != 2:
                raise ConfigError(f"{key}: expected two system names", dict(path=key))
            for i, name in enumerate(pair):
                config.system(_expect(name, str, f"{key}[{i}]"), f"{key}[{i}]")
    if "finite_coupling" in document:
        spec = _expect(document["finite_coupling"], dict, "finite_coupling")
        for key in ("coupling", "union_with"):
            if key in spec:
                name = _expect(spec[key], str, f"finite_coupling.{key}")
                if name not in config.couplings:
                    raise ConfigError(f"finite_coupling.{key}: unknown coupling {name!r}", dict(path=f"finite_coupling.{key}", name=name))
        for i, a in enumerate(spec.get("weights", [])):
            if _rational(a, f"finite_coupling.weights[{i}]") <= 0:
                raise ConfigError(f"finite_coupling.weights[{i}]: must be positive", dict(path=f"finite_coupling.weights[{i}]"))


def serialize_config(config: Config) -> str:
    """
    Render the document back to JSON; parsing the result gives an equal Config
    """
    return json.dumps(config.document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def load_config(path: str, ball_cap: typing.Optional[int] = None) -> Config:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}", dict(path=path))
    return parse_config(text, ball_cap)
