"""
Text syntax for graph product elements

A word is a sequence of tokens separated by whitespace, "*" or "·". Each
token is vertex:element, optionally raised to an integer power with ^k.
Elements are display names or indices of the vertex group. "e" or empty
text is the identity. Examples: "v1:t^3 v2:b", "g:g * t:t^2", "v1:1".
"""
import logging
import re
import typing

from .errors import ValidationError
from .vertex_group import IDENTITY
from .words import GraphProduct, GroupElement, Syllable


logger = logging.getLogger(__name__)


SEPARATOR_REGEX = re.compile(r"[\s*·]+")

TOKEN_REGEX = re.compile(
    r"""
        ^(?P<vertex>[^:\s*·^]+)  # vertex identifier
        :(?P<element>[^\s*·]+?)  # element name (may itself contain ^) or index
        (?:\^\((?P<power>-?[0-9]+)\))?  # optional power, parenthesised
        $
        """,
    re.VERBOSE,
)


def split_tokens(text: str) -> typing.List[str]:
    return [token for token in SEPARATOR_REGEX.split(text.strip()) if token]


def parse_syllables(text: str, product: GraphProduct) -> typing.List[Syllable]:
    """
    Parse text into a raw (not yet reduced) syllable list.

    Element names such as "t^2" are looked up as names first. A token
    "v:t^k" whose full element text is not a name is read as name "t"
    raised to the power k; "v:t^(k)" always means a power.
    """
    syllables = []
    for token in split_tokens(text):
        if token == "e":
            continue
        match = TOKEN_REGEX.match(token)
        if match is None:
            raise ValidationError(f"cannot parse word token {token!r}", dict(token=token))
        vertex = match.group("vertex")
        product.graph.position(vertex)
        group = product.groups[vertex]
        element, power = match.group("element"), match.group("power")
        if power is None:
            element, power = _split_power(element, group.names)
        index = _element_index(element, group)
        if index is None:
            raise ValidationError(
                f"vertex {vertex!r} has no element {element!r}", dict(token=token, vertex=vertex, element=element)
            )
        syllables.append(Syllable(vertex, group.power(index, int(power))))
    logger.debug("parsed %r into %d syllables", text, len(syllables))
    return syllables


def _split_power(element: str, names: typing.Sequence[str]) -> typing.Tuple[str, int]:
    if element in names or "^" not in element:
        return element, 1
    base, _, exponent = element.rpartition("^")
    if re.fullmatch(r"-?[0-9]+", exponent):
        return base, int(exponent)
    return element, 1


def _element_index(element: str, group) -> typing.Optional[int]:
    if element in group.names:
        return group.names.index(element)
    if re.fullmatch(r"[0-9]+", element) and int(element) < group.order:
        return int(element)
    return None


def parse_word(text: str, product: GraphProduct) -> GroupElement:
    """
    Parse and reduce a word to its canonical normal form
    """
    return product.reduce(parse_syllables(text, product))


def format_word(g: GroupElement, product: GraphProduct) -> str:
    """
    Render an element with display names; parse_word reads it back
    """
    if not g.syllables:
        return "e"
    return " ".join(f"{v}:{product.groups[v].name(a)}" for v, a in g.syllables if a != IDENTITY)
