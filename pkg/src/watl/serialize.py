"""JSON-compatible interchange formats for models, words and triples.

Rationals travel as strings "p/q" (bare integers allowed) so that no
float drift can enter through files; discounted values are decimal
strings with twelve significant digits.  All loaders validate the
reconstructed object and report every problem at once.
"""

from __future__ import annotations

import json

from . import rdl
from .core import ClockConstraint, Edge, TimedAutomaton, TimedWord
from .errors import ParseError
from .monoids import monoid_from_id
from .transform import NivatTriple
from .weights import format_weight, parse_weight
from .wta import WeightedTimedAutomaton


def dump_json(payload) -> str:
    """Compact deterministic JSON for stdout and files."""
    return json.dumps(payload, separators=(",", ":"), sort_keys=False)


def _require_fields(data, fields, what: str):
    if not isinstance(data, dict):
        raise ParseError(f"{what} must be an object, got {type(data).__name__}")
    missing = [f for f in fields if f not in data]
    if missing:
        raise ParseError(f"{what} is missing fields: {', '.join(missing)}")


# ---------------------------------------------------------------------------
# Timed words


def word_to_list(word: TimedWord) -> list:
    return [[letter, format_weight(delay)] for letter, delay in word]


def word_from_list(items, timestamps: bool = False) -> TimedWord:
    if not isinstance(items, list) or not items:
        raise ParseError("a timed word is a non-empty list of [letter, delay] pairs")
    pairs = []
    for k, item in enumerate(items):
        if not (isinstance(item, list) and len(item) == 2):
            raise ParseError(f"word entry {k} is not a [letter, value] pair")
        letter, value = item
        pairs.append((str(letter), parse_weight(str(value))))
    if timestamps:
        return TimedWord.from_timestamps(pairs)
    return TimedWord.from_pairs(pairs)


# ---------------------------------------------------------------------------
# Automata


def automaton_to_dict(automaton: TimedAutomaton) -> dict:
    data = {
        "alphabet": list(automaton.alphabet),
        "locations": list(automaton.locations),
        "clocks": list(automaton.clocks),
        "initial": list(automaton.initial),
        "final": list(automaton.final),
        "edges": [
            {
                "id": e.id,
                "source": e.source,
                "label": e.label,
                "guard": str(e.guard),
                "resets": sorted(e.resets),
                "target": e.target,
            }
            for e in automaton.edges
        ],
    }
    if automaton.unambiguous:
        data["unambiguous"] = True
    return data


def automaton_from_dict(data) -> TimedAutomaton:
    _require_fields(data, ("alphabet", "locations", "clocks", "initial",
                           "final", "edges"), "automaton")
    edges = []
    for k, entry in enumerate(data["edges"]):
        _require_fields(entry, ("id", "source", "label", "guard", "resets",
                                "target"), f"edge {k}")
        edges.append(Edge(
            str(entry["id"]), str(entry["source"]), str(entry["label"]),
            ClockConstraint.parse(str(entry["guard"])),
            frozenset(str(c) for c in entry["resets"]), str(entry["target"])))
    automaton = TimedAutomaton(
        alphabet=tuple(str(a) for a in data["alphabet"]),
        locations=tuple(str(l) for l in data["locations"]),
        clocks=tuple(str(c) for c in data["clocks"]),
        initial=tuple(str(l) for l in data["initial"]),
        final=tuple(str(l) for l in data["final"]),
        edges=tuple(edges),
        unambiguous=bool(data.get("unambiguous", False)),
    )
    automaton.validate()
    return automaton


# ---------------------------------------------------------------------------
# Weighted automata


def wta_to_dict(wta: WeightedTimedAutomaton) -> dict:
    data = automaton_to_dict(wta.base)
    data["monoid"] = wta.monoid.id
    data["weights"] = {
        "locations": {l: format_weight(w) for l, w in sorted(wta.location_weights.items())},
        "edges": {e: format_weight(w) for e, w in sorted(wta.edge_weights.items())},
    }
    return data


def wta_from_dict(data) -> WeightedTimedAutomaton:
    _require_fields(data, ("monoid", "weights"), "weighted automaton")
    base = automaton_from_dict(data)
    monoid = monoid_from_id(str(data["monoid"]))
    weights = data["weights"]
    _require_fields(weights, ("locations", "edges"), "weights")
    location_weights = {str(l): parse_weight(str(v))
                        for l, v in weights["locations"].items()}
    edge_weights = {str(e): parse_weight(str(v))
                    for e, v in weights["edges"].items()}
    return WeightedTimedAutomaton(base, monoid, location_weights, edge_weights)


# ---------------------------------------------------------------------------
# Nivat triples


def triple_to_dict(triple: NivatTriple) -> dict:
    if triple.language_class == "sentence":
        language = rdl.to_text(triple.language)
    else:
        language = automaton_to_dict(triple.language)
    return {
        "gamma": list(triple.gamma),
        "h": {c: triple.h[c] for c in triple.gamma},
        "g": {c: [format_weight(triple.g[c][0]), format_weight(triple.g[c][1])]
              for c in triple.gamma},
        "language": language,
        "class": triple.language_class,
    }


def triple_from_dict(data) -> NivatTriple:
    _require_fields(data, ("gamma", "h", "g", "language", "class"), "triple")
    gamma = tuple(str(c) for c in data["gamma"])
    h = {str(c): str(a) for c, a in data["h"].items()}
    g = {}
    for c, pair in data["g"].items():
        if not (isinstance(pair, list) and len(pair) == 2):
            raise ParseError(f"g({c}) must be a [rate, weight] pair")
        g[str(c)] = (parse_weight(str(pair[0])), parse_weight(str(pair[1])))
    language_class = str(data["class"])
    if language_class == "sentence":
        language = rdl.parse_rdl(str(data["language"]))
    else:
        language = automaton_from_dict(data["language"])
    return NivatTriple(gamma, h, g, language, language_class)


# ---------------------------------------------------------------------------
# Assignments


def assignment_from_dict(data) -> rdl.Assignment:
    if not isinstance(data, dict):
        raise ParseError("an assignment is an object with 'fo' and 'so' maps")
    sigma = rdl.Assignment()
    for var, pos in data.get("fo", {}).items():
        if not isinstance(pos, int):
            raise ParseError(f"first-order assignment of {var!r} must be an integer")
        sigma = sigma.with_fo(str(var), pos)
    for var, positions in data.get("so", {}).items():
        if not isinstance(positions, list):
            raise ParseError(f"second-order assignment of {var!r} must be a list")
        sigma = sigma.with_so(str(var), frozenset(int(p) for p in positions))
    return sigma
