"""JSON instance documents, assignment files and dynamics trace text.

Rationals are always written as reduced ``"p/q"`` strings and every list is
sorted before writing, so equal instances serialize to identical bytes.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Iterable

from .core import (
    Assignment,
    Fractional,
    GameError,
    GameInstance,
    Linear,
    ModifiedFractional,
    Social,
    Topology,
    Typed,
)

MODELS = {"fractional": Fractional, "modified": ModifiedFractional, "linear": Linear}


def qstr(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def parse_q(text) -> Fraction:
    if isinstance(text, bool) or not isinstance(text, (str, int)):
        raise GameError(f"rational expected, got {text!r}")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise GameError(f"bad rational {text!r}") from None


def _pairs(edges: Iterable) -> list:
    return sorted([min(u, v), max(u, v)] for u, v in edges)


def to_document(instance: GameInstance) -> dict:
    typed = instance.typed
    agents = []
    for i in range(instance.n):
        entry = {"id": i, "kind": "stubborn" if i in instance.stubborn else "strategic"}
        if typed:
            entry["type"] = instance.type_of(i)
        if i in instance.stubborn:
            entry["node"] = instance.stubborn[i]
        agents.append(entry)
    model = instance.utility
    utility = {"model": model.name}
    if isinstance(model, Linear):
        utility["alpha"] = qstr(model.alpha)
        utility["beta"] = qstr(model.beta)
    doc = {
        "mode": "typed" if typed else "social",
        "topology": {"node_count": instance.topology.node_count,
                     "edges": _pairs(instance.topology.edges)},
        "agents": agents,
        "utility": utility,
    }
    if not typed:
        doc["social_edges"] = _pairs(instance.friendship.edges)
    return doc


def _edge_list(raw, what) -> list:
    if not isinstance(raw, list):
        raise GameError(f"{what} must be a list of [u, v] pairs")
    out = []
    for e in raw:
        if not (isinstance(e, list) and len(e) == 2 and all(type(x) is int for x in e)):
            raise GameError(f"{what}: bad pair {e!r}")
        out.append(tuple(e))
    return out


def from_document(doc: dict) -> GameInstance:
    """Inverse of :func:`to_document`; structural problems raise GameError.

    Model-level constraints (pins, type counts, ...) are left to ``validate``.
    """
    try:
        mode = doc["mode"]
        topo_doc = doc["topology"]
        agents = doc["agents"]
        util_doc = doc.get("utility", {"model": "fractional"})
        node_count = topo_doc["node_count"]
        edges = _edge_list(topo_doc.get("edges", []), "topology.edges")
    except (KeyError, TypeError) as exc:
        raise GameError(f"missing field {exc}") from None
    if mode not in ("typed", "social"):
        raise GameError(f"unknown mode {mode!r}")
    if type(node_count) is not int:
        raise GameError("topology.node_count must be an integer")
    strategic, stubborn, types = set(), {}, {}
    for a in agents:
        try:
            i, kind = a["id"], a["kind"]
            if kind == "stubborn":
                stubborn[i] = a["node"]
            elif kind == "strategic":
                strategic.add(i)
            else:
                raise GameError(f"agent {i}: unknown kind {kind!r}")
            if mode == "typed":
                types[i] = a["type"]
        except (KeyError, TypeError) as exc:
            raise GameError(f"agent entry {a!r} lacks {exc}") from None
    if mode == "typed":
        friendship = Typed(tuple(types[i] for i in sorted(types)))
    else:
        friendship = Social(frozenset(_edge_list(doc.get("social_edges", []), "social_edges")))
    name = util_doc.get("model", "fractional")
    if name not in MODELS:
        raise GameError(f"unknown utility model {name!r}")
    if name == "linear":
        model = Linear(parse_q(util_doc.get("alpha", "1/1")), parse_q(util_doc.get("beta", "0/1")))
    else:
        model = MODELS[name]()
    return GameInstance(Topology(node_count, frozenset(edges)), frozenset(strategic), stubborn,
                        friendship, model)


def dumps(instance: GameInstance) -> str:
    return json.dumps(to_document(instance), sort_keys=True, indent=2) + "\n"


def loads(text: str) -> GameInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GameError(f"malformed JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise GameError("instance document must be a JSON object")
    return from_document(doc)


def read_instance(path: str) -> GameInstance:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def write_instance(instance: GameInstance, path: str):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(instance))


def assignment_document(assignment: Assignment) -> dict:
    return {"nodes": list(assignment.nodes)}


def read_assignment(path: str) -> Assignment:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
            nodes = doc["nodes"] if isinstance(doc, dict) else doc
            return Assignment(tuple(int(v) for v in nodes))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise GameError(f"bad assignment file: {exc}") from None


def trace_lines(trace) -> list:
    """One line per step, fields in a fixed order, then the verdict line."""
    lines = []
    for n, s in enumerate(trace.steps, 1):
        pot = "-" if s.potential_before is None else f"{qstr(s.potential_before)}->{qstr(s.potential_after)}"
        lines.append(f"step {n} agent {s.agent} from {s.source} to {s.target} "
                     f"utility {qstr(s.old_utility)}->{qstr(s.new_utility)} potential {pot}")
    final = " ".join(str(v) for v in trace.final.nodes)
    lines.append(f"{trace.outcome} after {len(trace.steps)} steps: {final}")
    return lines
