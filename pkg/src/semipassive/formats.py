"""Graph file formats and deterministic JSON output.

Text edge lists look like::

    # comment
    nodes 3
    1 0 1.0      # receiver sender weight
    2 1 0.5

The JSON form ``{"nodes": 3, "edges": [{"to": 1, "from": 0, "w": 1.0}]}`` is
accepted interchangeably.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import GraphError, GraphParseError
from .graph import DirectedGraph, build_graph


def parse_edge_list(text: str) -> DirectedGraph:
    node_count = None
    edges = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "nodes":
            if node_count is not None:
                raise GraphParseError("repeated 'nodes' header", lineno)
            if len(tokens) != 2:
                raise GraphParseError("expected 'nodes N'", lineno)
            try:
                node_count = int(tokens[1])
            except ValueError:
                raise GraphParseError(f"bad node count {tokens[1]!r}", lineno) from None
            continue
        if node_count is None:
            raise GraphParseError("edge before 'nodes N' header", lineno)
        if len(tokens) != 3:
            raise GraphParseError(
                f"expected 'receiver sender weight', got {len(tokens)} tokens", lineno
            )
        try:
            receiver, sender = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphParseError(f"bad node index in {line!r}", lineno) from None
        try:
            weight = float(tokens[2])
        except ValueError:
            raise GraphParseError(f"bad weight token {tokens[2]!r}", lineno) from None
        try:
            build_graph(node_count, [(receiver, sender, weight)])
        except GraphError as exc:
            raise GraphParseError(str(exc), lineno) from None
        if (receiver, sender) in seen:
            raise GraphParseError(
                f"duplicate edge {receiver}<-{sender} (first on line {seen[receiver, sender]})",
                lineno,
            )
        seen[receiver, sender] = lineno
        edges.append((receiver, sender, weight))
    if node_count is None:
        raise GraphParseError("missing 'nodes N' header")
    try:
        return build_graph(node_count, edges)
    except GraphError as exc:
        raise GraphParseError(str(exc)) from None


def graph_from_dict(data: dict) -> DirectedGraph:
    try:
        edges = [(e["to"], e["from"], e["w"]) for e in data.get("edges", [])]
        return build_graph(data["nodes"], edges)
    except (KeyError, TypeError) as exc:
        raise GraphParseError(f"malformed graph JSON: {exc!r}") from None


def graph_to_dict(g: DirectedGraph) -> dict:
    return {
        "nodes": g.node_count,
        "edges": [{"to": r, "from": s, "w": w} for (r, s, w) in g.edges],
    }


def parse_graph(text: str) -> DirectedGraph:
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphParseError(exc.msg, exc.lineno) from None
        return graph_from_dict(data)
    return parse_edge_list(text)


def read_graph(path) -> DirectedGraph:
    return parse_graph(Path(path).read_text())


def format_edge_list(g: DirectedGraph) -> str:
    lines = [f"nodes {g.node_count}"]
    lines += [f"{r} {s} {w!r}" for (r, s, w) in g.edges]
    return "\n".join(lines) + "\n"


def _float(x: float) -> str:
    if not math.isfinite(x):
        # JSON has no inf/nan; keep the files parseable
        return json.dumps(str(x))
    out = format(x, ".17g")
    if "e" not in out and "." not in out and "n" not in out:
        out += ".0"
    return out


def _emit(obj, indent: int, level: int, out: list[str]) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, val) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(key))}: ")
            _emit(val, indent, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        flat = all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj)
        if flat:
            parts: list[str] = []
            for v in obj:
                _emit(v, indent, level + 1, parts)
                parts.append(", ")
            out.append("[" + "".join(parts[:-1]) + "]")
            return
        out.append("[\n")
        for k, val in enumerate(obj):
            out.append(pad)
            _emit(val, indent, level + 1, out)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with insertion-ordered keys and 17-significant-digit floats.

    Identical inputs give byte-identical text, which ``json.dumps`` does not
    promise for floats.
    """
    out: list[str] = []
    _emit(obj, indent, 0, out)
    return "".join(out) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))
