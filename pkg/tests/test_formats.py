import json

import numpy as np
import pytest

from semipassive.errors import GraphParseError
from semipassive.formats import (
    dumps,
    format_edge_list,
    graph_to_dict,
    parse_graph,
)

TEXT = """\
# a 3-cycle
nodes 3

1 0 1      # node 1 listens to node 0
2 1 1.5
0 2 1
"""


def test_text_and_json_forms_agree():
    g_text = parse_graph(TEXT)
    g_json = parse_graph(json.dumps(graph_to_dict(g_text)))
    assert g_text == g_json
    assert g_text.edges == ((1, 0, 1.0), (2, 1, 1.5), (0, 2, 1.0))


def test_edge_list_roundtrip():
    g = parse_graph(TEXT)
    assert parse_graph(format_edge_list(g)) == g


@pytest.mark.parametrize(
    "text, line",
    [
        ("nodes 2\n1 0 abc\n", 2),
        ("nodes 2\n\n1 0\n", 3),
        ("1 0 1\n", 1),
        ("nodes 2\n1 1 1\n", 2),
        ("nodes 2\n1 0 1\n# dup\n1 0 2\n", 4),
        ("nodes 2\n1 5 1\n", 2),
        ("nodes x\n", 1),
    ],
)
def test_parse_errors_cite_line(text, line):
    with pytest.raises(GraphParseError) as info:
        parse_graph(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_header():
    with pytest.raises(GraphParseError):
        parse_graph("# nothing\n")


def test_bad_json_graph():
    with pytest.raises(GraphParseError):
        parse_graph('{"nodes": 2, "edges": [{"to": 1}]}')


def test_dumps_is_deterministic_and_full_precision():
    obj = {"b": 0.1, "a": [1.0, 2, np.float64(1 / 3)], "m": np.eye(2), "ok": True, "none": None}
    text = dumps(obj)
    assert text == dumps(obj)
    back = json.loads(text)
    assert list(back) == ["b", "a", "m", "ok", "none"]
    assert back["a"][2] == 1 / 3
    assert "0.33333333333333331" in text
    assert back["m"] == [[1.0, 0.0], [0.0, 1.0]]
