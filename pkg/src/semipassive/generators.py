"""Random digraph families for property tests, acceptance runs and batch CLI use."""
from __future__ import annotations

import numpy as np

from .graph import DirectedGraph, build_graph


def _weight(rng, max_weight, integer):
    if integer:
        return float(rng.integers(1, max_weight + 1))
    return float(rng.uniform(0.1, max_weight))


def random_digraph(rng, n, p=0.3, max_weight=5, integer=True) -> DirectedGraph:
    """Erdos-Renyi digraph; may lack a spanning tree."""
    edges = [
        (i, j, _weight(rng, max_weight, integer))
        for i in range(n)
        for j in range(n)
        if i != j and rng.random() < p
    ]
    return build_graph(n, edges)


def random_spanning_tree_digraph(rng, n, p=0.15, max_weight=5, integer=True) -> DirectedGraph:
    """Random arborescence on shuffled labels plus extra random edges.

    The extra edges may close cycles, so the result ranges from trees to
    strongly connected graphs but always keeps a spanning tree.
    """
    order = rng.permutation(n)
    edges = {}
    for k in range(1, n):
        parent = order[rng.integers(0, k)]
        edges[int(order[k]), int(parent)] = _weight(rng, max_weight, integer)
    for i in range(n):
        for j in range(n):
            if i != j and (i, j) not in edges and rng.random() < p:
                edges[i, j] = _weight(rng, max_weight, integer)
    return build_graph(n, [(i, j, w) for (i, j), w in edges.items()])


def _cycle_edges(rng, nodes, p, max_weight, integer):
    nodes = list(nodes)
    edges = {}
    if len(nodes) > 1:
        ring = [nodes[k] for k in rng.permutation(len(nodes))]
        for k, v in enumerate(ring):
            edges[ring[(k + 1) % len(ring)], v] = _weight(rng, max_weight, integer)
        for i in nodes:
            for j in nodes:
                if i != j and (i, j) not in edges and rng.random() < p:
                    edges[i, j] = _weight(rng, max_weight, integer)
    return edges


def random_strongly_connected(rng, n, p=0.2, max_weight=5, integer=True) -> DirectedGraph:
    """Random Hamiltonian cycle plus extra edges."""
    edges = _cycle_edges(rng, range(n), p, max_weight, integer)
    return build_graph(n, [(i, j, w) for (i, j), w in edges.items()])


def random_block_graph(rng, sizes, p=0.3, cross_p=0.2, max_weight=5, integer=True,
                       shuffle=True) -> DirectedGraph:
    """Chain of strongly connected blocks, each fed by at least one earlier block.

    Cross edges only point from earlier blocks to later ones, so the blocks
    are exactly the strongly connected components and block 0 is the root.
    """
    n = int(sum(sizes))
    bounds = np.concatenate([[0], np.cumsum(sizes)])
    edges = {}
    for b in range(len(sizes)):
        members = range(bounds[b], bounds[b + 1])
        edges.update(_cycle_edges(rng, members, p, max_weight, integer))
        if b == 0:
            continue
        earlier = range(0, bounds[b])
        recv = int(rng.integers(bounds[b], bounds[b + 1]))
        send = int(rng.integers(bounds[b - 1], bounds[b]))
        edges[recv, send] = _weight(rng, max_weight, integer)
        for i in members:
            for j in earlier:
                if (i, j) not in edges and rng.random() < cross_p:
                    edges[i, j] = _weight(rng, max_weight, integer)
    g = build_graph(n, [(i, j, w) for (i, j), w in edges.items()])
    if shuffle:
        g = g.relabel(rng.permutation(n).tolist())
    return g


def random_rooted_at(rng, n, root, p=0.15, max_weight=5, integer=True) -> DirectedGraph:
    """Spanning-tree digraph whose root component is the single node ``root``."""
    g = random_spanning_tree_digraph(rng, n, p, max_weight, integer)
    # drop every edge into the root and re-attach the tree so root reaches all
    order = [root] + [int(v) for v in rng.permutation(n) if v != root]
    edges = {(r, s): w for (r, s, w) in g.edges if r != root}
    for k in range(1, n):
        v = order[k]
        if not any(r == v and s in order[:k] for (r, s) in edges):
            edges[v, order[int(rng.integers(0, k))]] = _weight(rng, max_weight, integer)
    return build_graph(n, [(r, s, w) for (r, s), w in edges.items()])
