"""Weighted digraphs, their Laplacians and strongly connected components.

Edges are stored as ``(receiver, sender, weight)``: an edge ``(i, j, a)``
means node ``i`` receives information from node ``j`` with weight ``a``, so
``a`` lands in row ``i`` of the Laplacian. Reachability follows the flow of
information, sender -> receiver.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateEdge, IndexOutOfRange, NegativeWeight, SelfLoop

Edge = tuple[int, int, float]


@dataclass(frozen=True)
class DirectedGraph:
    node_count: int
    edges: tuple[Edge, ...]

    def senders(self, i: int) -> list[int]:
        """Nodes sending information to ``i`` (the neighbour set of node i)."""
        return [j for (r, j, _) in self.edges if r == i]

    def successors(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.node_count)]
        for r, s, _ in self.edges:
            out[s].append(r)
        return out

    def weight_matrix(self) -> np.ndarray:
        """Dense ``A`` with ``A[i, j] = a_ij``."""
        a = np.zeros((self.node_count, self.node_count))
        for r, s, w in self.edges:
            a[r, s] = w
        return a

    def relabel(self, new_label: Sequence[int]) -> "DirectedGraph":
        """Graph with node ``k`` renamed to ``new_label[k]``."""
        return build_graph(
            self.node_count,
            [(new_label[r], new_label[s], w) for (r, s, w) in self.edges],
        )

    def subgraph(self, nodes: Sequence[int]) -> "DirectedGraph":
        """Induced subgraph; node ``nodes[k]`` becomes node ``k``."""
        pos = {v: k for k, v in enumerate(nodes)}
        return DirectedGraph(
            len(nodes),
            tuple(
                (pos[r], pos[s], w)
                for (r, s, w) in self.edges
                if r in pos and s in pos
            ),
        )


def build_graph(node_count: int, edge_list: Iterable) -> DirectedGraph:
    """Validate an edge list of ``(receiver, sender, weight)`` triples."""
    if int(node_count) != node_count or node_count < 1:
        raise IndexOutOfRange(f"node_count must be a positive integer, got {node_count!r}")
    node_count = int(node_count)
    seen = set()
    edges = []
    for item in edge_list:
        r, s, w = item
        if int(r) != r or int(s) != s:
            raise IndexOutOfRange(f"non-integer node index in edge {item!r}")
        r, s, w = int(r), int(s), float(w)
        if not (0 <= r < node_count and 0 <= s < node_count):
            raise IndexOutOfRange(f"edge {r}<-{s} outside [0, {node_count})")
        if r == s:
            raise SelfLoop(f"self-loop on node {r}")
        if not math.isfinite(w) or w < 0:
            raise NegativeWeight(f"edge {r}<-{s} has invalid weight {w!r}")
        if (r, s) in seen:
            raise DuplicateEdge(f"edge {r}<-{s} given twice")
        seen.add((r, s))
        edges.append((r, s, w))
    return DirectedGraph(node_count, tuple(edges))


def laplacian(g: DirectedGraph) -> np.ndarray:
    """``L[i, j] = -a_ij`` off the diagonal, ``L[i, i] = sum_l a_il``."""
    a = g.weight_matrix()
    return np.diag(a.sum(axis=1)) - a


def graph_from_laplacian(lap: np.ndarray) -> DirectedGraph:
    """Recover the interconnection graph from the off-diagonal pattern of ``lap``."""
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    edges = [
        (i, j, -lap[i, j])
        for i in range(n)
        for j in range(n)
        if i != j and lap[i, j] != 0.0
    ]
    return build_graph(n, edges)


@dataclass(frozen=True)
class SccPartition:
    components: tuple[tuple[int, ...], ...]
    condensation_edges: tuple[tuple[int, int], ...]

    def component_of(self) -> list[int]:
        n = sum(len(c) for c in self.components)
        label = [0] * n
        for k, comp in enumerate(self.components):
            for v in comp:
                label[v] = k
        return label

    def roots(self) -> list[int]:
        """Components without incoming condensation edges."""
        has_in = {v for (_, v) in self.condensation_edges}
        return [k for k in range(len(self.components)) if k not in has_in]


def _tarjan(n: int, succ: list[list[int]]) -> list[list[int]]:
    # iterative, so deep path graphs do not hit the recursion limit
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, k = work[-1]
            if k < len(succ[v]):
                work[-1] = (v, k + 1)
                w = succ[v][k]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def strongly_connected_components(g: DirectedGraph) -> SccPartition:
    """Maximal strongly connected node sets, ordered by smallest member."""
    comps = sorted(tuple(sorted(c)) for c in _tarjan(g.node_count, g.successors()))
    label = [0] * g.node_count
    for k, comp in enumerate(comps):
        for v in comp:
            label[v] = k
    cond = sorted(
        {(label[s], label[r]) for (r, s, _) in g.edges if label[s] != label[r]}
    )
    return SccPartition(tuple(comps), tuple(cond))


def is_strongly_connected(g: DirectedGraph) -> bool:
    return len(strongly_connected_components(g).components) == 1


def has_spanning_tree(g: DirectedGraph) -> bool:
    """True iff some node reaches every other node along sender -> receiver."""
    return len(strongly_connected_components(g).roots()) == 1


def topological_components(scc: SccPartition) -> list[tuple[int, int]]:
    """Kahn order of the condensation, sources first.

    Among components that are simultaneously available the one holding the
    smallest node index goes first. Returns ``(component, frontier_size)``
    pairs where ``frontier_size`` counts the available components at the
    moment of the pick, i.e. the number of root components of the residual
    graph.
    """
    m = len(scc.components)
    indeg = [0] * m
    succ: list[list[int]] = [[] for _ in range(m)]
    for u, v in scc.condensation_edges:
        succ[u].append(v)
        indeg[v] += 1
    # components are numbered by smallest member, so the id is the tie-break key
    heap = [k for k in range(m) if indeg[k] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        frontier = len(heap)
        k = heapq.heappop(heap)
        order.append((k, frontier))
        for v in succ[k]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(heap, v)
    return order
