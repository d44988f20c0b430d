"""Cascade block lower-triangular form of a spanning-tree Laplacian.

A node permutation ``T`` (stored as the index map ``permutation``, with
``z = T^T x`` meaning ``z[k] = x[permutation[k]]``) brings ``L`` into::

    T^T L T = [[ A11,   0,  ...,   0  ],
               [-A21,  A22, ...,   0  ],
               [  :          .        ],
               [-Am1,  ..., -Am,m-1, Amm]]

with ``A_ii = L_ii + D_i``, ``L_ii`` the Laplacian of a strongly connected
subgraph and ``D_i`` the in-weight arriving from earlier blocks.

The blocks are the strongly connected components taken in a topological
order of the condensation. That is what the iterative peeling argument
produces: the unique root component first, then whatever became a root of
the residual graph. When the residual graph has several roots, the
corresponding blocks are mutually uncoupled; ties go to the component that
holds the smallest node index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoSpanningTree
from .graph import (
    DirectedGraph,
    graph_from_laplacian,
    is_strongly_connected,
    laplacian,
    strongly_connected_components,
    topological_components,
)

ROOT = "root_scc"
PEEL = "case1_peel"
MULTIROOT = "case2_multiroot"


@dataclass(frozen=True)
class BlockDecomposition:
    permutation: tuple[int, ...]
    block_sizes: tuple[int, ...]
    diagonal_blocks: tuple[np.ndarray, ...]
    laplacian_parts: tuple[np.ndarray, ...]
    degree_parts: tuple[np.ndarray, ...]
    # (i, j) -> A_ij for j < i, zero-based block indices
    coupling_blocks: dict = field(default_factory=dict)
    trace: tuple[dict, ...] = ()

    @property
    def m(self) -> int:
        return len(self.block_sizes)

    @property
    def offsets(self) -> list[int]:
        return [0, *np.cumsum(self.block_sizes).tolist()]

    def block_slice(self, i: int) -> slice:
        off = self.offsets
        return slice(off[i], off[i + 1])

    def block_nodes(self, i: int) -> tuple[int, ...]:
        """Original labels of the nodes in block ``i``."""
        return self.permutation[self.block_slice(i)]

    def permutation_matrix(self) -> np.ndarray:
        n = len(self.permutation)
        t = np.zeros((n, n))
        t[list(self.permutation), np.arange(n)] = 1.0
        return t

    def assemble(self) -> np.ndarray:
        """Rebuild ``T^T L T`` from the stored blocks."""
        n = sum(self.block_sizes)
        out = np.zeros((n, n))
        for i in range(self.m):
            si = self.block_slice(i)
            out[si, si] = self.diagonal_blocks[i]
            for j in range(i):
                out[si, self.block_slice(j)] = -self.coupling_blocks[i, j]
        return out

    def to_dict(self) -> dict:
        return {
            "permutation": list(self.permutation),
            "block_sizes": list(self.block_sizes),
            "blocks": [list(self.block_nodes(i)) for i in range(self.m)],
            "diagonal_blocks": [a.tolist() for a in self.diagonal_blocks],
            "laplacian_parts": [a.tolist() for a in self.laplacian_parts],
            "degree_parts": [a.tolist() for a in self.degree_parts],
            "coupling_blocks": [
                {"i": i, "j": j, "matrix": a.tolist()}
                for (i, j), a in sorted(self.coupling_blocks.items())
            ],
            "trace": list(self.trace),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BlockDecomposition":
        arr = lambda rows: np.asarray(rows, dtype=float)  # noqa: E731
        return cls(
            permutation=tuple(int(k) for k in data["permutation"]),
            block_sizes=tuple(int(k) for k in data["block_sizes"]),
            diagonal_blocks=tuple(arr(a) for a in data["diagonal_blocks"]),
            laplacian_parts=tuple(arr(a) for a in data["laplacian_parts"]),
            degree_parts=tuple(arr(a) for a in data["degree_parts"]),
            coupling_blocks={
                (int(c["i"]), int(c["j"])): arr(c["matrix"])
                for c in data["coupling_blocks"]
            },
            trace=tuple(data.get("trace", ())),
        )


def block_triangularize(g: DirectedGraph) -> BlockDecomposition:
    """Permute ``g``'s Laplacian into cascade block lower-triangular form.

    Raises NoSpanningTree when the condensation has more than one root.
    A strongly connected graph gives a single block.
    """
    scc = strongly_connected_components(g)
    roots = scc.roots()
    if len(roots) != 1:
        raise NoSpanningTree(
            f"graph has {len(roots)} root components; a spanning tree needs exactly one"
        )
    order = topological_components(scc)
    blocks = [scc.components[k] for k, _ in order]
    perm = [v for comp in blocks for v in comp]
    permuted = laplacian(g)[np.ix_(perm, perm)]

    sizes = [len(c) for c in blocks]
    off = [0, *np.cumsum(sizes).tolist()]
    diag, lap_parts, deg_parts, coupling, trace = [], [], [], {}, []
    for i, comp in enumerate(blocks):
        si = slice(off[i], off[i + 1])
        inflow = np.zeros(sizes[i])
        for j in range(i):
            # + 0.0 turns the -0.0 produced by negating zeros into +0.0
            a_ij = -permuted[si, off[j]:off[j + 1]] + 0.0
            coupling[i, j] = a_ij
            inflow += a_ij.sum(axis=1)
        diag.append(permuted[si, si].copy())
        lap_parts.append(laplacian(g.subgraph(comp)))
        deg_parts.append(np.diag(inflow))
        frontier = order[i][1]
        path = ROOT if i == 0 else (PEEL if frontier == 1 else MULTIROOT)
        trace.append(
            {"block": i, "nodes": list(comp), "path": path, "residual_roots": frontier}
        )
    return BlockDecomposition(
        permutation=tuple(perm),
        block_sizes=tuple(sizes),
        diagonal_blocks=tuple(diag),
        laplacian_parts=tuple(lap_parts),
        degree_parts=tuple(deg_parts),
        coupling_blocks=coupling,
        trace=tuple(trace),
    )


def apply_permutation(lap: np.ndarray, d: BlockDecomposition) -> np.ndarray:
    """``T^T L T`` for the decomposition's permutation."""
    lap = np.asarray(lap, dtype=float)
    n = len(d.permutation)
    if lap.shape != (n, n):
        raise DimensionMismatch(f"matrix is {lap.shape}, permutation has length {n}")
    return lap[np.ix_(d.permutation, d.permutation)]


def unpermute(mat: np.ndarray, d: BlockDecomposition) -> np.ndarray:
    """Inverse of ``apply_permutation``: ``T M T^T``."""
    inv = np.argsort(d.permutation)
    return np.asarray(mat)[np.ix_(inv, inv)]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    detail: str = ""


@dataclass(frozen=True)
class DecompositionReport:
    checks: tuple[Check, ...]
    trace: tuple[dict, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "residual": c.residual, "detail": c.detail}
                for c in self.checks
            ],
            "trace": list(self.trace),
        }


def _maxabs(a) -> float:
    a = np.asarray(a, dtype=float)
    return float(np.max(np.abs(a))) if a.size else 0.0


def verify_decomposition(g: DirectedGraph, d: BlockDecomposition) -> DecompositionReport:
    """Check every structural identity of ``d`` against ``g``.

    Moved entries (upper blocks, nonnegativity) must hold exactly. Identities
    that involve sums are exact for integer weights and held to
    ``1e-12 * max|L|`` otherwise.
    """
    lap = laplacian(g)
    n = g.node_count
    integral = all(float(w).is_integer() for (_, _, w) in g.edges)
    tol = 0.0 if integral else 1e-12 * max(_maxabs(lap), 1.0)
    checks = []

    shape_ok = (
        sorted(d.permutation) == list(range(n))
        and d.m >= 1
        and all(k > 0 for k in d.block_sizes)
        and sum(d.block_sizes) == n
        and len(d.diagonal_blocks) == len(d.laplacian_parts) == len(d.degree_parts) == d.m
        and all(
            d.diagonal_blocks[i].shape == d.laplacian_parts[i].shape
            == d.degree_parts[i].shape == (d.block_sizes[i],) * 2
            for i in range(d.m)
        )
        and all(
            (i, j) in d.coupling_blocks
            and d.coupling_blocks[i, j].shape == (d.block_sizes[i], d.block_sizes[j])
            for i in range(d.m)
            for j in range(i)
        )
    )
    checks.append(Check("structure", shape_ok, 0.0 if shape_ok else 1.0,
                        "permutation is a bijection, sizes sum to N, block shapes agree"))
    if not shape_ok:
        return DecompositionReport(tuple(checks), d.trace)

    permuted = apply_permutation(lap, d)
    sl = [d.block_slice(i) for i in range(d.m)]

    upper = max(
        (_maxabs(permuted[sl[i], sl[j]]) for i in range(d.m) for j in range(i + 1, d.m)),
        default=0.0,
    )
    checks.append(Check("upper_blocks_zero", upper == 0.0, upper,
                        "T^T L T vanishes strictly above the block diagonal"))

    # L_ii and A_ij pinned to the graph; with the split and degree identities
    # below this also determines A_ii and D_i
    match = 0.0
    for i in range(d.m):
        sub = laplacian(g.subgraph(d.block_nodes(i)))
        match = max(match, _maxabs(d.laplacian_parts[i] - sub))
        for j in range(i):
            match = max(match, _maxabs(d.coupling_blocks[i, j] + permuted[sl[i], sl[j]]))
    checks.append(Check("blocks_match_graph", match <= tol, match,
                        "L_ii and A_ij agree with the permuted Laplacian of g"))

    split = max(
        _maxabs(d.diagonal_blocks[i] - d.laplacian_parts[i] - d.degree_parts[i])
        for i in range(d.m)
    )
    checks.append(Check("diagonal_split", split <= tol, split, "A_ii = L_ii + D_i"))

    rows = max(_maxabs(d.laplacian_parts[i].sum(axis=1)) for i in range(d.m))
    checks.append(Check("laplacian_row_sums", rows <= tol, rows, "L_ii 1 = 0"))

    bad_sc = [
        i for i in range(d.m)
        if not _laplacian_is_sc(d.laplacian_parts[i])
    ]
    checks.append(Check("laplacian_strongly_connected", not bad_sc, float(len(bad_sc)),
                        f"blocks not strongly connected: {bad_sc}" if bad_sc else
                        "every L_ii is the Laplacian of a strongly connected graph"))

    deg = 0.0
    for i in range(d.m):
        dmat = d.degree_parts[i]
        off_diag = dmat - np.diag(np.diag(dmat))
        inflow = np.zeros(d.block_sizes[i])
        for j in range(i):
            inflow = inflow + d.coupling_blocks[i, j].sum(axis=1)
        deg = max(deg, _maxabs(off_diag), _maxabs(np.diag(dmat) - inflow))
    checks.append(Check("degree_identity", deg <= tol, deg,
                        "D_1 = 0 and D_i 1 = sum_{j<i} A_ij 1"))

    low = min(
        [float(np.min(d.coupling_blocks[k])) for k in d.coupling_blocks if d.coupling_blocks[k].size]
        + [float(np.min(dm)) for dm in d.degree_parts]
        + [0.0]
    )
    checks.append(Check("nonnegativity", low >= 0.0, max(0.0, -low),
                        "entries of every A_ij and D_i are >= 0"))
    return DecompositionReport(tuple(checks), d.trace)


def _laplacian_is_sc(lap: np.ndarray) -> bool:
    try:
        return is_strongly_connected(graph_from_laplacian(lap))
    except ValueError:
        # positive off-diagonal entries: not a Laplacian at all
        return False
