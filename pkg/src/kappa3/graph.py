"""Immutable simple graphs and classical connectivity primitives.

Vertices are the integers ``0..n-1``. Edges are stored canonically as
``(u, v)`` with ``u < v`` in sorted order, so iteration is reproducible.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, maximum_flow

from .errors import BadGraph, BadVertex, EmptyGraph, TooSmall

INTERNAL = "internal"
EDGE = "edge"
MODES = (INTERNAL, EDGE)

Edge = tuple[int, int]


def canonical_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Undirected simple graph on vertices ``0..n-1``.

    Instances never change after construction and may be shared freely
    between threads and processes.
    """

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        n = int(n)
        if n < 0:
            raise BadGraph(f"vertex count must be >= 0, got {n}")
        seen: set[Edge] = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise BadGraph(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise BadVertex(f"edge ({u}, {v}) out of range for n={n}")
            ce = canonical_edge(u, v)
            if ce in seen:
                raise BadGraph(f"duplicate edge {ce}")
            seen.add(ce)
        self._n = n
        self._edges: tuple[Edge, ...] = tuple(sorted(seen))

    @classmethod
    def from_arrays(cls, n: int, us: np.ndarray, vs: np.ndarray) -> "Graph":
        """Fast constructor for sampler output (``us < vs``, no duplicates)."""
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        if us.size and (np.any(us >= vs) or us.min() < 0 or vs.max() >= n):
            raise BadGraph("arrays must satisfy 0 <= u < v < n")
        order = np.lexsort((vs, us))
        us, vs = us[order], vs[order]
        if us.size > 1 and np.any((us[1:] == us[:-1]) & (vs[1:] == vs[:-1])):
            raise BadGraph("duplicate edge in arrays")
        g = cls.__new__(cls)
        g._n = int(n)
        g._edges = tuple(zip(us.tolist(), vs.tolist()))
        return g

    @property
    def n(self) -> int:
        return self._n

    @property
    def m(self) -> int:
        return len(self._edges)

    @property
    def edges(self) -> tuple[Edge, ...]:
        return self._edges

    @property
    def max_edges(self) -> int:
        return self._n * (self._n - 1) // 2

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self._n)]
        for u, v in self._edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def masks(self) -> tuple[int, ...]:
        """Neighbourhoods as integer bitmasks (bit ``v`` set for neighbour ``v``)."""
        out = [0] * self._n
        for u, v in self._edges:
            out[u] |= 1 << v
            out[v] |= 1 << u
        return tuple(out)

    @cached_property
    def _edge_set(self) -> frozenset[Edge]:
        return frozenset(self._edges)

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.adjacency)

    def degree(self, v: int) -> int:
        self.check_vertex(v)
        return self.degrees[v]

    def neighbors(self, v: int) -> tuple[int, ...]:
        self.check_vertex(v)
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return canonical_edge(u, v) in self._edge_set

    def check_vertex(self, v: int) -> None:
        if not (isinstance(v, (int, np.integer)) and 0 <= v < self._n):
            raise BadVertex(f"vertex {v!r} not in 0..{self._n - 1}")

    def edge_array(self) -> np.ndarray:
        if not self._edges:
            return np.zeros((0, 2), dtype=np.int64)
        return np.asarray(self._edges, dtype=np.int64)

    def with_edge(self, u: int, v: int) -> "Graph":
        return Graph(self._n, self._edges + (canonical_edge(u, v),))

    def without_vertices(self, removed: Iterable[int]) -> "Graph":
        """Same vertex ids, with every edge touching ``removed`` dropped."""
        gone = set(removed)
        return Graph(self._n, [e for e in self._edges if e[0] not in gone and e[1] not in gone])

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self._n == other._n and self._edges == other._edges

    def __hash__(self) -> int:
        return hash((self._n, self._edges))

    def __repr__(self) -> str:
        return f"Graph(n={self._n}, m={self.m})"


def complete_graph(n: int) -> Graph:
    return Graph(n, itertools.combinations(range(n), 2))


def cycle_graph(n: int) -> Graph:
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> Graph:
    """``K_{1,leaves}`` with centre 0."""
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def empty_graph(n: int) -> Graph:
    return Graph(n)


# ---------------------------------------------------------------------------
# Terminal sets and packings


@dataclass(frozen=True)
class TerminalSet:
    vertices: tuple[int, int, int]

    def __post_init__(self) -> None:
        vs = tuple(int(v) for v in self.vertices)
        if len(vs) != 3 or len(set(vs)) != 3:
            raise BadVertex(f"terminal set needs 3 distinct vertices, got {self.vertices!r}")
        object.__setattr__(self, "vertices", vs)

    @classmethod
    def coerce(cls, s: "TerminalSet | Sequence[int]", g: Graph | None = None) -> "TerminalSet":
        ts = s if isinstance(s, TerminalSet) else cls(tuple(s))  # type: ignore[arg-type]
        if g is not None:
            for v in ts.vertices:
                g.check_vertex(v)
        return ts

    def __iter__(self) -> Iterator[int]:
        return iter(self.vertices)

    def __contains__(self, v: object) -> bool:
        return v in self.vertices

    def as_set(self) -> frozenset[int]:
        return frozenset(self.vertices)


@dataclass(frozen=True)
class SteinerTree:
    vertices: frozenset[int]
    edges: frozenset[Edge]

    @classmethod
    def from_edges(cls, edges: Iterable[Sequence[int]], extra_vertices: Iterable[int] = ()) -> "SteinerTree":
        es = frozenset(canonical_edge(int(e[0]), int(e[1])) for e in edges)
        vs = set(extra_vertices)
        for u, v in es:
            vs.add(u)
            vs.add(v)
        return cls(frozenset(vs), es)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


@dataclass
class TreePacking:
    terminals: TerminalSet
    trees: list[SteinerTree] = field(default_factory=list)
    mode: str = INTERNAL

    def __len__(self) -> int:
        return len(self.trees)

    def to_json(self) -> list[list[list[int]]]:
        return [[list(e) for e in t.sorted_edges()] for t in self.trees]


@dataclass(frozen=True)
class Violation:
    kind: str
    tree: int
    detail: str = ""

    def to_json(self) -> dict:
        return {"kind": self.kind, "tree": self.tree, "detail": self.detail}


# ---------------------------------------------------------------------------
# Basic measurements


def min_degree(g: Graph) -> int:
    if g.n == 0:
        raise EmptyGraph("minimum degree of the empty graph is undefined")
    return min(g.degrees)


def induced_edge_count(g: Graph, s: Iterable[int]) -> int:
    """Number of edges with both endpoints in ``s``."""
    mask = 0
    for v in s:
        g.check_vertex(v)
        mask |= 1 << v
    masks = g.masks
    total = 0
    rest = mask
    while rest:
        low = rest & -rest
        v = low.bit_length() - 1
        total += (masks[v] & mask).bit_count()
        rest ^= low
    return total // 2


def bfs_distances(g: Graph, root: int) -> list[float]:
    """Hop distances from ``root``; unreachable vertices get ``math.inf``."""
    g.check_vertex(root)
    dist: list[float] = [float("inf")] * g.n
    dist[root] = 0
    queue = deque([root])
    adj = g.adjacency
    while queue:
        x = queue.popleft()
        dx = dist[x] + 1
        for y in adj[x]:
            if dist[y] == float("inf"):
                dist[y] = dx
                queue.append(y)
    return dist


def _csr(n: int, rows: np.ndarray, cols: np.ndarray) -> csr_matrix:
    data = np.ones(rows.size, dtype=np.int32)
    mat = csr_matrix((data, (rows, cols)), shape=(n, n))
    mat.sort_indices()
    return mat


def components(g: Graph) -> np.ndarray:
    """Component label for every vertex."""
    if g.n == 0:
        return np.zeros(0, dtype=np.int32)
    e = g.edge_array()
    mat = _csr(g.n, e[:, 0], e[:, 1])
    _, labels = connected_components(mat, directed=False)
    return labels


def is_connected(g: Graph) -> bool:
    if g.n <= 1:
        return True
    if g.m < g.n - 1:
        return False
    return bool(np.all(components(g) == 0))


def is_complete(g: Graph) -> bool:
    return g.m == g.max_edges


# ---------------------------------------------------------------------------
# Flow-based connectivity


def _split_network(g: Graph, skip: frozenset[Edge] = frozenset()) -> csr_matrix:
    """Vertex-split digraph: ``v`` is the in-copy, ``v + n`` the out-copy."""
    n = g.n
    e = [x for x in g.edges if x not in skip] if skip else g.edges
    arr = np.asarray(e, dtype=np.int64).reshape(-1, 2)
    u, v = arr[:, 0], arr[:, 1]
    ids = np.arange(n)
    rows = np.concatenate([ids, u + n, v + n])
    cols = np.concatenate([ids + n, v, u])
    return _csr(2 * n, rows, cols)


def _edge_network(g: Graph) -> csr_matrix:
    arr = g.edge_array()
    u, v = arr[:, 0], arr[:, 1]
    return _csr(g.n, np.concatenate([u, v]), np.concatenate([v, u]))


def _flow(net: csr_matrix, s: int, t: int) -> int:
    return int(maximum_flow(net, s, t, method="dinic").flow_value)


SMALL_FLOW_N = 64


def _unit_flow(res: list[dict[int, int]], s: int, t: int, limit: int | None) -> int:
    """Augmenting-path max flow on a residual table; mutates ``res``."""
    flow = 0
    size = len(res)
    while limit is None or flow < limit:
        parent = [-1] * size
        parent[s] = s
        queue = deque([s])
        while queue and parent[t] < 0:
            x = queue.popleft()
            for y, c in res[x].items():
                if c > 0 and parent[y] < 0:
                    parent[y] = x
                    queue.append(y)
        if parent[t] < 0:
            break
        y = t
        while y != s:
            x = parent[y]
            res[x][y] -= 1
            res[y][x] = res[y].get(x, 0) + 1
            y = x
        flow += 1
    return flow


def local_vertex_connectivity(
    g: Graph, s: int, t: int, removed: Iterable[int] = (), limit: int | None = None
) -> int:
    """Maximum number of internally vertex-disjoint s-t paths.

    A direct edge ``st`` counts as one path. Vertices in ``removed`` are
    deleted first. With ``limit`` the count stops there.
    """
    g.check_vertex(s)
    g.check_vertex(t)
    if s == t:
        raise BadVertex("s and t must differ")
    gone = set(removed)
    direct = int(g.has_edge(s, t) and s not in gone and t not in gone)
    if limit is not None:
        limit = max(0, limit - direct)
    n = g.n
    if n <= SMALL_FLOW_N:
        res: list[dict[int, int]] = [dict() for _ in range(2 * n)]
        for v in range(n):
            if v not in gone:
                res[v][v + n] = 1
        for a, b in g.edges:
            if a in gone or b in gone or {a, b} == {s, t}:
                continue
            res[a + n][b] = 1
            res[b + n][a] = 1
        return _unit_flow(res, s + n, t, limit) + direct
    h = g.without_vertices(gone) if gone else g
    if h.m == 0:
        return 0
    net = _split_network(h, frozenset({canonical_edge(s, t)}) if direct else frozenset())
    flow = _flow(net, s + n, t)
    return (flow if limit is None else min(flow, limit)) + direct


def local_edge_connectivity(
    g: Graph, s: int, t: int, removed: Iterable[int] = (), limit: int | None = None
) -> int:
    """Maximum number of edge-disjoint s-t paths, optionally capped at ``limit``."""
    g.check_vertex(s)
    g.check_vertex(t)
    if s == t:
        raise BadVertex("s and t must differ")
    gone = set(removed)
    if g.n <= SMALL_FLOW_N:
        res: list[dict[int, int]] = [dict() for _ in range(g.n)]
        for a, b in g.edges:
            if a in gone or b in gone:
                continue
            res[a][b] = 1
            res[b][a] = 1
        return _unit_flow(res, s, t, limit)
    h = g.without_vertices(gone) if gone else g
    if h.m == 0:
        return 0
    flow = _flow(_edge_network(h), s, t)
    return flow if limit is None else min(flow, limit)


def vertex_connectivity(g: Graph) -> int:
    """Classical vertex connectivity kappa(G).

    0 for disconnected graphs and ``n - 1`` for complete graphs. Uses the
    Esfahanian-Hakimi pair set: a minimum-degree vertex ``v`` against every
    non-neighbour, plus every non-adjacent pair of neighbours of ``v``.
    """
    if g.n < 2:
        raise TooSmall("vertex connectivity needs n >= 2")
    if not is_connected(g):
        return 0
    if is_complete(g):
        return g.n - 1
    n = g.n
    degs = g.degrees
    v = min(range(n), key=lambda x: (degs[x], x))
    best = degs[v]
    adj_v = set(g.adjacency[v])
    nbrs = g.adjacency[v]
    pairs = [(v, w) for w in range(n) if w != v and w not in adj_v]
    pairs += [
        (x, y) for i, x in enumerate(nbrs) for y in nbrs[i + 1:] if not g.has_edge(x, y)
    ]
    if n <= SMALL_FLOW_N:
        for a, b in pairs:
            best = min(best, local_vertex_connectivity(g, a, b, limit=best))
        return best
    net = _split_network(g)
    for a, b in pairs:
        best = min(best, _flow(net, a + n, b))
    return best


def edge_connectivity(g: Graph) -> int:
    """Classical edge connectivity lambda(G); 0 for disconnected graphs."""
    if g.n < 2:
        raise TooSmall("edge connectivity needs n >= 2")
    if not is_connected(g):
        return 0
    best = min(g.degrees)
    if g.n <= SMALL_FLOW_N:
        for w in range(1, g.n):
            best = min(best, local_edge_connectivity(g, 0, w, limit=best))
        return best
    net = _edge_network(g)
    for w in range(1, g.n):
        best = min(best, _flow(net, 0, w))
    return best


# ---------------------------------------------------------------------------
# Packing validation


def _tree_shape_violations(t: SteinerTree, idx: int, terminals: frozenset[int]) -> list[Violation]:
    out: list[Violation] = []
    for u, v in t.edges:
        if u not in t.vertices or v not in t.vertices:
            out.append(Violation("bad_tree", idx, f"edge ({u}, {v}) has an endpoint outside the vertex set"))
            return out
    missing = sorted(terminals - t.vertices)
    if missing:
        out.append(Violation("not_spanning", idx, f"terminals {missing} not in tree"))
    # union-find for cycles and connectivity
    parent = {v: v for v in t.vertices}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    cycle = False
    for u, v in sorted(t.edges):
        ru, rv = find(u), find(v)
        if ru == rv:
            cycle = True
        else:
            parent[ru] = rv
    if cycle:
        out.append(Violation("cycle", idx, "edge set contains a cycle"))
    roots = {find(v) for v in t.vertices}
    if len(roots) > 1:
        out.append(Violation("disconnected", idx, f"tree has {len(roots)} components"))
    return out


def validate_packing(g: Graph, p: TreePacking) -> list[Violation]:
    """All ways in which ``p`` fails to be a valid packing in ``g``.

    An empty list means the packing is valid for its mode.
    """
    if p.mode not in MODES:
        return [Violation("bad_mode", -1, f"unknown mode {p.mode!r}")]
    terminals = p.terminals.as_set()
    out: list[Violation] = []
    for v in terminals:
        if not (0 <= v < g.n):
            out.append(Violation("bad_terminal", -1, f"terminal {v} not in graph"))
    for i, t in enumerate(p.trees):
        for u, v in sorted(t.edges):
            if not g.has_edge(u, v):
                out.append(Violation("missing_edge", i, f"edge ({u}, {v}) not in host graph"))
        out.extend(_tree_shape_violations(t, i, terminals))
    for i, j in itertools.combinations(range(len(p.trees)), 2):
        a, b = p.trees[i], p.trees[j]
        shared = sorted(a.edges & b.edges)
        if shared:
            out.append(Violation("shared_edge", i, f"trees {i} and {j} share edges {shared}"))
        if p.mode == INTERNAL:
            common = sorted((a.vertices & b.vertices) - terminals)
            if common:
                out.append(Violation("shared_internal_vertex", i, f"trees {i} and {j} share vertices {common}"))
    return out
