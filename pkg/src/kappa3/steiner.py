"""Exact Steiner-tree packing for three terminals.

``kappa(S)`` (internally disjoint trees) and ``lambda(S)`` (edge-disjoint
trees) are computed by iterative deepening on the packing size ``k``. Each
"is there a packing of size k" question is a backtracking search:

* internal mode assigns every non-terminal vertex to one of the ``k`` trees
  or to none, after first distributing the (at most three) terminal-terminal
  edges;
* edge mode assigns every edge to one of the ``k`` trees or to none.

A partial assignment is abandoned as soon as some unfinished tree can no
longer connect the terminals through its own material plus unassigned
material, or a terminal has fewer free ports than trees still lacking one.
Symmetric trees (still empty) are only ever opened in index order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix

from .errors import CapExceeded, TooSmall
from .graph import (
    EDGE,
    INTERNAL,
    MODES,
    Graph,
    SteinerTree,
    TerminalSet,
    TreePacking,
    local_edge_connectivity,
    local_vertex_connectivity,
)

DEFAULT_MAX_N = 16
# backtracking nodes spent on an edge-mode question before handing it to the MILP
EDGE_NODE_BUDGET = 2000


class _OutOfBudget(Exception):
    pass


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _reach(start: int, adj: Sequence[int], allowed: int, extra: dict[int, int] | None = None) -> int:
    """Bitmask of vertices reachable from ``start`` inside ``allowed``."""
    seen = 1 << start
    frontier = seen
    while frontier:
        nxt = 0
        for x in _bits(frontier):
            nxt |= adj[x]
            if extra and x in extra:
                nxt |= extra[x]
        nxt &= allowed & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def _component_mask(g: Graph, root: int) -> int:
    return _reach(root, g.masks, (1 << g.n) - 1)


# ---------------------------------------------------------------------------
# Upper bounds


def upper_bound(g: Graph, s: TerminalSet | Sequence[int], mode: str = INTERNAL) -> int:
    """A cheap upper bound on the packing number for ``s``.

    Combines the terminal degrees, a count of edges incident to ``s``,
    pairwise local edge connectivity, and for every terminal ``w`` the bound
    ``2k <= c(u, v; G - w) + deg(w)``: a tree whose u-v path runs through
    ``w`` spends two of w's edges.
    """
    ts = TerminalSet.coerce(s, g)
    u, v, w = ts.vertices
    degs = g.degrees
    best = min(degs[u], degs[v], degs[w])
    term = ts.as_set()
    e_t = sum(1 for a, b in itertools.combinations(ts.vertices, 2) if g.has_edge(a, b))
    e_x = sum(degs[t] for t in ts.vertices) - 2 * e_t
    ports = len({x for t in ts.vertices for x in g.adjacency[t]} - term)
    count = 0
    for two in range(0, 2 if e_t >= 2 else 1):
        for one in range(0, e_t - 2 * two + 1):
            zero = (e_x - 2 * one) // 3
            if zero < 0:
                continue
            if mode == INTERNAL:
                if one > ports:
                    continue
                zero = min(zero, ports - one)
            count = max(count, zero + one + two)
    best = min(best, count)
    for a, b in itertools.combinations(ts.vertices, 2):
        best = min(best, local_edge_connectivity(g, a, b, limit=best))
    for a, b, c in ((u, v, w), (u, w, v), (v, w, u)):
        # (through + deg c) // 2 < best  iff  through < 2 * best - deg c
        cap = max(0, 2 * best - degs[c])
        if mode == INTERNAL:
            through = local_vertex_connectivity(g, a, b, removed=(c,), limit=cap)
        else:
            through = local_edge_connectivity(g, a, b, removed=(c,), limit=cap)
        best = min(best, (through + degs[c]) // 2)
    return best


# ---------------------------------------------------------------------------
# Tree extraction


def _extract_tree(adj: dict[int, set[int]], terminals: Sequence[int]) -> SteinerTree:
    """A minimal subtree of the connected subgraph ``adj`` spanning ``terminals``."""
    root = terminals[0]
    parent = {root: root}
    order = [root]
    for x in order:
        for y in sorted(adj.get(x, ())):
            if y not in parent:
                parent[y] = x
                order.append(y)
    keep = set(terminals)
    for t in terminals:
        x = t
        while x != root:
            x = parent[x]
            keep.add(x)
    edges = [(x, parent[x]) for x in keep if x != root]
    return SteinerTree.from_edges(edges, extra_vertices=keep)


# ---------------------------------------------------------------------------
# Internal mode


class _InternalSearch:
    def __init__(self, g: Graph, terminals: Sequence[int]):
        self.g = g
        self.terms = tuple(terminals)
        self.tmask = sum(1 << t for t in self.terms)
        masks = g.masks
        self.adj = [m & ~self.tmask if i in self.terms else m for i, m in enumerate(masks)]
        comp = _component_mask(g, self.terms[0])
        self.term_edges = [
            (a, b) for a, b in itertools.combinations(self.terms, 2) if g.has_edge(a, b)
        ]
        degs = g.degrees
        by_degree = sorted(self.terms, key=lambda t: (degs[t], t))
        rank: dict[int, tuple] = {}
        for x in _bits(comp & ~self.tmask):
            first = min(
                (i for i, t in enumerate(by_degree) if masks[x] >> t & 1), default=len(by_degree)
            )
            rank[x] = (first, -bin(masks[x] & self.tmask).count("1"), -degs[x], x)
        # neighbours of the lowest-degree terminal first, then by terminal count
        self.order = sorted(rank, key=rank.__getitem__)
        self.free0 = sum(1 << x for x in self.order)
        self.nodes = 0

    # terminal-edge layouts: list of blocks, each block = terminal edges of one tree
    def _layouts(self, k: int) -> list[list[list[tuple[int, int]]]]:
        te = self.term_edges
        out: list[list[list[tuple[int, int]]]] = []

        def rec(i: int, blocks: list[list[tuple[int, int]]]) -> None:
            if i == len(te):
                if len(blocks) <= k:
                    out.append([list(b) for b in blocks])
                return
            for b in blocks:
                if len(b) < 2:
                    b.append(te[i])
                    rec(i + 1, blocks)
                    b.pop()
            blocks.append([te[i]])
            rec(i + 1, blocks)
            blocks.pop()
            rec(i + 1, blocks)

        rec(0, [])
        # more terminal edges used first: they are free trees or free ports
        out.sort(key=lambda bl: -sum(len(b) for b in bl))
        return out

    def decide(self, k: int) -> list[SteinerTree] | None:
        if k == 0:
            return []
        for layout in self._layouts(k):
            res = self._search_layout(k, layout)
            if res is not None:
                return res
        return None

    def _search_layout(self, k: int, layout: list[list[tuple[int, int]]]) -> list[SteinerTree] | None:
        terms = self.terms
        s0 = terms[0]
        adj = self.adj
        tmask = self.tmask
        extra: list[dict[int, int]] = [dict() for _ in range(k)]
        for i, block in enumerate(layout):
            for a, b in block:
                extra[i][a] = extra[i].get(a, 0) | 1 << b
                extra[i][b] = extra[i].get(b, 0) | 1 << a
        vm = [0] * k
        done = [False] * k
        for i in range(k):
            done[i] = self._connected(i, tmask, extra, adj) if extra[i] else False
        order = self.order
        term_nbr = [self.g.masks[t] & ~tmask for t in terms]

        def tree_ok(i: int, free: int) -> bool:
            r = _reach(s0, adj, tmask | vm[i] | free, extra[i])
            return r & tmask == tmask

        def ports_ok(free: int) -> bool:
            for j, t in enumerate(terms):
                need = 0
                for i in range(k):
                    if done[i]:
                        continue
                    if vm[i] & term_nbr[j] or (t in extra[i]):
                        continue
                    need += 1
                if need and (term_nbr[j] & free).bit_count() < need:
                    return False
            return True

        if not ports_ok(self.free0) or not all(done[i] or tree_ok(i, self.free0) for i in range(k)):
            return None

        def rec(pos: int, free: int) -> bool:
            self.nodes += 1
            if all(done):
                return True
            if pos == len(order):
                return False
            x = order[pos]
            bit = 1 << x
            rest = free & ~bit
            seen_empty = False
            nbrs = adj[x]
            choices = []
            for i in range(k):
                if done[i]:
                    continue
                empty = vm[i] == 0 and not extra[i]
                if empty:
                    if seen_empty:
                        continue
                    seen_empty = True
                touch = bool(nbrs & (vm[i] | tmask))
                choices.append((not touch, i))
            choices.sort()
            for _, i in choices:
                vm[i] |= bit
                was = done[i]
                done[i] = self._connected_vm(i, vm[i], extra, adj)
                ok = ports_ok(rest) and all(
                    done[j] or tree_ok(j, rest) for j in range(k) if j != i
                )
                if ok and rec(pos + 1, rest):
                    return True
                vm[i] &= ~bit
                done[i] = was
            # leave x unused
            if ports_ok(rest) and all(done[j] or tree_ok(j, rest) for j in range(k)):
                if rec(pos + 1, rest):
                    return True
            return False

        if not rec(0, self.free0):
            return None
        trees = []
        for i in range(k):
            members = tmask | vm[i]
            graph_adj: dict[int, set[int]] = {}
            for x in _bits(members):
                nb = (adj[x] & members) | extra[i].get(x, 0)
                graph_adj[x] = set(_bits(nb))
            trees.append(_extract_tree(graph_adj, terms))
        return trees

    def _connected(self, i: int, allowed: int, extra: list[dict[int, int]], adj: Sequence[int]) -> bool:
        r = _reach(self.terms[0], adj, allowed, extra[i])
        return r & self.tmask == self.tmask

    def _connected_vm(self, i: int, vmask: int, extra: list[dict[int, int]], adj: Sequence[int]) -> bool:
        return self._connected(i, self.tmask | vmask, extra, adj)


# ---------------------------------------------------------------------------
# Edge mode


class _EdgeSearch:
    """Edge-to-tree assignment restricted to minimal Steiner tree shapes.

    A minimal tree spanning three terminals has only terminals as leaves, so
    it is acyclic, has at most one vertex of degree 3 and no terminal of
    degree above 2 (at most one of degree 2, and none when a degree-3 vertex
    exists). Some maximum packing consists of such trees only, and each
    one becomes connected exactly when its last edge is assigned; both
    facts are enforced during the search.
    """

    def __init__(self, g: Graph, terminals: Sequence[int]):
        self.g = g
        self.terms = tuple(terminals)
        self.tmask = sum(1 << t for t in self.terms)
        comp = _component_mask(g, self.terms[0])
        degs = g.degrees
        by_degree = sorted(self.terms, key=lambda t: (degs[t], t))
        dist = _multi_bfs(g, self.terms)

        def key(e: tuple[int, int]) -> tuple:
            a, b = e
            first = min(
                (i for i, t in enumerate(by_degree) if t in e), default=len(by_degree)
            )
            return (first, min(dist[a], dist[b]), max(dist[a], dist[b]), e)

        self.order = sorted((e for e in g.edges if comp >> e[0] & 1), key=key)
        self.n = g.n
        self.nodes = 0
        self._internal = _InternalSearch(g, terminals)

    def decide(self, k: int) -> list[SteinerTree] | None:
        if k == 0:
            return []
        # internally disjoint trees are edge-disjoint, and that search is cheap
        quick = self._internal.decide(k)
        if quick is not None:
            return quick
        self.budget = self.nodes + EDGE_NODE_BUDGET
        try:
            return self._search(k)
        except _OutOfBudget:
            return _edge_milp(self.g, self.terms, k)

    def _search(self, k: int) -> list[SteinerTree] | None:
        n = self.n
        terms = self.terms
        s0 = terms[0]
        tmask = self.tmask
        free = [0] * n
        for a, b in self.order:
            free[a] |= 1 << b
            free[b] |= 1 << a
        tadj = [[0] * n for _ in range(k)]
        used = [0] * k  # vertices touched by each tree
        deg3 = [0] * k  # vertices of tree-degree 3
        tdeg2 = [0] * k  # terminals of tree-degree 2
        done = [False] * k
        order = self.order

        def reach(i: int, with_free: bool) -> int:
            ta = tadj[i]
            seen = 1 << s0
            frontier = seen
            while frontier:
                nxt = 0
                for x in _bits(frontier):
                    nxt |= ta[x] | free[x] if with_free else ta[x]
                nxt &= ~seen
                seen |= nxt
                frontier = nxt
            return seen

        def tree_ok(i: int) -> bool:
            if reach(i, True) & tmask != tmask:
                return False
            # a non-terminal leaf that can never grow again is a dead end
            ta = tadj[i]
            for x in _bits(used[i] & ~tmask):
                if ta[x].bit_count() == 1 and not free[x]:
                    return False
            return True

        def minimal(i: int) -> bool:
            ta = tadj[i]
            vs = used[i]
            edges = sum(ta[x].bit_count() for x in _bits(vs)) // 2
            if edges != vs.bit_count() - 1:
                return False
            return all(ta[x].bit_count() >= 2 for x in _bits(vs & ~tmask))

        def ports_ok() -> bool:
            for t in terms:
                need = sum(1 for i in range(k) if not done[i] and not tadj[i][t])
                if need and free[t].bit_count() < need:
                    return False
            return True

        def shape_ok(i: int, a: int, b: int) -> bool:
            ta = tadj[i]
            if used[i] >> a & 1 and used[i] >> b & 1:
                # both endpoints present: the edge must not close a cycle
                seen = 1 << a
                frontier = seen
                while frontier:
                    nxt = 0
                    for x in _bits(frontier):
                        nxt |= ta[x]
                    nxt &= ~seen
                    if nxt >> b & 1:
                        return False
                    seen |= nxt
                    frontier = nxt
            extra3 = 0
            extra2 = 0
            for x in (a, b):
                d = ta[x].bit_count() + 1
                if tmask >> x & 1:
                    if d > 2:
                        return False
                    if d == 2:
                        extra2 += 1
                else:
                    if d > 3:
                        return False
                    if d == 3:
                        extra3 += 1
            n3 = deg3[i] + extra3
            n2 = tdeg2[i] + extra2
            return n3 + n2 <= 1

        if not ports_ok() or not all(tree_ok(i) for i in range(k)):
            return None

        def rec(pos: int) -> bool:
            self.nodes += 1
            if self.nodes > self.budget:
                raise _OutOfBudget
            if all(done):
                return True
            if pos == len(order):
                return False
            a, b = order[pos]
            ba, bb = 1 << a, 1 << b
            free[a] &= ~bb
            free[b] &= ~ba
            seen_empty = False
            choices = []
            for i in range(k):
                if done[i]:
                    continue
                if used[i] == 0:
                    if seen_empty:
                        continue
                    seen_empty = True
                if not shape_ok(i, a, b):
                    continue
                touch = bool(used[i] & (ba | bb)) or bool(tmask & (ba | bb))
                choices.append((not touch, used[i].bit_count(), i))
            choices.sort()
            for _, _, i in choices:
                ta = tadj[i]
                old = (used[i], deg3[i], tdeg2[i])
                ta[a] |= bb
                ta[b] |= ba
                used[i] |= ba | bb
                for x in (a, b):
                    d = ta[x].bit_count()
                    if tmask >> x & 1:
                        tdeg2[i] += d == 2
                    else:
                        deg3[i] += d == 3
                ok = True
                if reach(i, False) & tmask == tmask:
                    ok = minimal(i)
                    done[i] = True
                if ok and ports_ok() and all(done[j] or tree_ok(j) for j in range(k)):
                    if rec(pos + 1):
                        return True
                ta[a] &= ~bb
                ta[b] &= ~ba
                used[i], deg3[i], tdeg2[i] = old
                done[i] = False
            if ports_ok() and all(done[j] or tree_ok(j) for j in range(k)):
                if rec(pos + 1):
                    return True
            free[a] |= bb
            free[b] |= ba
            return False

        if not rec(0):
            return None
        trees = []
        for i in range(k):
            graph_adj = {x: set(_bits(tadj[i][x])) for x in range(n) if tadj[i][x]}
            trees.append(_extract_tree(graph_adj, terms))
        return trees


def _edge_milp(g: Graph, terms: Sequence[int], k: int) -> list[SteinerTree] | None:
    """Decide an edge-mode packing of size ``k`` as a 0/1 program.

    Tree ``i`` owns edges ``x[i, e]``; inside its edges it must carry one
    unit of flow from the first terminal to each of the other two. The
    program is solved by HiGHS; any solution is turned back into trees and
    so is checked like every other witness.
    """
    m = g.m
    edges = g.edges
    u = terms[0]
    arcs = list(edges) + [(b, a) for a, b in edges]
    na = len(arcs)
    tails = np.array([a for a, _ in arcs])
    heads = np.array([b for _, b in arcs])
    arc_edge = np.arange(na) % m
    per = m + 2 * na
    nvar = k * per
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    lo: list[np.ndarray] = []
    hi: list[np.ndarray] = []
    nrow = 0

    def add(r, c, v, low, high):
        nonlocal nrow
        rows.append(np.asarray(r) + nrow)
        cols.append(np.asarray(c))
        vals.append(np.asarray(v, dtype=float))
        lo.append(np.asarray(low, dtype=float))
        hi.append(np.asarray(high, dtype=float))
        nrow += len(low)

    # every edge goes to at most one tree
    add(np.tile(np.arange(m), k), np.concatenate([i * per + np.arange(m) for i in range(k)]),
        np.ones(k * m), np.zeros(m), np.ones(m))
    for i in range(k):
        base = i * per
        for c, t in enumerate(terms[1:]):
            f0 = base + m + c * na
            # flow only on the tree's own edges
            add(np.concatenate([np.arange(na), np.arange(na)]),
                np.concatenate([f0 + np.arange(na), base + arc_edge]),
                np.concatenate([np.ones(na), -np.ones(na)]),
                np.full(na, -np.inf), np.zeros(na))
            # conservation: one unit leaves u and arrives at t
            rhs = np.zeros(g.n)
            rhs[u] = 1.0
            rhs[t] = -1.0
            add(np.concatenate([tails, heads]), np.concatenate([f0 + np.arange(na)] * 2),
                np.concatenate([np.ones(na), -np.ones(na)]), rhs, rhs)
    a_mat = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nrow, nvar)
    ).tocsr()
    integrality = np.zeros(nvar)
    for i in range(k):
        integrality[i * per:i * per + m] = 1
    # Symmetry: order trees by their first edge at the lowest-degree
    # terminal s. Tree i then cannot use any of the first i edges at s.
    upper = np.ones(nvar)
    degs = g.degrees
    s = min(terms, key=lambda t: (degs[t], t))
    s_edges = [j for j, e in enumerate(edges) if s in e]
    for i in range(k):
        for j in s_edges[:i]:
            upper[i * per + j] = 0
    res = milp(
        np.zeros(nvar),
        constraints=LinearConstraint(a_mat, np.concatenate(lo), np.concatenate(hi)),
        integrality=integrality,
        bounds=Bounds(0, upper),
    )
    if res.status == 2:  # infeasible
        return None
    if res.status != 0:
        raise RuntimeError(f"MILP solver did not finish: {res.message}")
    x = res.x
    trees = []
    for i in range(k):
        adj: dict[int, set[int]] = {}
        for e in np.flatnonzero(x[i * per:i * per + m] > 0.5):
            a, b = edges[e]
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        trees.append(_extract_tree(adj, terms))
    return trees


def _multi_bfs(g: Graph, sources: Sequence[int]) -> list[int]:
    big = g.n + 1
    dist = [big] * g.n
    frontier = list(sources)
    for s in sources:
        dist[s] = 0
    d = 0
    while frontier:
        d += 1
        nxt = []
        for x in frontier:
            for y in g.adjacency[x]:
                if dist[y] == big:
                    dist[y] = d
                    nxt.append(y)
        frontier = nxt
    return dist


# ---------------------------------------------------------------------------
# Public API


def _terminals_connected(g: Graph, ts: TerminalSet) -> bool:
    comp = _component_mask(g, ts.vertices[0])
    return all(comp >> t & 1 for t in ts.vertices)


def max_packing(
    g: Graph,
    s: TerminalSet | Sequence[int],
    mode: str = INTERNAL,
    stop_at: int | None = None,
) -> TreePacking:
    """A maximum packing of trees connecting ``s`` in the given mode.

    With ``stop_at`` the search stops once a packing of that size is found,
    so the result is only guaranteed maximum when it is smaller than
    ``stop_at``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    ts = TerminalSet.coerce(s, g)
    packing = TreePacking(ts, [], mode)
    if not _terminals_connected(g, ts):
        return packing
    limit = upper_bound(g, ts, mode)
    if stop_at is not None:
        limit = min(limit, stop_at)
    if limit == 0:
        return packing
    search = _InternalSearch(g, ts.vertices) if mode == INTERNAL else _EdgeSearch(g, ts.vertices)
    # the bound is usually attained, so try it before deepening from 1
    trees = search.decide(limit)
    if trees is not None:
        return TreePacking(ts, trees, mode)
    for k in range(1, limit):
        trees = search.decide(k)
        if trees is None:
            break
        packing = TreePacking(ts, trees, mode)
    return packing


def kappa_S_exact(g: Graph, s: TerminalSet | Sequence[int]) -> int:
    """Largest number of internally disjoint trees connecting ``s``."""
    return len(max_packing(g, s, INTERNAL))


def lambda_S_exact(g: Graph, s: TerminalSet | Sequence[int]) -> int:
    """Largest number of pairwise edge-disjoint trees connecting ``s``."""
    return len(max_packing(g, s, EDGE))


@dataclass
class GeneralizedConnectivity:
    """Result of a minimum over all terminal triples."""

    value: int
    witness: TerminalSet
    packing: TreePacking
    mode: str

    def to_json(self) -> dict:
        key = "kappa3" if self.mode == INTERNAL else "lambda3"
        return {
            key: self.value,
            "witness_S": list(self.witness.vertices),
            "packing": self.packing.to_json(),
        }


def _disconnected_witness(g: Graph) -> TerminalSet:
    comp = _component_mask(g, 0)
    outside = next(v for v in range(g.n) if not comp >> v & 1)
    inside = [v for v in range(g.n) if comp >> v & 1 and v != 0]
    third = inside[0] if inside else next(v for v in range(g.n) if v not in (0, outside))
    return TerminalSet((0, third, outside))


def generalized_connectivity(g: Graph, mode: str = INTERNAL, max_n: int | None = DEFAULT_MAX_N) -> GeneralizedConnectivity:
    """Minimum packing number over all 3-subsets of vertices."""
    if g.n < 3:
        raise TooSmall("generalized 3-connectivity needs n >= 3")
    if max_n is not None and g.n > max_n:
        raise CapExceeded(
            f"exact generalized connectivity is capped at n <= {max_n} (got n={g.n}); "
            "the outer loop is C(n,3) NP-hard searches"
        )
    if not _terminals_connected(g, TerminalSet((0, 1, 2))) or _component_mask(g, 0) != (1 << g.n) - 1:
        ts = _disconnected_witness(g)
        return GeneralizedConnectivity(0, ts, TreePacking(ts, [], mode), mode)
    triples = [TerminalSet(t) for t in itertools.combinations(range(g.n), 3)]
    bounds = {ts: upper_bound(g, ts, mode) for ts in triples}
    triples.sort(key=lambda ts: (bounds[ts], ts.vertices))
    best: GeneralizedConnectivity | None = None
    for ts in triples:
        if best is not None and bounds[ts] >= best.value:
            p = max_packing(g, ts, mode, stop_at=best.value)
            if len(p) >= best.value:
                continue
        else:
            p = max_packing(g, ts, mode)
        if best is None or len(p) < best.value:
            best = GeneralizedConnectivity(len(p), ts, p, mode)
            if best.value == 0:
                break
    assert best is not None
    return best


def kappa3_exact(g: Graph, max_n: int | None = DEFAULT_MAX_N) -> GeneralizedConnectivity:
    return generalized_connectivity(g, INTERNAL, max_n)


def lambda3_exact(g: Graph, max_n: int | None = DEFAULT_MAX_N) -> GeneralizedConnectivity:
    return generalized_connectivity(g, EDGE, max_n)
