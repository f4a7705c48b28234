"""Constructive tree packing following the proof of Theorem 3.

For three large terminals u, v, w:

1. grow a d-ary tree T_u from u and a vertex-disjoint one T_v from v;
2. the subtrees hanging off the depth-1 children are the vice trees; pair a
   vice tree of T_u with one of T_v whenever some edge joins their leaves;
3. grow a shallow d-ary tree T_w avoiding T_u and T_v;
4. join each depth-1 branch of T_w to a distinct vice-tree pair by an edge,
   and read off one tree per joined pair.

Terminals that are small (degree below tau) are first replaced by large
proxy neighbours; one tree is then built per proxy triple, each avoiding the
trees already built, and the terminals are attached to their proxies.

The asymptotic constants of the paper are only defaults; at desk scale they
degenerate (the arity log n / 101 is below 1 for any realistic n) and have
to be set explicitly.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

from .errors import OutOfDomain, PackerFailure
from .graph import (
    INTERNAL,
    Graph,
    SteinerTree,
    TerminalSet,
    TreePacking,
    canonical_edge,
    validate_packing,
)
from .random_models import epsilon, scale_D

# below this many vertices the paper's arity log n / 101 is < 1
PAPER_ARITY_N = math.ceil(math.exp(101))


@dataclass(frozen=True)
class PackerConfig:
    arity: int
    tau: float
    depth_uv: int
    depth_w: int
    k: int = 1
    bad_edge_cap_tree: int = 18
    bad_edge_cap_paths: int | None = None  # None means 12k + 1

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise ValueError("arity must be >= 1")
        if self.depth_uv < 1 or self.depth_w < 1:
            raise ValueError("depths must be >= 1")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.bad_edge_cap_tree < 0 or (self.bad_edge_cap_paths is not None and self.bad_edge_cap_paths < 0):
            raise ValueError("bad-edge caps must be >= 0")

    @property
    def paths_cap(self) -> int:
        return 12 * self.k + 1 if self.bad_edge_cap_paths is None else self.bad_edge_cap_paths

    @classmethod
    def paper_defaults(cls, n: int, k: int = 1) -> "PackerConfig":
        """Constants as in the paper, each clamped to at least 1."""
        if n < 16:
            raise OutOfDomain("paper defaults need n >= 16")
        ln = math.log(n)
        big_d = scale_D(n)
        eps = epsilon(n)
        return cls(
            arity=max(1, math.floor(ln / 101)),
            tau=ln / 100,
            depth_uv=max(1, math.floor((0.75 - eps) * big_d)),
            depth_w=max(1, math.floor((0.25 + 2 * eps) * big_d)),
            k=k,
        )

    @classmethod
    def desk_defaults(cls, k: int = 1) -> "PackerConfig":
        """Constants that give non-trivial packings for n in the low thousands.

        Chosen by a small scan at n = 1000, p = threshold_p(n, 1); they are
        not derived from the paper.
        """
        return cls(arity=4, tau=3.0, depth_uv=3, depth_w=2, k=k)

    def to_json(self) -> dict:
        d = asdict(self)
        d["bad_edge_cap_paths"] = self.paths_cap
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict | str) -> "PackerConfig":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(**data)


@dataclass
class Transcript:
    """Bad-edge counts seen while growing trees.

    Each entry is one vertex expansion: ``tree`` counts neighbours already
    in the tree being grown (Remark 1's b), ``earlier`` counts neighbours in
    trees finished earlier in the same run or otherwise forbidden (Remark
    2's c).
    """

    entries: list[dict] = field(default_factory=list)
    cases: list[str] = field(default_factory=list)

    def record(self, vertex: int, level: int, tree: int, earlier: int) -> None:
        self.entries.append({"vertex": vertex, "level": level, "tree": tree, "earlier": earlier})

    def to_json(self) -> dict:
        return {"entries": self.entries, "cases": self.cases}


@dataclass
class AryTree:
    root: int
    arity: int
    levels: list[list[int]]
    parent: dict[int, int]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.parent) | {self.root}

    @property
    def leaves(self) -> list[int]:
        return list(self.levels[-1])

    def children(self, x: int) -> list[int]:
        return [c for c, p in self.parent.items() if p == x]

    def path_to(self, x: int, top: int) -> list[int]:
        """Vertices from ``x`` up to its ancestor ``top``."""
        out = [x]
        while x != top:
            x = self.parent[x]
            out.append(x)
        return out

    def branch_of(self, x: int) -> int:
        """The depth-1 ancestor of ``x``."""
        cache = self.__dict__.setdefault("_branch", {})
        if x not in cache:
            y = x
            while self.parent.get(y) != self.root:
                y = self.parent[y]
            cache[x] = y
        return cache[x]

    def branch_vertices(self, child: int) -> set[int]:
        return {x for x in self.vertices if x != self.root and self.branch_of(x) == child}

    def branch_leaves(self, child: int) -> list[int]:
        return [x for x in self.levels[-1] if self.branch_of(x) == child]


@dataclass(frozen=True)
class ViceTreePair:
    index: int
    u_child: int
    v_child: int
    y: int
    z: int


def classify_vertices(g: Graph, tau: float) -> tuple[frozenset[int], frozenset[int]]:
    """(large, small): v is large iff deg(v) >= tau."""
    degs = g.degrees
    large = frozenset(v for v in range(g.n) if degs[v] >= tau)
    return large, frozenset(range(g.n)) - large


def _grow(
    g: Graph,
    root: int,
    arity: int,
    depth: int,
    forbidden: frozenset[int],
    small: frozenset[int],
    transcript: Transcript | None,
) -> AryTree:
    if root in forbidden:
        raise ValueError(f"root {root} is forbidden")
    adj = g.adjacency
    level = {root: 0}
    parent: dict[int, int] = {}
    kids: dict[int, list[int]] = {root: []}
    dead: set[int] = set()
    # (level, order) heap of vertices waiting to be expanded
    seq = 0
    todo: list[tuple[int, int, int]] = [(0, 0, root)]
    first_short: tuple[int, int] | None = None

    def release(x: int) -> None:
        for c in kids.pop(x, []):
            release(c)
            del parent[c]
            del level[c]

    def claim(x: int) -> bool:
        """Give ``x`` one more fresh child; False if none is available."""
        nonlocal seq
        lx = level[x]
        for y in adj[x]:
            if y in level or y in forbidden or y in dead:
                continue
            if y in small and lx + 1 < depth:
                continue  # small vertices are never expanded
            level[y] = lx + 1
            parent[y] = x
            kids[x].append(y)
            kids[y] = []
            if lx + 1 < depth:
                seq += 1
                heapq.heappush(todo, (lx + 1, seq, y))
            return True
        return False

    while todo:
        lx, _, x = heapq.heappop(todo)
        if x not in level or level[x] != lx or kids[x]:
            continue  # released or already expanded
        if transcript is not None:
            inside = sum(1 for y in adj[x] if y in level and y != parent.get(x))
            outside = sum(1 for y in adj[x] if y in forbidden)
            transcript.record(x, lx, inside, outside)
        while len(kids[x]) < arity and claim(x):
            pass
        if len(kids[x]) == arity:
            continue
        if first_short is None:
            first_short = (lx, x)
        # x cannot host d children: drop it and ask its parent for another
        while True:
            if x == root:
                lvl, v = first_short
                raise PackerFailure(
                    "growth",
                    f"vertex {v} at level {lvl} cannot supply {arity} fresh children",
                    level=lvl,
                    vertex=v,
                    root=root,
                )
            release(x)
            p = parent.pop(x)
            del level[x]
            kids[p].remove(x)
            dead.add(x)
            if claim(p):
                break
            x = p

    levels: list[list[int]] = [[] for _ in range(depth + 1)]
    for x, lx in level.items():
        levels[lx].append(x)
    for lv in levels:
        lv.sort()
    return AryTree(root, arity, levels, parent)


def grow_ary_tree(
    g: Graph,
    root: int,
    config: PackerConfig,
    forbidden: Iterable[int] = (),
    small: Iterable[int] | None = None,
    transcript: Transcript | None = None,
) -> AryTree:
    """A d-ary tree of depth ``config.depth_uv`` rooted at ``root``.

    Grown breadth first; neighbours already in the tree or in ``forbidden``
    are bad edges and never used. Small vertices may only be leaves. A
    vertex that cannot get ``d`` fresh children is pruned together with its
    subtree and its parent looks for a replacement. Raises PackerFailure
    (stage "growth") if the root itself runs out.
    """
    if small is None:
        small = classify_vertices(g, config.tau)[1]
    return _grow(g, root, config.arity, config.depth_uv, frozenset(forbidden), frozenset(small), transcript)


def grow_terminal_tree(
    g: Graph,
    w: int,
    config: PackerConfig,
    forbidden: Iterable[int] = (),
    small: Iterable[int] | None = None,
    transcript: Transcript | None = None,
) -> AryTree:
    """As :func:`grow_ary_tree` but to depth ``config.depth_w``."""
    if small is None:
        small = classify_vertices(g, config.tau)[1]
    return _grow(g, w, config.arity, config.depth_w, frozenset(forbidden), frozenset(small), transcript)


def pair_vice_trees(g: Graph, tu: AryTree, tv: AryTree) -> list[ViceTreePair]:
    """Greedy lowest-index matching of vice trees joined by a leaf-leaf edge."""
    if tu.vertices & tv.vertices:
        raise ValueError("T_u and T_v must be vertex-disjoint")
    v_leaves = {c: set(tv.branch_leaves(c)) for c in sorted(tv.children(tv.root))}
    taken: set[int] = set()
    pairs = []
    for ci in sorted(tu.children(tu.root)):
        found = None
        for y in tu.branch_leaves(ci):
            for cj, leaves in v_leaves.items():
                if cj in taken:
                    continue
                z = next((z for z in g.adjacency[y] if z in leaves), None)
                if z is not None:
                    found = (cj, y, z)
                    break
            if found:
                break
        if found:
            cj, y, z = found
            taken.add(cj)
            pairs.append(ViceTreePair(len(pairs), ci, cj, y, z))
    return pairs


def _lca(t: AryTree, a: int, b: int) -> int:
    up = set(t.path_to(a, t.root))
    while b not in up:
        b = t.parent[b]
    return b


def _path_edges(t: AryTree, a: int, b: int) -> list[tuple[int, int]]:
    """Edges of the tree path between ``a`` and ``b``."""
    top = _lca(t, a, b)
    pa = t.path_to(a, top)
    pb = t.path_to(b, top)
    seq = pa + pb[-2::-1]
    return list(zip(seq, seq[1:]))


def _assemble_all(
    g: Graph,
    u: int,
    v: int,
    w: int,
    pairs: Sequence[ViceTreePair],
    tu: AryTree,
    tv: AryTree,
    tw: AryTree,
    limit: int | None,
    transcript: Transcript | None,
) -> list[SteinerTree]:
    w_branches = sorted(tw.children(tw.root))
    w_sets = {c: tw.branch_vertices(c) | {c} for c in w_branches}
    used_branches: set[int] = set()
    trees: list[SteinerTree] = []
    for pair in pairs:
        if limit is not None and len(trees) >= limit:
            break
        u_side = tu.branch_vertices(pair.u_child) | {pair.u_child}
        v_side = tv.branch_vertices(pair.v_child) | {pair.v_child}
        hit = None
        for c in w_branches:
            if c in used_branches:
                continue
            for wp in sorted(w_sets[c]):
                x = next((x for x in g.adjacency[wp] if x in u_side or x in v_side), None)
                if x is not None:
                    hit = (c, wp, x)
                    break
            if hit:
                break
        if hit is None:
            continue
        c, wp, x = hit
        used_branches.add(c)
        edges = [(u, pair.u_child), (pair.y, pair.z), (pair.v_child, v), (wp, x), (c, w)]
        if x in u_side:
            side, t, top, leaf = "u", tu, pair.u_child, pair.y
        else:
            side, t, top, leaf = "v", tv, pair.v_child, pair.z
        # {u u_i} + P(u_i, x) + P(x, y), or P(x, y) alone when it runs through u_i
        through = _lca(t, x, leaf) == top
        if not through:
            edges += _path_edges(t, top, x)
        edges += _path_edges(t, x, leaf)
        if side == "u":
            edges += _path_edges(tv, pair.z, pair.v_child)
        else:
            edges += _path_edges(tu, pair.y, pair.u_child)
        edges += _path_edges(tw, wp, c)
        if transcript is not None:
            transcript.cases.append(f"x_in_{side}" + ("_through_root" if through else ""))
        # P(u_i, x) and P(x, y) can overlap; the union is still a subtree
        trees.append(SteinerTree.from_edges({canonical_edge(a, b) for a, b in edges}))
    return trees


def assemble_trees(
    g: Graph,
    u: int,
    v: int,
    w: int,
    pairs: Sequence[ViceTreePair],
    tw: AryTree,
    k: int,
    tu: AryTree,
    tv: AryTree,
    transcript: Transcript | None = None,
) -> TreePacking:
    """Exactly ``k`` internally disjoint trees from pairs joined to T_w branches.

    Branches of T_w are matched to pairs greedily in index order. For a
    pair (T_{u_i}, T_{v_i}) joined by leaf edge yz and a T_w branch
    containing w' adjacent to x, the tree is
    uu_i + P(u_i, x) + P(x, y) + yz + P(z, v_i) + v_i v + w'x + P(w', w_i) + w_i w,
    dropping P(u_i, x) when u_i already lies on P(x, y), and mirrored when
    x sits in T_{v_i}.
    """
    ts = TerminalSet((u, v, w))
    if k <= 0:
        return TreePacking(ts, [], INTERNAL)
    trees = _assemble_all(g, u, v, w, pairs, tu, tv, tw, k, transcript)
    if len(trees) < k:
        raise PackerFailure(
            "assembly", f"only {len(trees)} of {k} pairs reach a branch of T_w", achieved=len(trees)
        )
    return TreePacking(ts, trees, INTERNAL)


def reduce_small_terminals(
    g: Graph,
    s: TerminalSet | Sequence[int],
    tau: float,
    k: int,
) -> list[tuple[int, int, int]]:
    """k proxy triples (u_j, v_j, w_j): large neighbours of u, v, w, all 3k distinct.

    Checks facts 1 and 3 of the proof for the small terminals first. Returns
    the triples in order j = 1..k.
    """
    ts = TerminalSet.coerce(s, g)
    large, small = classify_vertices(g, tau)
    terms = ts.vertices
    for t in terms:
        if t in small:
            bad = [x for x in g.neighbors(t) if x in small]
            if bad:
                raise PackerFailure(
                    "reduction", f"small terminal {t} has small neighbour {bad[0]}", fact=1, vertex=t
                )
    smalls = [t for t in terms if t in small]
    for i, a in enumerate(smalls):
        for b in smalls[i + 1:]:
            common = set(g.neighbors(a)) & set(g.neighbors(b))
            if common:
                raise PackerFailure(
                    "reduction",
                    f"small terminals {a} and {b} share neighbour {min(common)}",
                    fact=3,
                    vertex=min(common),
                )
    taken: set[int] = set(terms)
    picks: dict[int, list[int]] = {}
    # terminals with fewer candidates choose first
    cand = {t: [x for x in g.neighbors(t) if x in large and x not in terms] for t in terms}
    for t in sorted(terms, key=lambda t: (len(cand[t]), t)):
        mine = [x for x in cand[t] if x not in taken][:k]
        if len(mine) < k:
            raise PackerFailure(
                "reduction", f"terminal {t} has only {len(mine)} free large neighbours, needs {k}", vertex=t
            )
        taken.update(mine)
        picks[t] = mine
    return [tuple(picks[t][j] for t in terms) for j in range(k)]  # type: ignore[misc]


def _one_round(
    g: Graph,
    u: int,
    v: int,
    w: int,
    config: PackerConfig,
    forbidden: frozenset[int],
    small: frozenset[int],
    limit: int | None,
    transcript: Transcript | None,
) -> list[SteinerTree]:
    tu = _grow(g, u, config.arity, config.depth_uv, forbidden | {v, w}, small, transcript)
    tv = _grow(g, v, config.arity, config.depth_uv, forbidden | tu.vertices | {w}, small, transcript)
    pairs = pair_vice_trees(g, tu, tv)
    if not pairs:
        raise PackerFailure("pairing", "no leaf edge joins a vice tree of T_u to one of T_v")
    tw = _grow(g, w, config.arity, config.depth_w, forbidden | tu.vertices | tv.vertices, small, transcript)
    return _assemble_all(g, u, v, w, pairs, tu, tv, tw, limit, transcript)


def pack(
    g: Graph,
    s: TerminalSet | Sequence[int],
    config: PackerConfig,
    transcript: Transcript | None = None,
) -> TreePacking:
    """At least ``config.k`` internally disjoint trees connecting ``s``.

    With three large terminals every tree the construction can build is
    returned, so the result may exceed ``k``. Otherwise exactly ``k`` trees
    are built through proxies. Raises PackerFailure with the failing stage.
    """
    ts = TerminalSet.coerce(s, g)
    u, v, w = ts.vertices
    large, small = classify_vertices(g, config.tau)
    if all(t in large for t in ts.vertices):
        trees = _one_round(g, u, v, w, config, frozenset(), small, None, transcript)
        if len(trees) < config.k:
            raise PackerFailure(
                "assembly", f"built {len(trees)} trees, {config.k} requested", achieved=len(trees)
            )
        return _checked(g, TreePacking(ts, trees, INTERNAL))

    proxies = reduce_small_terminals(g, ts, config.tau, config.k)
    all_proxies = {x for triple in proxies for x in triple}
    used: set[int] = set()
    trees = []
    for j, (uj, vj, wj) in enumerate(proxies):
        # earlier trees, other proxies and the terminals are off limits
        forbidden = frozenset(used | (all_proxies - {uj, vj, wj}) | set(ts.vertices))
        try:
            star = _one_round(g, uj, vj, wj, config, forbidden, small, 1, transcript)
        except PackerFailure as exc:
            exc.achieved = j
            raise
        if not star:
            raise PackerFailure("assembly", f"no tree joins proxies {uj}, {vj}, {wj}", achieved=j)
        t_star = star[0]
        used |= t_star.vertices
        trees.append(
            SteinerTree.from_edges(
                set(t_star.edges) | {canonical_edge(u, uj), canonical_edge(v, vj), canonical_edge(w, wj)}
            )
        )
    return _checked(g, TreePacking(ts, trees, INTERNAL))


def _checked(g: Graph, packing: TreePacking) -> TreePacking:
    bad = validate_packing(g, packing)
    if bad:
        raise AssertionError(f"packer produced an invalid packing: {bad[0].kind} ({bad[0].detail})")
    return packing


def packer_lower_bound(g: Graph, s: TerminalSet | Sequence[int], config: PackerConfig) -> int:
    """Number of trees the packer finds for ``s``; 0 when it fails.

    Three large terminals get every tree the construction yields. With a
    small terminal the proxy route is retried from ``config.k`` downwards.
    """
    ts = TerminalSet.coerce(s, g)
    large, small = classify_vertices(g, config.tau)
    if all(t in large for t in ts.vertices):
        u, v, w = ts.vertices
        try:
            return len(_one_round(g, u, v, w, config, frozenset(), small, None, None))
        except PackerFailure:
            return 0
    for k in range(config.k, 0, -1):
        try:
            return len(pack(g, ts, replace(config, k=k)))
        except PackerFailure:
            continue
    return 0
