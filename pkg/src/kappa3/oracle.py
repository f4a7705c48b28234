"""Brute-force packing oracle for tiny graphs.

Deliberately written without any of the machinery in :mod:`kappa3.steiner`.
Every tree connecting S contains a minimal one (all leaves in S), and
shrinking trees keeps a packing valid, so it is enough to enumerate minimal
trees. For three terminals a minimal tree is three paths from a common
centre to the terminals, meeting only at the centre (the centre may be a
terminal, giving a plain path). All such trees are listed, then the largest
pairwise compatible family is found by exhaustive branching.
"""

from __future__ import annotations

from typing import Sequence

from .errors import OracleTooLarge
from .graph import EDGE, INTERNAL, Graph

MAX_N = 10
MAX_EDGES = 20


def _paths(adj: list[set[int]], start: int, goal: int, blocked: frozenset[int]) -> list[tuple[int, ...]]:
    """All simple paths start..goal whose inner vertices avoid ``blocked``."""
    out = []
    stack = [(start, (start,))]
    while stack:
        x, path = stack.pop()
        if x == goal:
            out.append(path)
            continue
        for y in adj[x]:
            if y in path:
                continue
            if y != goal and y in blocked:
                continue
            stack.append((y, path + (y,)))
    return out


def minimal_trees(g: Graph, s: Sequence[int]) -> list[tuple[frozenset, frozenset]]:
    """Every minimal tree spanning ``s`` as (edge set, vertex set)."""
    adj = [set(g.neighbors(v)) for v in range(g.n)]
    terms = tuple(s)
    tset = frozenset(terms)
    found = {}
    for x in range(g.n):
        legs = []
        for t in terms:
            if t == x:
                legs.append([(x,)])
            else:
                # a leg may not pass through another terminal
                legs.append(_paths(adj, x, t, tset - {t}))
        for p0 in legs[0]:
            s0 = set(p0)
            for p1 in legs[1]:
                if s0 & set(p1) != {x}:
                    continue
                s01 = s0 | set(p1)
                for p2 in legs[2]:
                    if s01 & set(p2) != {x}:
                        continue
                    edges = set()
                    for p in (p0, p1, p2):
                        for a, b in zip(p, p[1:]):
                            edges.add((min(a, b), max(a, b)))
                    key = frozenset(edges)
                    found[key] = frozenset(s01 | set(p2))
    return sorted(found.items(), key=lambda kv: sorted(kv[0]))


def oracle_enumerate(g: Graph, s: Sequence[int], mode: str = INTERNAL) -> int:
    """Maximum packing size for ``s`` by exhaustive enumeration."""
    if g.n > MAX_N or g.m > MAX_EDGES:
        raise OracleTooLarge(
            f"oracle is limited to n <= {MAX_N} and |E| <= {MAX_EDGES} (got n={g.n}, |E|={g.m})"
        )
    if mode not in (INTERNAL, EDGE):
        raise ValueError(f"unknown mode {mode!r}")
    terms = tuple(int(t) for t in s)
    if len(set(terms)) != 3 or not all(0 <= t < g.n for t in terms):
        raise ValueError("need three distinct vertices of g")
    tset = set(terms)
    trees = [(e, v - tset if mode == INTERNAL else frozenset()) for e, v in minimal_trees(g, terms)]
    best = 0

    def grow(chosen: int, used_e: frozenset, used_v: frozenset, dead: frozenset) -> None:
        nonlocal best
        best = max(best, chosen)
        # every further tree needs its own unused edge at each terminal
        free_at = {
            t: [e for e in g.edges if t in e and e not in used_e and e not in dead] for t in terms
        }
        room = min(len(v) for v in free_at.values())
        if chosen + room <= best:
            return
        t = min(terms, key=lambda t: (len(free_at[t]), t))
        if not free_at[t]:
            return
        e = free_at[t][0]
        # either some tree of the packing uses e ...
        for te, tv in trees:
            if e in te and not (te & used_e) and not (te & dead) and not (tv & used_v):
                grow(chosen + 1, used_e | te, used_v | tv, dead)
        # ... or no tree does
        grow(chosen, used_e, used_v, dead | {e})

    grow(0, frozenset(), frozenset(), frozenset())
    return best
