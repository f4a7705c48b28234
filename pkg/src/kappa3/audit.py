"""Empirical checks of the structural facts used in the proof.

Lemma 4 (small vertices are far apart), Lemma 5 (no small dense subsets)
and Remarks 1-2 (few bad edges during growth) are almost-sure statements,
so at desk scale they can fail. Everything here counts and reports; nothing
asserts.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from typing import Iterable

from . import _schemas
from .errors import Kappa3Error
from .graph import Graph, induced_edge_count
from .packer import PackerConfig, Transcript, classify_vertices, pack
from .random_models import ModelSpec, derive_seed, scale_D

CHECK_IDS = ("lemma4", "lemma5", "remark1", "remark2")
EXHAUSTIVE = "exhaustive"
SAMPLED = "sampled"


def default_radius(n: int) -> int:
    return math.ceil(3 * scale_D(n) / 4)


def small_pair_distances(g: Graph, tau: float, radius: int) -> list[int]:
    """Distances of all small-vertex pairs that are at most ``radius`` apart."""
    _, small = classify_vertices(g, tau)
    found = []
    adj = g.adjacency
    for s in sorted(small):
        dist = {s: 0}
        frontier = [s]
        for d in range(1, radius + 1):
            nxt = []
            for x in frontier:
                for y in adj[x]:
                    if y not in dist:
                        dist[y] = d
                        nxt.append(y)
            frontier = nxt
        # count each pair once, from its smaller end
        found.extend(d for y, d in dist.items() if y > s and y in small)
    return found


def audit_small_distance(g: Graph, tau: float, radius: int | None = None) -> int:
    """Number of pairs of small vertices within distance ``radius``.

    The default radius is ceil(3D/4).
    """
    if len(classify_vertices(g, tau)[1]) < 2:
        return 0
    if radius is None:
        radius = default_radius(g.n)
    if radius <= 0:
        return 0
    return len(small_pair_distances(g, tau, radius))


@dataclass(frozen=True)
class DenseSubsetResult:
    excess: int  # max e[S] - |S| over explored S
    subset: tuple[int, ...]
    method: str
    max_size: int
    explored: int


def _size_cap(alpha: float, t: int, big_d: float) -> float:
    return alpha * t * big_d


def audit_dense_subsets(
    g: Graph,
    alpha: float,
    t: int,
    D: float,
    budget: int = 200_000,
    seed: int = 0,
) -> DenseSubsetResult:
    """Largest e[S] - |S| over non-empty S with |S| <= alpha t D.

    Exhaustive when C(n, ceil(alpha t D)) <= budget; otherwise greedy
    peeling followed by seeded local search, reported as "sampled".
    """
    cap = _size_cap(alpha, t, D)
    max_size = min(g.n, math.floor(cap + 1e-9))
    if g.n == 0 or max_size < 1:
        return DenseSubsetResult(0, (), EXHAUSTIVE, max(max_size, 0), 0)
    if math.comb(g.n, min(g.n, math.ceil(cap - 1e-9))) <= budget:
        return _dense_exhaustive(g, max_size)
    return _dense_sampled(g, max_size, budget, seed)


def _dense_exhaustive(g: Graph, max_size: int) -> DenseSubsetResult:
    masks = g.masks
    best = None
    best_set: tuple[int, ...] = ()
    explored = 0
    for size in range(1, max_size + 1):
        for combo in itertools.combinations(range(g.n), size):
            explored += 1
            sm = 0
            for v in combo:
                sm |= 1 << v
            e2 = sum((masks[v] & sm).bit_count() for v in combo)
            ex = e2 // 2 - size
            if best is None or ex > best:
                best, best_set = ex, combo
    return DenseSubsetResult(best, best_set, EXHAUSTIVE, max_size, explored)


def _dense_sampled(g: Graph, max_size: int, budget: int, seed: int) -> DenseSubsetResult:
    rng = random.Random(seed)
    adj = g.adjacency

    def excess(sset: set[int]) -> int:
        return induced_edge_count(g, sset) - len(sset)

    # greedy peeling: repeatedly drop a minimum-degree vertex
    alive = set(range(g.n))
    deg = {v: len(adj[v]) for v in alive}
    edges = g.m
    best, best_set = None, ()
    explored = 0
    while alive:
        if len(alive) <= max_size:
            explored += 1
            ex = edges - len(alive)
            if best is None or ex > best:
                best, best_set = ex, tuple(sorted(alive))
        v = min(alive, key=lambda x: (deg[x], x))
        alive.remove(v)
        edges -= deg[v]
        for y in adj[v]:
            if y in alive:
                deg[y] -= 1
    # local search: add, drop or swap one vertex while it helps
    starts = [set(best_set)]
    while len(starts) < 8:
        v = rng.randrange(g.n)
        starts.append({v})
    for cur in starts:
        cur_ex = excess(cur) if cur else 0
        improved = True
        while improved and explored < budget:
            improved = False
            border = sorted({y for x in cur for y in adj[x]} - cur)
            moves = []
            if len(cur) < max_size:
                moves += [(cur | {y}) for y in border]
            if len(cur) > 1:
                moves += [(cur - {x}) for x in sorted(cur)]
                moves += [(cur - {x}) | {y} for x in sorted(cur) for y in border[:20]]
            rng.shuffle(moves)
            for cand in moves:
                explored += 1
                ex = excess(cand)
                if ex > cur_ex:
                    cur, cur_ex, improved = cand, ex, True
                    break
        if cur and (best is None or cur_ex > best):
            best, best_set = cur_ex, tuple(sorted(cur))
    return DenseSubsetResult(best if best is not None else 0, best_set, SAMPLED, max_size, explored)


def _entries(transcripts: Iterable) -> Iterable[dict]:
    for tr in transcripts:
        if isinstance(tr, Transcript):
            yield from tr.entries
        elif isinstance(tr, dict):
            yield tr
        else:
            yield from tr


def audit_bad_edges(transcripts: Iterable) -> dict[str, int]:
    """Maximum bad-edge counts: b against the tree being grown, c against earlier trees."""
    max_b = 0
    max_c = 0
    for e in _entries(transcripts):
        max_b = max(max_b, int(e.get("tree", 0)))
        max_c = max(max_c, int(e.get("earlier", 0)))
    return {"max_b": max_b, "max_c": max_c}


@dataclass
class CheckRecord:
    check: str
    parameters: dict
    samples: int = 0
    violations: int = 0
    extreme: float | int | None = None
    method: str | None = None

    def to_json(self) -> dict:
        d = {
            "check": self.check,
            "parameters": self.parameters,
            "samples": self.samples,
            "violations": self.violations,
            "extreme": self.extreme,
        }
        if self.method is not None:
            d["method"] = self.method
        return d


@dataclass
class AuditReport:
    model: dict
    trials: int
    checks: list[CheckRecord] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"model": self.model, "trials": self.trials, "checks": [c.to_json() for c in self.checks]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def validate_report(data: dict) -> None:
    """Raise jsonschema.ValidationError if ``data`` is not a valid report."""
    _schemas.validate(data, "audit_report.schema.json")


def run_audit(
    spec: ModelSpec,
    trials: int,
    tau: float | None = None,
    radius: int | None = None,
    alpha: float = 0.5,
    t: int = 2,
    budget: int = 200_000,
    packer: PackerConfig | None = None,
) -> AuditReport:
    """Audit ``trials`` graphs drawn from ``spec`` (trial seeds derived from spec.seed)."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n = spec.n
    big_d = scale_D(n)
    tau = math.log(n) / 100 if tau is None else tau
    radius = default_radius(n) if radius is None else radius
    packer = packer or PackerConfig.desk_defaults()
    l4 = CheckRecord("lemma4", {"tau": tau, "radius": radius, "D": big_d})
    l5 = CheckRecord("lemma5", {"alpha": alpha, "t": t, "D": big_d, "budget": budget})
    r1 = CheckRecord("remark1", {"cap": packer.bad_edge_cap_tree, "packer": packer.to_json()})
    r2 = CheckRecord("remark2", {"cap": packer.paths_cap, "packer": packer.to_json()})
    l4.extreme = 0
    methods = set()
    for trial in range(trials):
        seed = derive_seed(spec.seed, trial)
        g = ModelSpec(spec.model, n, spec.parameter, seed).sample()
        close = audit_small_distance(g, tau, radius)
        l4.samples += 1
        l4.violations += close > 0
        l4.extreme = max(l4.extreme, close)
        dense = audit_dense_subsets(g, alpha, t, big_d, budget, seed=seed & 0xFFFFFFFF)
        methods.add(dense.method)
        l5.samples += 1
        l5.violations += dense.excess >= t
        l5.extreme = dense.excess if l5.extreme is None else max(l5.extreme, dense.excess)
        # one packer run on a seeded random triple
        if n >= 3:
            rng = random.Random(seed)
            triple = rng.sample(range(n), 3)
            tr = Transcript()
            try:
                pack(g, triple, packer, transcript=tr)
            except Kappa3Error:
                pass  # growth transcripts are still informative
            for e in tr.entries:
                r1.samples += 1
                r1.violations += e["tree"] > packer.bad_edge_cap_tree
                r2.samples += 1
                r2.violations += e["earlier"] > packer.paths_cap
            maxima = audit_bad_edges([tr])
            r1.extreme = max(r1.extreme or 0, maxima["max_b"])
            r2.extreme = max(r2.extreme or 0, maxima["max_c"])
    l5.method = EXHAUSTIVE if methods == {EXHAUSTIVE} else SAMPLED
    report = AuditReport(spec.to_json(), trials, [l4, l5, r1, r2])
    validate_report(report.to_json())
    return report
